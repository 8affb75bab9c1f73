// Copyright 2026 The HRCS Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hrcs/jsonl.hpp"
#include "hrcs/runner.hpp"
#include "hrcs/theory.hpp"

namespace hrcs {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("hrcs_test_runner_" + std::to_string(::getpid()) + "_" + name);
}

std::string render(const std::vector<ResultRecord>& records) {
  std::string out;
  for (const auto& r : records) out += dump_canonical(to_json(r)) + "\n";
  return out;
}

ExperimentSpec parse(const char* text) { return spec_from_json(nlohmann::json::parse(text)); }

// ---------- spec parsing ----------

TEST(SpecFromJson, ScalarsAndListsAccepted) {
  const auto s = parse(R"({"schema_version": 1, "kind": "ps_sweep", "n_system": 2, "n_bath": [1, 2],
                           "steps": [1, 2, 3], "orders": [3, 4], "instances": 7, "master_seed": 9})");
  EXPECT_EQ(s.kind, ExperimentKind::kPsSweep);
  EXPECT_EQ(s.n_system, std::vector<int>{2});
  EXPECT_EQ(s.n_bath, (std::vector<int>{1, 2}));
  EXPECT_EQ(s.steps.size(), 3u);
  EXPECT_EQ(s.orders, (std::vector<int>{3, 4}));
  EXPECT_EQ(s.instances, 7);
  EXPECT_EQ(s.master_seed, 9u);
  EXPECT_EQ(s.shots, 1000);  // default
}

TEST(SpecFromJson, RoundTripsThroughJson) {
  auto s = parse(R"({"schema_version": 1, "kind": "noisy_xeb", "gammas": [0.7, 0.9], "source": "hea",
                     "layers": 4, "reset_bath": false})");
  EXPECT_EQ(s.source, UnitarySource::hea(4));
  const auto again = spec_from_json(to_json(s));
  EXPECT_EQ(dump_canonical(to_json(again)), dump_canonical(to_json(s)));
  EXPECT_EQ(spec_hash(again), spec_hash(s));
  s.master_seed = 1;
  EXPECT_NE(spec_hash(s), spec_hash(again));
}

TEST(SpecFromJson, RejectsMalformedDocuments) {
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "cp_sweep", "nsystem": 2})"), ConfigError);
  EXPECT_THROW(parse(R"({"kind": "cp_sweep"})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 2, "kind": "cp_sweep"})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "nope"})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "cp_sweep", "steps": []})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "cp_sweep", "steps": "two"})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "cp_sweep", "instances": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"schema_version": 1, "kind": "noisy_xeb", "gammas": 1.5})"), ConfigError);
  EXPECT_THROW(parse("[1, 2]"), ConfigError);
}

TEST(KindName, RoundTrip) {
  for (const char* name : {"cp_sweep", "ps_sweep", "marginal_sweep", "pop_hist", "tvd", "xeb", "noisy_xeb",
                           "theory_table", "reset_check"}) {
    EXPECT_EQ(kind_name(kind_from_name(name)), name);
  }
  EXPECT_THROW(kind_from_name("CP_SWEEP"), ConfigError);
}

// ---------- output ----------

TEST(WriteRecords, EmptyCsvIsHeaderOnly) {
  const auto path = temp_path("empty.csv");
  write_records({}, path.string(), OutputFormat::kCsv);
  EXPECT_EQ(read_file(path), std::string(kCsvHeader) + "\n");
  fs::remove(path);
}

TEST(WriteRecords, CsvRowLayout) {
  ResultRecord r;
  r.n_system = 2;
  r.n_bath = 1;
  r.steps = 3;
  r.order = 2;
  r.gamma = 1.0;
  r.statistic = "cp";
  r.measured = EnsembleStats{10, 0.25, 0.5};
  r.theory_value = 0.125;
  EXPECT_EQ(to_csv_row(r), "2,1,3,2,1.0,cp,0.25,0.5,0.125");
  r.order.reset();
  r.measured.reset();
  EXPECT_EQ(to_csv_row(r), "2,1,3,,1.0,cp,,,0.125");
}

TEST(WriteRecords, JsonlRoundTrip) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kMarginalSweep;
  spec.n_system = {2};
  spec.n_bath = {1};
  spec.steps = {1, 2};
  spec.instances = 5;
  spec.master_seed = 3;
  const auto records = run_experiment(spec, {1, false});
  ASSERT_EQ(records.size(), 6u);
  const auto path = temp_path("round.jsonl");
  write_records(records, path.string(), OutputFormat::kJsonl);
  const auto back = read_records_jsonl(path.string());
  EXPECT_EQ(render(back), render(records));
  EXPECT_EQ(read_file(path), render(records));
  fs::remove(path);
}

TEST(WriteRecords, UnwritablePathIsConfigError) {
  EXPECT_THROW(write_records({}, "/nonexistent-dir/x.csv", OutputFormat::kCsv), ConfigError);
}

TEST(FormatFromName, KnownAndUnknown) {
  EXPECT_EQ(format_from_name("csv"), OutputFormat::kCsv);
  EXPECT_EQ(format_from_name("jsonl"), OutputFormat::kJsonl);
  EXPECT_THROW(format_from_name("xml"), ConfigError);
}

// ---------- experiments ----------

TEST(RunExperiment, TheoryTableIsPureAndDeterministic) {
  const auto spec = parse(R"({"schema_version": 1, "kind": "theory_table", "n_system": 1, "n_bath": 1,
                              "steps": [1, 2], "families": ["hrcs_power_sum", "ideal_xeb", "tvd_bound"]})");
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec, {4, false});
  EXPECT_EQ(render(a), render(b));
  bool saw_cp = false, saw_xeb = false;
  for (const auto& r : a) {
    EXPECT_FALSE(r.measured.has_value());
    if (r.steps == 2 && r.theory_source == "hrcs_power_sum_exact" && r.order == 2) {
      EXPECT_NEAR(*r.theory_value, 0.24, 1e-15);
      saw_cp = true;
    }
    if (r.steps == 2 && r.theory_source == "ideal_xeb") {
      EXPECT_NEAR(*r.theory_value, 0.92, 1e-14);
      saw_xeb = true;
    }
  }
  EXPECT_TRUE(saw_cp);
  EXPECT_TRUE(saw_xeb);
}

TEST(RunExperiment, TheoryTableRecordsDomainErrors) {
  const auto spec = parse(R"({"schema_version": 1, "kind": "theory_table", "families": "critical_steps",
                              "epsilons": 0.01})");
  const auto records = run_experiment(spec);
  bool saw_error = false;
  for (const auto& r : records) {
    if (r.extra.contains("domain_error")) {
      saw_error = true;
      EXPECT_FALSE(r.theory_value.has_value());
    }
  }
  EXPECT_TRUE(saw_error);
}

TEST(RunExperiment, CpSweepMatchesClosedForm) {
  const auto spec = parse(R"({"schema_version": 1, "kind": "cp_sweep", "n_system": 2, "n_bath": 1,
                              "steps": [1, 2, 3, 4, 5], "instances": 200, "master_seed": 2026})");
  const auto records = run_experiment(spec);
  ASSERT_EQ(records.size(), 5u);
  for (const auto& r : records) {
    EXPECT_EQ(r.statistic, "cp");
    EXPECT_EQ(r.measured->count, 200u);
    EXPECT_DOUBLE_EQ(*r.theory_value, theory::hrcs_cp(2, 1, r.steps));
    EXPECT_NEAR(r.measured->mean, *r.theory_value, 3 * r.measured->std_error) << "t=" << r.steps;
  }
  EXPECT_NEAR(*records[0].theory_value, 0.2222, 1e-4);
  EXPECT_NEAR(*records[1].theory_value, 0.1235, 1e-4);
}

TEST(RunExperiment, ByteIdenticalAcrossWorkerCounts) {
  for (const char* kind : {"cp_sweep", "noisy_xeb", "pop_hist", "tvd", "reset_check"}) {
    nlohmann::json j = {{"schema_version", 1}, {"kind", kind},       {"n_system", 1},  {"n_bath", 1},
                        {"steps", {1, 2}},     {"instances", 9},     {"shots", 50},    {"gammas", {0.7}},
                        {"master_seed", 77}};
    const auto spec = spec_from_json(j);
    const auto serial = render(run_experiment(spec, {1, false}));
    EXPECT_EQ(render(run_experiment(spec, {1, false})), serial) << kind;
    EXPECT_EQ(render(run_experiment(spec, {3, false})), serial) << kind;
    EXPECT_EQ(render(run_experiment(spec, {8, false})), serial) << kind;
  }
}

TEST(RunExperiment, AddingPointsKeepsExistingInstances) {
  auto spec = parse(R"({"schema_version": 1, "kind": "cp_sweep", "n_system": 1, "n_bath": 1, "steps": 2,
                        "instances": 10, "master_seed": 5})");
  const auto alone = run_experiment(spec);
  spec.steps = {1, 2, 3};
  const auto swept = run_experiment(spec);
  EXPECT_DOUBLE_EQ(swept[1].measured->mean, alone[0].measured->mean);
}

TEST(RunExperiment, TimingIsOptIn) {
  const auto spec = parse(R"({"schema_version": 1, "kind": "cp_sweep", "instances": 2})");
  EXPECT_FALSE(run_experiment(spec)[0].wall_time_s.has_value());
  EXPECT_TRUE(run_experiment(spec, {1, true})[0].wall_time_s.has_value());
}

TEST(RunExperiment, CapacityRefusedBeforeAnyWork) {
  // The first point is cheap; the last exceeds enumeration capacity. The
  // refusal must come before the first point runs, so it is near-instant even
  // with a large instance count.
  const auto spec = parse(R"({"schema_version": 1, "kind": "cp_sweep", "n_system": 2, "n_bath": 1,
                              "steps": [1, 40], "instances": 1000000})");
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(run_experiment(spec), CapacityError);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(RunInstances, ResultsByIndex) {
  HrcsConfig c;
  const auto v = run_instances<std::uint64_t>(100, 4, c, [](std::uint64_t i) { return i * i; });
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(v[i], i * i);
}

TEST(RunInstances, FailureNamesLowestIndexAndSeed) {
  HrcsConfig c;
  c.master_seed = 42;
  for (int workers : {1, 4}) {
    try {
      run_instances<int>(50, workers, c, [](std::uint64_t i) -> int {
        if (i == 7 || i == 30) throw DegenerateBranchError("boom");
        return 0;
      });
      FAIL() << "expected InstanceFailure";
    } catch (const InstanceFailure& e) {
      const std::string what = e.what();
      EXPECT_NE(what.find("instance 7 "), std::string::npos) << what;
      EXPECT_NE(what.find(to_hex(circuit_seed(c, 7))), std::string::npos) << what;
      EXPECT_NE(what.find("boom"), std::string::npos);
    }
  }
}

}  // namespace
}  // namespace hrcs
