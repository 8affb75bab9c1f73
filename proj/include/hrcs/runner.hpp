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

// Seeded ensemble experiments: parse a JSON spec, fan instances out over a
// worker pool, aggregate in instance order, attach closed-form references,
// and persist the records as JSONL or CSV. See docs/config_schema.md.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hrcs/engine.hpp"
#include "hrcs/estimators.hpp"

namespace hrcs {

enum class ExperimentKind {
  kCpSweep,
  kPsSweep,
  kMarginalSweep,
  kPopHist,
  kTvd,
  kXeb,
  kNoisyXeb,
  kTheoryTable,
  kResetCheck,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

inline constexpr int kSchemaVersion = 1;

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kCpSweep;
  std::vector<int> n_system{1};
  std::vector<int> n_bath{1};
  std::vector<int> steps{1};
  std::vector<int> orders{2};
  std::vector<double> gammas{1.0};
  std::vector<double> epsilons{1.0};  // theory_table critical steps only
  std::vector<std::string> families;  // theory_table only; empty = all
  bool reset_bath = true;
  UnitarySource source;
  int instances = 100;
  int shots = 1000;
  int bins = 50;  // pop_hist only
  std::uint64_t master_seed = 0;
  std::string output;

  void validate() const;
};

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);
/// FNV-1a of the canonical JSON rendering, as a hex string.
std::string spec_hash(const ExperimentSpec& spec);

struct ResultRecord {
  std::string spec_hash;
  std::string kind;
  int n_system = 0;
  int n_bath = 0;
  int steps = 0;
  std::optional<int> order;
  double gamma = 1.0;
  std::string statistic;
  std::optional<EnsembleStats> measured;
  std::optional<double> theory_value;
  std::string theory_source;  // empty when there is no reference value
  nlohmann::json extra = nlohmann::json::object();
  std::optional<double> wall_time_s;
};

struct RunOptions {
  /// 0 = one per hardware thread.
  int workers = 0;
  /// Record wall time per parameter point. Off by default so reruns are byte-identical.
  bool timing = false;
};

/// Raised when an instance fails; names the instance and its circuit seed.
class InstanceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results are
/// stored by index, so output is independent of worker count and scheduling.
/// If any instance throws, raises InstanceFailure for the lowest failing index.
template <typename T, typename Fn>
std::vector<T> run_instances(int count, int workers, const HrcsConfig& config, Fn&& fn) {
  std::vector<T> results(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[static_cast<std::size_t>(i)] = fn(static_cast<std::uint64_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const int n_threads = std::max(1, std::min(workers, count));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < count; ++i) {
    if (!errors[static_cast<std::size_t>(i)]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw InstanceFailure("instance " + std::to_string(i) + " (circuit seed " +
                          to_hex(circuit_seed(config, static_cast<std::uint64_t>(i))) + ") failed: " + what);
  }
  return results;
}

/// Capacity for every parameter point is checked before any work starts.
std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

enum class OutputFormat { kJsonl, kCsv };

OutputFormat format_from_name(const std::string& name);

/// Column order of the CSV output.
inline constexpr const char* kCsvHeader = "n_A,n_B,t,K,gamma,statistic,mean,std_error,theory_value";

nlohmann::json to_json(const ResultRecord& record);
ResultRecord record_from_json(const nlohmann::json& j);
std::string to_csv_row(const ResultRecord& record);

/// Writes to `path`, or to stdout when path is empty or "-".
void write_records(const std::vector<ResultRecord>& records, const std::string& path, OutputFormat format);
std::vector<ResultRecord> read_records_jsonl(const std::string& path);

}  // namespace hrcs
