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

// Acceptance suite. Each criterion prints one line:
//   AC<n> PASS|FAIL <summary> [<seconds> s]
// and the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hrcs/engine.hpp"
#include "hrcs/estimators.hpp"
#include "hrcs/jsonl.hpp"
#include "hrcs/runner.hpp"
#include "hrcs/theory.hpp"

namespace {

using hrcs::ExperimentKind;
using hrcs::ExperimentSpec;
using hrcs::ResultRecord;
using hrcs::theory::Mode;

constexpr std::uint64_t kSeed = 2026;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ExperimentSpec make_spec(ExperimentKind kind, std::vector<int> na, std::vector<int> nb, std::vector<int> t,
                         int instances) {
  ExperimentSpec s;
  s.kind = kind;
  s.n_system = std::move(na);
  s.n_bath = std::move(nb);
  s.steps = std::move(t);
  s.instances = instances;
  s.master_seed = kSeed;
  return s;
}

// |mean - theory| <= z SE, with a short printable summary.
bool within(const ResultRecord& r, double z, std::string& summary) {
  const double dev = std::abs(r.measured->mean - *r.theory_value);
  const double se = r.measured->std_error;
  summary = fmt("%.6g vs %.6g (%.2f SE)", r.measured->mean, *r.theory_value, se > 0 ? dev / se : 0.0);
  return dev <= z * se;
}

std::string point(const ResultRecord& r) {
  std::string s = "nA=" + std::to_string(r.n_system) + " nB=" + std::to_string(r.n_bath) +
                  " t=" + std::to_string(r.steps);
  if (r.order) s += " K=" + std::to_string(*r.order);
  return s;
}

// Checks every record of `stat` against its theory value within z SE.
void check_records(Outcome& o, const std::vector<ResultRecord>& records, const std::string& stat, double z,
                   double& worst) {
  for (const auto& r : records) {
    if (r.statistic != stat) continue;
    std::string s;
    const bool ok = within(r, z, s);
    const double se = r.measured->std_error;
    worst = std::max(worst, se > 0 ? std::abs(r.measured->mean - *r.theory_value) / se : 0.0);
    o.check(ok, stat + " " + point(r) + ": " + s);
  }
}

Outcome ac1() {
  Outcome o;
  const auto records =
      hrcs::run_experiment(make_spec(ExperimentKind::kCpSweep, {2}, {1}, {1, 2, 3, 4, 5}, 200));
  double worst = 0.0;
  check_records(o, records, "cp", 3.0, worst);
  o.check(records.size() == 5, "record count " + std::to_string(records.size()) + " != 5");
  std::string t2;
  within(records.at(1), 3.0, t2);
  o.detail = "CP N_A=2 N_B=1 t=1..5, 200 instances; t=2 " + t2 + "; worst " + fmt("%.2f", worst) +
             " SE (limit 3)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac2() {
  Outcome o;
  auto spec = make_spec(ExperimentKind::kPsSweep, {2}, {1}, {1, 2, 3, 4, 5}, 200);
  spec.orders = {2, 3, 4};
  const auto records = hrcs::run_experiment(spec);
  double worst = 0.0;
  check_records(o, records, "power_sum", 3.0, worst);
  // K = 2 path against the collision closed form.
  double max_rel = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double closed = 2.0 * std::pow(5.0, t - 1) / std::pow(9.0, t);
    max_rel = std::max(max_rel, std::abs(hrcs::theory::hrcs_power_sum(2, 1, t, 2, Mode::kExact) / closed - 1.0));
  }
  o.check(max_rel <= 1e-12, "K=2 closed form rel diff " + fmt("%.3g", max_rel));
  o.detail = "PS K=3,4 N_A=2 N_B=1 t=1..5, 200 instances; worst " + fmt("%.2f", worst) +
             " SE (limit 3); K=2 vs closed form max rel diff " + fmt("%.2g", max_rel) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac3() {
  Outcome o;
  double max_rel = 0.0;
  for (int n = 2; n <= 20; ++n) {
    for (int na = 1; na < n; ++na) {
      for (int k = 2; k <= 6; ++k) {
        const double haar = hrcs::theory::haar_power_sum(n, k);
        const double hrcs = hrcs::theory::hrcs_power_sum(na, n - na, 1, k, Mode::kExact);
        max_rel = std::max(max_rel, std::abs(hrcs - haar) / haar);
      }
    }
  }
  o.check(max_rel <= 1e-12, "max rel diff " + fmt("%.3g", max_rel));
  o.detail = "t=1 joint PS = Haar PS, N<=20, K=2..6, all splits; max rel diff " + fmt("%.2g", max_rel) +
             " (limit 1e-12)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto records =
      hrcs::run_experiment(make_spec(ExperimentKind::kMarginalSweep, {2}, {1, 2}, {1, 2, 3, 4}, 200));
  double worst = 0.0;
  for (const char* stat : {"cp_spatial", "cp_temporal", "cp_per_step"}) check_records(o, records, stat, 3.0, worst);
  o.check(records.size() == 24, "record count " + std::to_string(records.size()));
  o.detail = "spatial/temporal/per-step CP, N_A=2 N_B=1,2 t=1..4, 200 instances; worst " + fmt("%.2f", worst) +
             " SE (limit 3)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac5() {
  Outcome o;
  auto spec = make_spec(ExperimentKind::kResetCheck, {2}, {1}, {3}, 200);
  spec.orders = {2, 3};
  const auto records = hrcs::run_experiment(spec);
  std::string summary;
  for (const int k : {2, 3}) {
    const ResultRecord* with = nullptr;
    const ResultRecord* without = nullptr;
    for (const auto& r : records) {
      if (r.order != k) continue;
      if (r.statistic == "power_sum_reset") with = &r;
      if (r.statistic == "power_sum_no_reset") without = &r;
    }
    if (!with || !without) {
      o.check(false, "missing records for K=" + std::to_string(k));
      continue;
    }
    const double combined = std::hypot(with->measured->std_error, without->measured->std_error);
    const double dev = std::abs(with->measured->mean - without->measured->mean);
    summary += (summary.empty() ? "" : "; ") + std::string("K=") + std::to_string(k) + " " +
               fmt("%.6g vs %.6g (%.2f combined SE)", with->measured->mean, without->measured->mean,
                   dev / combined);
    o.check(dev <= 3.0 * combined, "K=" + std::to_string(k));
  }
  o.detail = "reset vs no reset, N_A=2 N_B=1 t=3, 200 instances; " + summary + " (limit 3)" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac6() {
  Outcome o;
  hrcs::HrcsConfig c;
  c.n_system = 2;
  c.n_bath = 1;
  c.steps = 2;
  c.master_seed = kSeed;
  const int trajectories = 10000;
  double worst_ps = 0.0, worst_xeb = 0.0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto circuit = hrcs::instantiate_circuit(c, i);
    const auto dist = hrcs::enumerate_joint_distribution(c, circuit);
    hrcs::Rng rng(hrcs::mix_seed({kSeed, hrcs::kShotSalt, i}));
    std::vector<hrcs::TrajectoryRecord> recs;
    std::vector<double> ideal;
    for (int s = 0; s < trajectories; ++s) {
      recs.push_back(hrcs::run_trajectory(c, circuit, std::nullopt, rng));
      ideal.push_back(*recs.back().ideal_probability);
    }
    for (const int k : {2, 3}) {
      const auto mc = hrcs::power_sum_mc(recs, k);
      const double z = std::abs(mc.mean - hrcs::power_sum_exact(dist, k)) / mc.std_error;
      worst_ps = std::max(worst_ps, z);
      o.check(z <= 4.0, "instance " + std::to_string(i) + " K=" + std::to_string(k) + fmt(" at %.2f SE", z));
    }
    const auto xeb = hrcs::xeb_estimate(ideal, c.n_eff());
    const double target = std::ldexp(1.0, c.n_eff()) * hrcs::power_sum_exact(dist, 2) - 1.0;
    const double z = std::abs(xeb.mean - target) / xeb.std_error;
    worst_xeb = std::max(worst_xeb, z);
    o.check(z <= 4.0, "instance " + std::to_string(i) + " XEB" + fmt(" at %.2f SE", z));
  }
  o.detail = "5 fixed instances N_A=2 N_B=1 t=2, 1e4 trajectories each; power sums worst " +
             fmt("%.2f", worst_ps) + " SE, XEB worst " + fmt("%.2f", worst_xeb) + " SE (limit 4)" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac7() {
  Outcome o;
  // (a) Pauli unraveling against the density-matrix oracle.
  hrcs::HrcsConfig c;
  c.n_system = 1;
  c.n_bath = 1;
  c.steps = 2;
  c.master_seed = kSeed;
  const auto noise = hrcs::NoiseModel::uniform(0.7);
  const auto circuit = hrcs::instantiate_circuit(c, 0);
  const auto oracle = hrcs::enumerate_noisy_joint_distribution(c, circuit, noise);
  const int trajectories = 1000000;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(oracle.probabilities.size());
  hrcs::Rng rng(hrcs::mix_seed({kSeed, hrcs::kShotSalt, 0}));
  for (int s = 0; s < trajectories; ++s) {
    const auto r = hrcs::run_trajectory(c, circuit, noise, rng);
    counts(static_cast<Eigen::Index>(hrcs::joint_index(c, r.bath_outcomes, r.final_outcome))) += 1.0;
  }
  const double l1 = (counts / trajectories - oracle.probabilities).cwiseAbs().sum();
  o.check(l1 <= 2e-2, fmt("(a) L1 %.3g", l1));

  // (b) sampled noisy XEB against the transfer-matrix value.
  auto spec = make_spec(ExperimentKind::kNoisyXeb, {2}, {2}, {1, 2, 3, 4}, 100);
  spec.gammas = {0.7};
  spec.shots = 1000;
  const auto records = hrcs::run_experiment(spec);
  double worst = 0.0;
  check_records(o, records, "xeb_noisy", 4.0, worst);
  std::string t4;
  within(records.back(), 4.0, t4);
  o.detail = fmt("(a) L1 %.2e (limit 2e-2) at 1e6 trajectories; ", l1) +
             "(b) noisy XEB gamma=0.7 N_A=N_B=2 t=1..4, 100x1000: t=4 " + t4 + ", worst " + fmt("%.2f", worst) +
             " SE (limit 4)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac8() {
  Outcome o;
  double max_diff = 0.0;
  for (int n = 1; n <= 3; ++n) {
    for (int t = 1; t <= 5; ++t) {
      max_diff = std::max(max_diff, std::abs(hrcs::theory::noisy_xeb(n, n, t, 1.0, Mode::kExact, false) -
                                             hrcs::theory::ideal_xeb(n, n, t, false)));
    }
  }
  o.check(max_diff <= 1e-12, fmt("gamma=1 diff %.3g", max_diff));
  const double asym = hrcs::theory::noisy_xeb(5, 5, 10, 0.69, Mode::kAsymptotic, false);
  o.check(std::abs(asym - 0.0703) <= 0.0005, fmt("asymptotic %.6f", asym));
  o.detail = fmt("gamma=1 vs ideal max diff %.2g (limit 1e-12); asymptotic gamma=0.69 N=5 t=10 = %.5f "
                 "(target 0.0703 +- 0.0005)",
                 max_diff, asym) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac9() {
  Outcome o;
  // (a) Eight pooled d = 2^10 Haar states. One state (1024 values) has a KS
  // sampling floor near 0.04, so the 0.02 threshold is only meaningful once the
  // calibrated 95% point at the pooled count is below it.
  const int states = 8;
  const double dim = 1024.0;
  hrcs::Rng rng(hrcs::mix_seed({kSeed, hrcs::kReferenceSalt}));
  std::vector<double> values;
  for (int s = 0; s < states; ++s) {
    const auto psi = hrcs::sample_haar_state<double>(10, rng);
    const Eigen::VectorXd p = psi.amplitudes().cwiseAbs2();
    values.insert(values.end(), p.data(), p.data() + p.size());
  }
  const double ks_a = hrcs::ks_distance_porter_thomas(values, dim);
  const double q95_a = hrcs::ks_calibration_quantile(values.size(), dim, 400, 0.95, kSeed);
  o.check(q95_a <= 0.02, fmt("(a) calibrated q95 %.4f above threshold", q95_a));
  o.check(ks_a <= 0.02, fmt("(a) KS %.4f", ks_a));

  // (b) HRCS joint distributions, pooled over instances.
  auto spec = make_spec(ExperimentKind::kPopHist, {3}, {2}, {2}, 100);
  const auto records = hrcs::run_experiment(spec);
  const ResultRecord* pooled = nullptr;
  for (const auto& r : records) {
    if (r.statistic == "ks_porter_thomas_pooled") pooled = &r;
  }
  double ks_b = 1.0, q95_b = 1.0;
  if (pooled) {
    ks_b = pooled->measured->mean;
    q95_b = hrcs::ks_calibration_quantile(pooled->measured->count, 128.0, 400, 0.95, kSeed);
  }
  o.check(pooled != nullptr, "(b) no pooled record");
  o.check(q95_b <= 0.05, fmt("(b) calibrated q95 %.4f above threshold", q95_b));
  o.check(ks_b <= 0.05, fmt("(b) KS %.4f", ks_b));
  o.detail = fmt("(a) 8 Haar states d=1024: KS %.4f, PT q95 %.4f (limit 0.02); ", ks_a, q95_a) +
             fmt("(b) HRCS N_A=3 N_B=2 t=2, 100 instances pooled: KS %.4f, PT q95 %.4f (limit 0.05)", ks_b, q95_b) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome ac10() {
  Outcome o;
  const auto records = hrcs::run_experiment(make_spec(ExperimentKind::kTvd, {2}, {1}, {1, 2, 3}, 100));
  std::string summary;
  for (const auto& r : records) {
    const double max_tvd = r.extra.at("max").get<double>();
    const double bound = *r.theory_value;
    const double asym = r.extra.at("bound_asymptotic").get<double>();
    summary += (summary.empty() ? "" : "; ") + std::string("t=") + std::to_string(r.steps) +
               fmt(" mean %.4f max %.4f bound %.4f", r.measured->mean, max_tvd, bound) + fmt(" asym %.4f", asym);
    o.check(max_tvd <= bound, "t=" + std::to_string(r.steps) + " a pair exceeds the exact bound");
    o.check(r.measured->mean < asym, "t=" + std::to_string(r.steps) + " mean not below asymptotic bound");
  }
  // The exact bound holds for the ensemble mean; a single pair can exceed it.
  // The per-pair requirement is checked as stated and reported as it falls.
  o.detail = "100 (HRCS, Haar) pairs N_A=2 N_B=1: " + summary + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

std::string run_to_jsonl(const ExperimentSpec& spec, int workers) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("hrcs_acceptance_" + std::to_string(::getpid()) + "_" + std::to_string(workers) + ".jsonl");
  hrcs::write_records(hrcs::run_experiment(spec, {workers, false}), path.string(), hrcs::OutputFormat::kJsonl);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  std::filesystem::remove(path);
  return os.str();
}

Outcome ac11() {
  Outcome o;
  std::vector<ExperimentSpec> specs;
  for (const auto kind : {ExperimentKind::kCpSweep, ExperimentKind::kPsSweep, ExperimentKind::kMarginalSweep,
                          ExperimentKind::kPopHist, ExperimentKind::kTvd, ExperimentKind::kXeb,
                          ExperimentKind::kNoisyXeb, ExperimentKind::kResetCheck, ExperimentKind::kTheoryTable}) {
    auto s = make_spec(kind, {1, 2}, {1}, {1, 2}, 24);
    s.orders = {2, 3};
    s.gammas = {0.7, 0.9};
    s.shots = 200;
    specs.push_back(s);
  }
  auto hea = make_spec(ExperimentKind::kXeb, {2}, {2}, {2}, 16);
  hea.source = hrcs::UnitarySource::hea(4);
  hea.shots = 100;
  specs.push_back(hea);
  std::size_t bytes = 0;
  for (const auto& s : specs) {
    const auto reference = run_to_jsonl(s, 1);
    bytes += reference.size();
    o.check(!reference.empty(), hrcs::kind_name(s.kind) + " produced no output");
    for (const int w : {1, 2, 4, 7}) {
      o.check(run_to_jsonl(s, w) == reference, hrcs::kind_name(s.kind) + " differs at workers=" + std::to_string(w));
    }
  }
  o.detail = std::to_string(specs.size()) + " specs (all kinds + HEA source) rerun at workers 1,1,2,4,7: " +
             (o.pass ? "byte-identical" : "mismatch") + " (" + std::to_string(bytes) + " bytes each pass)" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget_s;  // 0 = no runtime budget
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, 120, ac1}, {2, 180, ac2}, {3, 0, ac3},    {4, 300, ac4},  {5, 120, ac5},  {6, 60, ac6},
      {7, 600, ac7}, {8, 0, ac8},   {9, 120, ac9}, {10, 180, ac10}, {11, 0, ac11},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; runtime %.1f s over budget %.0f s", secs, c.budget_s);
    }
    std::printf("AC%d %s %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
