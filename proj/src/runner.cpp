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

#include "hrcs/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "hrcs/jsonl.hpp"
#include "hrcs/theory.hpp"

namespace hrcs {
namespace {

using theory::MarginalKind;
using theory::Mode;

const std::vector<std::pair<ExperimentKind, std::string>>& kind_table() {
  static const std::vector<std::pair<ExperimentKind, std::string>> table = {
      {ExperimentKind::kCpSweep, "cp_sweep"},         {ExperimentKind::kPsSweep, "ps_sweep"},
      {ExperimentKind::kMarginalSweep, "marginal_sweep"}, {ExperimentKind::kPopHist, "pop_hist"},
      {ExperimentKind::kTvd, "tvd"},                  {ExperimentKind::kXeb, "xeb"},
      {ExperimentKind::kNoisyXeb, "noisy_xeb"},       {ExperimentKind::kTheoryTable, "theory_table"},
      {ExperimentKind::kResetCheck, "reset_check"},
  };
  return table;
}

const std::set<std::string>& theory_families() {
  static const std::set<std::string> families = {
      "haar_power_sum", "hrcs_power_sum", "marginal_cp",    "critical_steps",
      "tvd_bound",      "ideal_xeb",      "noisy_xeb",      "haar_subsystem_cp",
  };
  return families;
}

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_array()) {
    auto out = v.get<std::vector<T>>();
    if (out.empty()) throw ConfigError(std::string("'") + key + "' must not be empty");
    return out;
  }
  return {v.get<T>()};
}

std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string csv_double(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

std::uint64_t shot_seed(const HrcsConfig& config, std::uint64_t index, double gamma) {
  return mix_seed({config.master_seed, kShotSalt, index, static_cast<std::uint64_t>(config.n_system),
                   static_cast<std::uint64_t>(config.n_bath), static_cast<std::uint64_t>(config.steps),
                   static_cast<std::uint64_t>(config.source.kind),
                   static_cast<std::uint64_t>(config.source.layers), double_bits(gamma)});
}

std::uint64_t reference_seed(const HrcsConfig& config, std::uint64_t index) {
  return mix_seed({config.master_seed, kReferenceSalt, index, static_cast<std::uint64_t>(config.n_system),
                   static_cast<std::uint64_t>(config.n_bath), static_cast<std::uint64_t>(config.steps)});
}

/// Aggregates column j of per-instance value rows.
EnsembleStats column_stats(const std::vector<std::vector<double>>& rows, std::size_t j) {
  Accumulator acc;
  for (const auto& r : rows) acc.add(r.at(j));
  return acc.stats();
}

class Runner {
 public:
  Runner(const ExperimentSpec& spec, const RunOptions& options)
      : spec_(spec), options_(options), hash_(spec_hash(spec)) {
    workers_ = options.workers > 0 ? options.workers
                                   : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  }

  std::vector<ResultRecord> run() {
    precheck();
    for (const int na : spec_.n_system) {
      for (const int nb : spec_.n_bath) {
        for (const int t : spec_.steps) run_point(na, nb, t);
      }
    }
    return std::move(records_);
  }

 private:
  HrcsConfig config(int na, int nb, int t, double gamma = 1.0) const {
    HrcsConfig c;
    c.n_system = na;
    c.n_bath = nb;
    c.steps = t;
    c.reset_bath = spec_.reset_bath;
    c.source = spec_.source;
    c.gamma_system = gamma;
    c.gamma_bath = gamma;
    c.master_seed = spec_.master_seed;
    return c;
  }

  EngineMode mode() const {
    switch (spec_.kind) {
      case ExperimentKind::kXeb:
      case ExperimentKind::kNoisyXeb:
        return EngineMode::kTrajectory;
      default:
        return EngineMode::kEnumeration;
    }
  }

  void precheck() const {
    for (const int na : spec_.n_system) {
      for (const int nb : spec_.n_bath) {
        for (const int t : spec_.steps) {
          const auto c = config(na, nb, t);
          if (spec_.kind == ExperimentKind::kTheoryTable) {
            if (na < 1 || nb < 1 || t < 1) throw ConfigError("theory_table needs n_A, n_B, t >= 1");
            continue;
          }
          check_capacity(c, mode());
        }
      }
    }
  }

  ResultRecord base(int na, int nb, int t, std::optional<int> k, double gamma, std::string statistic) const {
    ResultRecord r;
    r.spec_hash = hash_;
    r.kind = kind_name(spec_.kind);
    r.n_system = na;
    r.n_bath = nb;
    r.steps = t;
    r.order = k;
    r.gamma = gamma;
    r.statistic = std::move(statistic);
    return r;
  }

  void emit(ResultRecord r, std::optional<EnsembleStats> measured, std::optional<double> theory_value,
            std::string source, double seconds) {
    r.measured = measured;
    r.theory_value = theory_value;
    r.theory_source = std::move(source);
    if (options_.timing) r.wall_time_s = seconds;
    records_.push_back(std::move(r));
  }

  void run_point(int na, int nb, int t) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const auto c = config(na, nb, t);
    const int b = spec_.instances;
    switch (spec_.kind) {
      case ExperimentKind::kCpSweep:
      case ExperimentKind::kPsSweep: {
        const std::vector<int> orders =
            spec_.kind == ExperimentKind::kCpSweep ? std::vector<int>{2} : spec_.orders;
        const auto rows = run_instances<std::vector<double>>(b, workers_, c, [&](std::uint64_t i) {
          const auto dist = enumerate_joint_distribution(c, instantiate_circuit(c, i));
          std::vector<double> v;
          for (const int k : orders) v.push_back(power_sum_exact(dist, k));
          return v;
        });
        const double secs = elapsed();
        for (std::size_t j = 0; j < orders.size(); ++j) {
          const int k = orders[j];
          emit(base(na, nb, t, k, 1.0, k == 2 ? "cp" : "power_sum"), column_stats(rows, j),
               theory::hrcs_power_sum(na, nb, t, k, Mode::kExact), "hrcs_power_sum_exact", secs);
        }
        return;
      }
      case ExperimentKind::kMarginalSweep: {
        const auto rows = run_instances<std::vector<double>>(b, workers_, c, [&](std::uint64_t i) {
          const auto dist = enumerate_joint_distribution(c, instantiate_circuit(c, i));
          return std::vector<double>{power_sum_exact(marginalize(dist, Marginal::spatial()), 2),
                                     power_sum_exact(marginalize(dist, Marginal::temporal()), 2),
                                     power_sum_exact(marginalize(dist, Marginal::per_step(t)), 2)};
        });
        const double secs = elapsed();
        const std::pair<MarginalKind, const char*> kinds[] = {{MarginalKind::kSpatial, "spatial"},
                                                               {MarginalKind::kTemporal, "temporal"},
                                                               {MarginalKind::kPerStep, "per_step"}};
        for (std::size_t j = 0; j < 3; ++j) {
          emit(base(na, nb, t, 2, 1.0, std::string("cp_") + kinds[j].second), column_stats(rows, j),
               theory::marginal_cp(kinds[j].first, na, nb, t), std::string("marginal_cp_") + kinds[j].second,
               secs);
        }
        return;
      }
      case ExperimentKind::kPopHist: {
        const auto dists = run_instances<std::vector<double>>(b, workers_, c, [&](std::uint64_t i) {
          const auto dist = enumerate_joint_distribution(c, instantiate_circuit(c, i));
          return std::vector<double>(dist.probabilities.data(),
                                     dist.probabilities.data() + dist.probabilities.size());
        });
        const double dim = std::ldexp(1.0, c.n_eff());
        std::vector<double> pooled;
        Accumulator per_instance;
        for (const auto& d : dists) {
          pooled.insert(pooled.end(), d.begin(), d.end());
          per_instance.add(ks_distance_porter_thomas(d, dim));
        }
        const double ks = ks_distance_porter_thomas(pooled, dim);
        const auto hist = pop_histogram(pooled, c.n_eff(), spec_.bins);
        const double secs = elapsed();
        auto r = base(na, nb, t, std::nullopt, 1.0, "ks_porter_thomas_pooled");
        r.extra["histogram"] = to_json(hist);
        if (pooled.size() <= (std::size_t{1} << 20)) {
          r.extra["ks_reference_q95"] =
              ks_calibration_quantile(pooled.size(), dim, 40, 0.95, reference_seed(c, 0));
        }
        emit(std::move(r), EnsembleStats{pooled.size(), ks, 0.0}, std::nullopt, "", secs);
        emit(base(na, nb, t, std::nullopt, 1.0, "ks_porter_thomas_instance"), per_instance.stats(),
             std::nullopt, "", secs);
        return;
      }
      case ExperimentKind::kTvd: {
        const auto rows = run_instances<double>(b, workers_, c, [&](std::uint64_t i) {
          const auto dist = enumerate_joint_distribution(c, instantiate_circuit(c, i));
          Rng rng(reference_seed(c, i));
          const auto haar = sample_haar_state<double>(c.n_eff(), rng);
          const Eigen::VectorXd p = haar.amplitudes().cwiseAbs2();
          return tvd_exact(dist.probabilities, p);
        });
        const double secs = elapsed();
        auto r = base(na, nb, t, std::nullopt, 1.0, "tvd");
        r.extra["max"] = *std::max_element(rows.begin(), rows.end());
        r.extra["bound_asymptotic"] = theory::tvd_upper_bound(na, nb, t, Mode::kAsymptotic);
        emit(std::move(r), ensemble_aggregate(rows), theory::tvd_upper_bound(na, nb, t, Mode::kExact),
             "tvd_bound_exact", secs);
        return;
      }
      case ExperimentKind::kXeb: {
        const double scale = std::ldexp(1.0, c.n_eff());
        const auto rows = run_instances<double>(b, workers_, c, [&](std::uint64_t i) {
          const auto circuit = instantiate_circuit(c, i);
          Rng rng(shot_seed(c, i, 1.0));
          Accumulator acc;
          for (int s = 0; s < spec_.shots; ++s) {
            acc.add(scale * run_trajectory(c, circuit, std::nullopt, rng).model_probability - 1.0);
          }
          return acc.mean();
        });
        emit(base(na, nb, t, std::nullopt, 1.0, "xeb"), ensemble_aggregate(rows),
             theory::ideal_xeb(na, nb, t, false), "ideal_xeb", elapsed());
        return;
      }
      case ExperimentKind::kNoisyXeb: {
        const double scale = std::ldexp(1.0, c.n_eff());
        for (const double gamma : spec_.gammas) {
          const auto start_g = std::chrono::steady_clock::now();
          const auto cg = config(na, nb, t, gamma);
          const NoiseModel noise = cg.noise();
          const auto rows = run_instances<double>(b, workers_, cg, [&](std::uint64_t i) {
            const auto circuit = instantiate_circuit(cg, i);
            Rng rng(shot_seed(cg, i, gamma));
            Accumulator acc;
            for (int s = 0; s < spec_.shots; ++s) {
              const auto rec = run_trajectory(cg, circuit, noise, rng);
              acc.add(scale * ideal_probability(cg, circuit, rec.bath_outcomes, rec.final_outcome) - 1.0);
            }
            return acc.mean();
          });
          auto r = base(na, nb, t, std::nullopt, gamma, "xeb_noisy");
          if (gamma > 0.0 && gamma < 1.0) {
            r.extra["theory_asymptotic"] = theory::noisy_xeb(na, nb, t, gamma, Mode::kAsymptotic, false);
          }
          emit(std::move(r), ensemble_aggregate(rows),
               theory::noisy_xeb(na, nb, t, gamma, Mode::kExact, false), "noisy_xeb_exact",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start_g).count());
        }
        return;
      }
      case ExperimentKind::kResetCheck: {
        const auto rows = run_instances<std::vector<double>>(b, workers_, c, [&](std::uint64_t i) {
          const auto [with, without] = replay_no_reset_equivalence(c, instantiate_circuit(c, i));
          std::vector<double> v;
          for (const int k : spec_.orders) {
            const double a = power_sum_exact(with, k);
            const double z = power_sum_exact(without, k);
            v.insert(v.end(), {a, z, a - z});
          }
          return v;
        });
        const double secs = elapsed();
        for (std::size_t j = 0; j < spec_.orders.size(); ++j) {
          const int k = spec_.orders[j];
          const double ref = theory::hrcs_power_sum(na, nb, t, k, Mode::kExact);
          emit(base(na, nb, t, k, 1.0, "power_sum_reset"), column_stats(rows, 3 * j), ref,
               "hrcs_power_sum_exact", secs);
          emit(base(na, nb, t, k, 1.0, "power_sum_no_reset"), column_stats(rows, 3 * j + 1), ref,
               "hrcs_power_sum_exact", secs);
          emit(base(na, nb, t, k, 1.0, "power_sum_reset_minus_no_reset"), column_stats(rows, 3 * j + 2), 0.0,
               "reset_invariance", secs);
        }
        return;
      }
      case ExperimentKind::kTheoryTable:
        theory_point(na, nb, t);
        return;
    }
  }

  bool wants(const std::string& family) const {
    return spec_.families.empty() ||
           std::find(spec_.families.begin(), spec_.families.end(), family) != spec_.families.end();
  }

  template <typename Fn>
  void formula(int na, int nb, int t, std::optional<int> k, double gamma, const std::string& tag, Fn&& fn) {
    auto r = base(na, nb, t, k, gamma, tag);
    std::optional<double> value;
    try {
      value = fn();
    } catch (const DomainError& e) {
      r.extra["domain_error"] = e.what();
    }
    emit(std::move(r), std::nullopt, value, value ? tag : std::string(), 0.0);
  }

  void theory_point(int na, int nb, int t) {
    const int n_eff = na + t * nb;
    for (const int k : spec_.orders) {
      if (wants("haar_power_sum")) {
        formula(na, nb, t, k, 1.0, "haar_power_sum", [&] { return theory::haar_power_sum(n_eff, k); });
      }
      if (wants("hrcs_power_sum") && k >= 2) {
        for (const auto mode : {Mode::kExact, Mode::kAsymptotic}) {
          const auto tag = theory::source_tag("hrcs_power_sum", mode);
          formula(na, nb, t, k, 1.0, tag, [&] { return theory::hrcs_power_sum(na, nb, t, k, mode); });
        }
      }
    }
    if (wants("haar_subsystem_cp")) {
      formula(na, nb, t, 2, 1.0, "haar_subsystem_cp", [&] { return theory::haar_subsystem_cp(na, nb); });
    }
    if (wants("marginal_cp")) {
      const std::pair<MarginalKind, const char*> kinds[] = {{MarginalKind::kSpatial, "spatial"},
                                                             {MarginalKind::kTemporal, "temporal"},
                                                             {MarginalKind::kPerStep, "per_step"}};
      for (const auto& [kind, name] : kinds) {
        formula(na, nb, t, 2, 1.0, std::string("marginal_cp_") + name,
                [&] { return theory::marginal_cp(kind, na, nb, t); });
      }
    }
    if (wants("tvd_bound")) {
      for (const auto mode : {Mode::kExact, Mode::kAsymptotic}) {
        formula(na, nb, t, std::nullopt, 1.0, theory::source_tag("tvd_bound", mode),
                [&] { return theory::tvd_upper_bound(na, nb, t, mode); });
      }
    }
    if (wants("ideal_xeb")) {
      formula(na, nb, t, std::nullopt, 1.0, "ideal_xeb", [&] { return theory::ideal_xeb(na, nb, t, false); });
      formula(na, nb, t, std::nullopt, 1.0, "ideal_xeb_patched",
              [&] { return theory::ideal_xeb(na, nb, t, true); });
    }
    if (wants("noisy_xeb")) {
      for (const double g : spec_.gammas) {
        for (const auto mode : {Mode::kExact, Mode::kAsymptotic}) {
          formula(na, nb, t, std::nullopt, g, theory::source_tag("noisy_xeb", mode),
                  [&] { return theory::noisy_xeb(na, nb, t, g, mode, false); });
        }
      }
    }
    if (wants("critical_steps")) {
      using theory::CriticalKind;
      const std::pair<CriticalKind, const char*> kinds[] = {{CriticalKind::kJointCp, "joint_cp"},
                                                             {CriticalKind::kSpatial, "spatial"},
                                                             {CriticalKind::kTemporal, "temporal"},
                                                             {CriticalKind::kPerStep, "per_step"}};
      for (const double eps : spec_.epsilons) {
        for (const auto& [kind, name] : kinds) {
          auto tag = std::string("critical_steps_") + name;
          formula(na, nb, t, std::nullopt, 1.0, tag, [&] { return theory::critical_steps(kind, na, nb, eps); });
          records_.back().extra["epsilon"] = eps;
        }
        for (const int k : spec_.orders) {
          if (k < 2) continue;
          formula(na, nb, t, k, 1.0, "critical_steps_joint_ps",
                  [&] { return theory::critical_steps(CriticalKind::kJointPs, na, nb, eps, k); });
          records_.back().extra["epsilon"] = eps;
        }
      }
    }
  }

  const ExperimentSpec& spec_;
  RunOptions options_;
  std::string hash_;
  int workers_ = 1;
  std::vector<ResultRecord> records_;
};

}  // namespace

std::string kind_name(ExperimentKind kind) {
  for (const auto& [k, name] : kind_table()) {
    if (k == kind) return name;
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const auto& [k, n] : kind_table()) {
    if (n == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (instances < 1) throw ConfigError("instances must be >= 1");
  if (shots < 1) throw ConfigError("shots must be >= 1");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  for (const int n : n_system) {
    if (n < 1) throw ConfigError("n_system entries must be >= 1");
  }
  for (const int n : n_bath) {
    if (n < 1) throw ConfigError("n_bath entries must be >= 1");
  }
  for (const int t : steps) {
    if (t < 1) throw ConfigError("steps entries must be >= 1");
  }
  for (const int k : orders) {
    if (k < 1) throw ConfigError("orders entries must be >= 1");
    if (k < 2 && kind != ExperimentKind::kTheoryTable) throw ConfigError("sampled power sums need K >= 2");
  }
  for (const double g : gammas) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("gammas must lie in [0, 1]");
  }
  for (const double e : epsilons) {
    if (!(e > 0.0)) throw ConfigError("epsilons must be positive");
  }
  for (const auto& f : families) {
    if (!theory_families().count(f)) throw ConfigError("unknown theory family '" + f + "'");
  }
  if (source.kind == UnitarySource::Kind::kHea && source.layers < 1) throw ConfigError("layers must be >= 1");
  if (n_system.empty() || n_bath.empty() || steps.empty() || orders.empty() || gammas.empty()) {
    throw ConfigError("parameter lists must not be empty");
  }
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "schema_version", "kind",      "n_system", "n_bath",    "steps",       "orders",
      "gammas",         "epsilons",  "families", "reset_bath", "source",     "layers",
      "instances",      "shots",     "bins",     "master_seed", "output"};
  if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
  for (const auto& item : j.items()) {
    if (!kKeys.count(item.key())) throw ConfigError("unknown spec key '" + item.key() + "'");
  }
  if (!j.contains("schema_version")) throw ConfigError("spec is missing 'schema_version'");
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + j.at("schema_version").dump());
  }
  if (!j.contains("kind")) throw ConfigError("spec is missing 'kind'");
  ExperimentSpec s;
  try {
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("n_system")) s.n_system = scalar_or_list<int>(j, "n_system");
    if (j.contains("n_bath")) s.n_bath = scalar_or_list<int>(j, "n_bath");
    if (j.contains("steps")) s.steps = scalar_or_list<int>(j, "steps");
    if (j.contains("orders")) s.orders = scalar_or_list<int>(j, "orders");
    if (j.contains("gammas")) s.gammas = scalar_or_list<double>(j, "gammas");
    if (j.contains("epsilons")) s.epsilons = scalar_or_list<double>(j, "epsilons");
    if (j.contains("families")) s.families = scalar_or_list<std::string>(j, "families");
    s.reset_bath = j.value("reset_bath", s.reset_bath);
    const auto source = j.value("source", std::string("haar"));
    if (source == "haar") {
      if (j.contains("layers")) throw ConfigError("'layers' applies only to source 'hea'");
      s.source = UnitarySource::haar();
    } else if (source == "hea") {
      s.source = UnitarySource::hea(j.value("layers", 8));
    } else {
      throw ConfigError("unknown unitary source '" + source + "'");
    }
    s.instances = j.value("instances", s.instances);
    s.shots = j.value("shots", s.shots);
    s.bins = j.value("bins", s.bins);
    s.master_seed = j.value("master_seed", s.master_seed);
    s.output = j.value("output", s.output);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind_name(spec.kind);
  j["n_system"] = spec.n_system;
  j["n_bath"] = spec.n_bath;
  j["steps"] = spec.steps;
  j["orders"] = spec.orders;
  j["gammas"] = spec.gammas;
  j["epsilons"] = spec.epsilons;
  if (!spec.families.empty()) j["families"] = spec.families;
  j["reset_bath"] = spec.reset_bath;
  j["source"] = spec.source.kind == UnitarySource::Kind::kHaar ? "haar" : "hea";
  if (spec.source.kind == UnitarySource::Kind::kHea) j["layers"] = spec.source.layers;
  j["instances"] = spec.instances;
  j["shots"] = spec.shots;
  j["bins"] = spec.bins;
  j["master_seed"] = spec.master_seed;
  return j;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("spec file '" + path + "' is not valid JSON: " + e.what());
  }
  return spec_from_json(j);
}

std::string spec_hash(const ExperimentSpec& spec) { return to_hex(fnv1a(dump_canonical(to_json(spec)))); }

std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  return Runner(spec, options).run();
}

OutputFormat format_from_name(const std::string& name) {
  if (name == "jsonl") return OutputFormat::kJsonl;
  if (name == "csv") return OutputFormat::kCsv;
  throw ConfigError("unknown output format '" + name + "'");
}

nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["spec_hash"] = r.spec_hash;
  j["kind"] = r.kind;
  j["n_system"] = r.n_system;
  j["n_bath"] = r.n_bath;
  j["steps"] = r.steps;
  j["order"] = r.order ? nlohmann::json(*r.order) : nlohmann::json(nullptr);
  j["gamma"] = r.gamma;
  j["statistic"] = r.statistic;
  j["measured"] = r.measured ? to_json(*r.measured) : nlohmann::json(nullptr);
  j["theory_value"] = r.theory_value ? nlohmann::json(*r.theory_value) : nlohmann::json(nullptr);
  j["theory_source"] = r.theory_source.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.theory_source);
  j["extra"] = r.extra;
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
  return j;
}

ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.spec_hash = j.at("spec_hash").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.n_system = j.at("n_system").get<int>();
  r.n_bath = j.at("n_bath").get<int>();
  r.steps = j.at("steps").get<int>();
  if (!j.at("order").is_null()) r.order = j.at("order").get<int>();
  r.gamma = j.at("gamma").get<double>();
  r.statistic = j.at("statistic").get<std::string>();
  if (!j.at("measured").is_null()) {
    const auto& m = j.at("measured");
    r.measured = EnsembleStats{m.at("count").get<std::size_t>(), m.at("mean").get<double>(),
                               m.at("std_error").get<double>()};
  }
  r.theory_value = opt_double(j, "theory_value");
  if (!j.at("theory_source").is_null()) r.theory_source = j.at("theory_source").get<std::string>();
  r.extra = j.value("extra", nlohmann::json::object());
  r.wall_time_s = opt_double(j, "wall_time_s");
  return r;
}

std::string to_csv_row(const ResultRecord& r) {
  std::ostringstream os;
  os << r.n_system << ',' << r.n_bath << ',' << r.steps << ',' << (r.order ? std::to_string(*r.order) : "")
     << ',' << format_double(r.gamma) << ',' << r.statistic << ','
     << csv_double(r.measured ? std::optional<double>(r.measured->mean) : std::nullopt) << ','
     << csv_double(r.measured ? std::optional<double>(r.measured->std_error) : std::nullopt) << ','
     << csv_double(r.theory_value);
  return os.str();
}

void write_records(const std::vector<ResultRecord>& records, const std::string& path, OutputFormat format) {
  std::ofstream file;
  const bool to_stdout = path.empty() || path == "-";
  if (!to_stdout) {
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
  }
  std::ostream& out = to_stdout ? std::cout : file;
  if (format == OutputFormat::kCsv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
  } else {
    for (const auto& r : records) out << dump_canonical(to_json(r)) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing records to '" + path + "'");
}

std::vector<ResultRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<ResultRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace hrcs
