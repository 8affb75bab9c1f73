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

// Command-line driver. Experiment subcommands read a JSON spec and write
// JSONL or CSV records; `theory` sweeps closed forms without simulation;
// `sample` and `enumerate` expose single-instance engine modes.
//
// Exit codes: 0 success, 2 invalid configuration, 3 capacity exceeded,
// 4 instance failure, 1 anything else.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hrcs/engine.hpp"
#include "hrcs/jsonl.hpp"
#include "hrcs/runner.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
  std::string format = "jsonl";
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "JSON config path")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember({"jsonl", "csv"}));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hrcs::ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw hrcs::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void run_kind(const std::string& kind, const CommonFlags& f) {
  auto j = read_json(f.config);
  if (!j.is_object()) throw hrcs::ConfigError("experiment spec must be a JSON object");
  if (!j.contains("kind")) j["kind"] = kind;
  if (j.at("kind") != kind) {
    throw hrcs::ConfigError("config kind " + j.at("kind").dump() + " does not match subcommand " + kind);
  }
  auto spec = hrcs::spec_from_json(j);
  if (f.seed) spec.master_seed = *f.seed;
  const auto records = hrcs::run_experiment(spec, {f.workers, f.timing});
  hrcs::write_records(records, f.out.empty() ? spec.output : f.out, hrcs::format_from_name(f.format));
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw hrcs::ConfigError("cannot open output file '" + path + "'");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holographic random circuit sampling lab"};
  app.require_subcommand(1);

  CommonFlags flags;
  const std::vector<std::string> kinds = {"cp_sweep", "ps_sweep",  "marginal_sweep", "pop_hist",   "tvd",
                                          "xeb",      "noisy_xeb", "theory_table",   "reset_check"};
  std::string chosen;
  for (const auto& kind : kinds) {
    auto* cmd = app.add_subcommand(kind, "run a " + kind + " experiment from --config");
    add_common(cmd, flags, true);
    cmd->add_flag("--timing", flags.timing, "record wall time per parameter point");
    cmd->callback([&chosen, kind] { chosen = kind; });
  }

  // theory: closed forms over a sweep, CSV by default.
  struct {
    std::vector<std::string> families;
    std::vector<int> n_system{1}, n_bath{1}, steps{1}, orders{2};
    std::vector<double> gammas{1.0}, epsilons{1.0};
  } th;
  auto* theory_cmd = app.add_subcommand("theory", "print closed-form values over a parameter sweep");
  theory_cmd->add_option("--family", th.families, "formula families (default all)");
  theory_cmd->add_option("--n-system", th.n_system, "system qubit counts");
  theory_cmd->add_option("--n-bath", th.n_bath, "bath qubit counts");
  theory_cmd->add_option("--steps", th.steps, "step counts");
  theory_cmd->add_option("--order", th.orders, "power-sum orders");
  theory_cmd->add_option("--gamma", th.gammas, "depolarizing strengths");
  theory_cmd->add_option("--epsilon", th.epsilons, "relative margins for critical steps");
  theory_cmd->add_option("--out", flags.out, "output path (default stdout)");
  std::string theory_format = "csv";
  theory_cmd->add_option("--format", theory_format, "output format")->check(CLI::IsMember({"jsonl", "csv"}));
  theory_cmd->callback([&chosen] { chosen = "theory"; });

  // sample / enumerate: one instance of an HrcsConfig.
  std::uint64_t instance = 0;
  int shots = 1;
  bool noisy = false;
  for (const char* name : {"sample", "enumerate"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) == "sample"
                                             ? "sample trajectories of one circuit instance (JSONL)"
                                             : "exact joint distribution of one circuit instance (JSON)");
    add_common(cmd, flags, true);
    cmd->add_option("--instance", instance, "instance index");
    cmd->add_flag("--noisy", noisy, "use the config's depolarizing strengths");
    if (std::string(name) == "sample") {
      cmd->add_option("--shots", shots, "trajectories to draw")->check(CLI::PositiveNumber);
    }
    cmd->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (chosen == "theory") {
      hrcs::ExperimentSpec spec;
      spec.kind = hrcs::ExperimentKind::kTheoryTable;
      spec.families = th.families;
      spec.n_system = th.n_system;
      spec.n_bath = th.n_bath;
      spec.steps = th.steps;
      spec.orders = th.orders;
      spec.gammas = th.gammas;
      spec.epsilons = th.epsilons;
      hrcs::write_records(hrcs::run_experiment(spec), flags.out, hrcs::format_from_name(theory_format));
    } else if (chosen == "sample" || chosen == "enumerate") {
      auto config = hrcs::config_from_json(read_json(flags.config));
      if (flags.seed) config.master_seed = *flags.seed;
      const auto circuit = hrcs::instantiate_circuit(config, instance);
      std::ofstream file;
      std::ostream& out = open_out(flags.out, file);
      if (chosen == "sample") {
        const auto noise = noisy ? std::optional<hrcs::NoiseModel>(config.noise()) : std::nullopt;
        hrcs::Rng rng(hrcs::mix_seed({config.master_seed, hrcs::kShotSalt, instance}));
        for (int s = 0; s < shots; ++s) {
          auto rec = hrcs::run_trajectory(config, circuit, noise, rng);
          if (!rec.ideal_probability) {
            rec.ideal_probability = hrcs::ideal_probability(config, circuit, rec.bath_outcomes, rec.final_outcome);
          }
          out << hrcs::dump_canonical(hrcs::to_json(rec, config, hrcs::circuit_seed(config, instance))) << '\n';
        }
      } else {
        const auto dist = noisy ? hrcs::enumerate_noisy_joint_distribution(config, circuit, config.noise())
                                : hrcs::enumerate_joint_distribution(config, circuit);
        out << hrcs::dump_canonical(hrcs::to_json(dist)) << '\n';
      }
    } else {
      run_kind(chosen, flags);
    }
  } catch (const hrcs::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const hrcs::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const hrcs::InstanceFailure& e) {
    std::cerr << "instance failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
