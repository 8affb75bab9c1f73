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

#include "hrcs/engine.hpp"

#include <cstdio>
#include <random>
#include <set>
#include <string>

namespace hrcs {
namespace {

/// Draws an index with probability probs(k) / sum(probs); never returns a
/// zero-weight entry.
Eigen::Index sample_index(const Eigen::VectorXd& probs, Rng& rng) {
  const double total = probs.sum();
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (!(probs(k) > kUnderflowFloor)) continue;
    last_positive = k;
    acc += probs(k);
    if (u < acc) return k;
  }
  if (last_positive < 0) throw DegenerateBranchError("no outcome with positive probability");
  return last_positive;
}

void maybe_depolarize(Statevector<double>& state, const QubitSubset& subset, double gamma, Rng& rng) {
  if (gamma >= 1.0) return;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < 1.0 - gamma) {
    const auto labels = random_pauli_string(subset.size(), rng);
    state = apply_pauli_string(std::move(state), std::span<const Pauli>(labels), subset);
  }
}

void check_circuit(const HrcsConfig& config, const StepCircuit& circuit) {
  if (static_cast<int>(circuit.size()) != config.steps) {
    throw ConfigError("circuit has " + std::to_string(circuit.size()) + " steps, config expects " +
                      std::to_string(config.steps));
  }
  const Eigen::Index d = Eigen::Index{1} << config.n_total();
  for (const auto& op : circuit) {
    if (op.is_dense()) {
      if (op.matrix().rows() != d || op.matrix().cols() != d) {
        throw ConfigError("step unitary dimension does not match the register");
      }
    } else {
      op.gate_sequence().validate(config.n_total());
    }
  }
}

}  // namespace

std::string UnitarySource::name() const {
  return kind == Kind::kHaar ? "haar" : "hea(" + std::to_string(layers) + ")";
}

void NoiseModel::validate() const {
  for (const double g : {gamma_system, gamma_bath}) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("depolarizing gamma outside [0, 1]");
  }
}

void HrcsConfig::validate() const {
  if (n_system < 1) throw ConfigError("n_system must be >= 1");
  if (n_bath < 1) throw ConfigError("n_bath must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (n_total() > kMaxQubits) {
    throw CapacityError("n_system + n_bath = " + std::to_string(n_total()) + " exceeds " +
                        std::to_string(kMaxQubits));
  }
  if (source.kind == UnitarySource::Kind::kHea && source.layers < 1) {
    throw ConfigError("HEA source needs layers >= 1");
  }
  noise().validate();
}

void check_capacity(const HrcsConfig& config, EngineMode mode) {
  config.validate();
  if (config.source.kind == UnitarySource::Kind::kHaar) {
    if (config.n_total() > kMaxHaarQubits) {
      throw CapacityError("Haar steps limited to " + std::to_string(kMaxHaarQubits) + " qubits");
    }
    const std::uint64_t bytes = static_cast<std::uint64_t>(config.steps) * 16ULL
                                << (2 * config.n_total());
    if (bytes > kMaxCircuitBytes) throw CapacityError("dense step unitaries exceed the memory budget");
  }
  switch (mode) {
    case EngineMode::kTrajectory:
      return;
    case EngineMode::kEnumeration:
      if (config.n_eff() > kMaxEnumerationQubits) {
        throw CapacityError("enumeration needs N_eff <= " + std::to_string(kMaxEnumerationQubits) +
                            ", got " + std::to_string(config.n_eff()));
      }
      return;
    case EngineMode::kNoisyEnumeration:
      if (config.n_total() > kMaxDensityQubits) {
        throw CapacityError("density-matrix oracle needs n_system + n_bath <= " +
                            std::to_string(kMaxDensityQubits));
      }
      if (config.n_eff() > kMaxNoisyEnumerationQubits) {
        throw CapacityError("noisy enumeration needs N_eff <= " +
                            std::to_string(kMaxNoisyEnumerationQubits));
      }
      return;
  }
}

std::uint64_t config_hash(const HrcsConfig& config) { return fnv1a(to_json(config).dump()); }

void StepOperator::apply(Statevector<double>& state) const {
  if (is_dense()) {
    apply_unitary_rows(state.amplitudes(), matrix(), QubitSubset::range(0, state.n_qubits()),
                       state.n_qubits());
  } else {
    apply_gates_rows(state.amplitudes(), gate_sequence());
  }
}

CMatrix<double> StepOperator::to_matrix(int n_qubits) const {
  return is_dense() ? matrix() : gate_sequence_to_unitary(gate_sequence(), n_qubits);
}

std::uint64_t joint_index(const HrcsConfig& config, std::span<const BitPattern> bath_outcomes,
                          BitPattern final_outcome) {
  if (static_cast<int>(bath_outcomes.size()) != config.steps) {
    throw ConfigError("expected " + std::to_string(config.steps) + " bath outcomes");
  }
  std::uint64_t idx = 0;
  for (const auto z : bath_outcomes) {
    if (z >> config.n_bath) throw ConfigError("bath outcome wider than the bath");
    idx = (idx << config.n_bath) | z;
  }
  if (final_outcome >> config.n_system) throw ConfigError("final outcome wider than the system");
  return (idx << config.n_system) | final_outcome;
}

std::pair<std::vector<BitPattern>, BitPattern> split_joint_index(const HrcsConfig& config,
                                                                 std::uint64_t index) {
  const std::uint64_t a_mask = (std::uint64_t{1} << config.n_system) - 1;
  const std::uint64_t b_mask = (std::uint64_t{1} << config.n_bath) - 1;
  const BitPattern x = index & a_mask;
  index >>= config.n_system;
  std::vector<BitPattern> z(static_cast<std::size_t>(config.steps));
  for (int k = config.steps - 1; k >= 0; --k) {
    z[static_cast<std::size_t>(k)] = index & b_mask;
    index >>= config.n_bath;
  }
  return {std::move(z), x};
}

std::uint64_t circuit_seed(const HrcsConfig& config, std::uint64_t instance_index) {
  return mix_seed({config.master_seed, kCircuitSalt, instance_index,
                   static_cast<std::uint64_t>(config.n_system), static_cast<std::uint64_t>(config.n_bath),
                   static_cast<std::uint64_t>(config.steps), static_cast<std::uint64_t>(config.source.kind),
                   static_cast<std::uint64_t>(config.source.layers)});
}

StepCircuit instantiate_circuit(const HrcsConfig& config, std::uint64_t instance_index) {
  check_capacity(config, EngineMode::kTrajectory);
  Rng rng(circuit_seed(config, instance_index));
  StepCircuit circuit;
  circuit.reserve(static_cast<std::size_t>(config.steps));
  const int n = config.n_total();
  for (int k = 0; k < config.steps; ++k) {
    if (config.source.kind == UnitarySource::Kind::kHaar) {
      circuit.push_back(StepOperator::dense(sample_haar_unitary<double>(Eigen::Index{1} << n, rng)));
    } else {
      circuit.push_back(StepOperator::gates(build_hea(n, sample_hea_params(n, config.source.layers, rng))));
    }
  }
  return circuit;
}

TrajectoryRecord run_trajectory(const HrcsConfig& config, const StepCircuit& circuit,
                                const std::optional<NoiseModel>& noise, Rng& rng) {
  check_capacity(config, EngineMode::kTrajectory);
  check_circuit(config, circuit);
  if (noise) noise->validate();
  const auto sys = config.system();
  const auto bath = config.bath();
  Statevector<double> state(config.n_total());
  TrajectoryRecord rec;
  rec.bath_outcomes.reserve(static_cast<std::size_t>(config.steps));
  double prob = 1.0;
  for (const auto& op : circuit) {
    op.apply(state);
    if (noise) {
      maybe_depolarize(state, sys, noise->gamma_system, rng);
      maybe_depolarize(state, bath, noise->gamma_bath, rng);
    }
    const Eigen::VectorXd probs = measure_probabilities(state, bath);
    const auto z = static_cast<BitPattern>(sample_index(probs, rng));
    auto collapsed = collapse(std::move(state), bath, z);
    prob *= collapsed.probability;
    state = config.reset_bath ? reset_to_zero(std::move(collapsed.state), bath, z)
                              : std::move(collapsed.state);
    rec.bath_outcomes.push_back(z);
  }
  const Eigen::VectorXd probs = measure_probabilities(state, sys);
  const auto x = sample_index(probs, rng);
  rec.final_outcome = static_cast<BitPattern>(x);
  rec.model_probability = prob * probs(x);
  if (!noise || noise->noiseless()) rec.ideal_probability = rec.model_probability;
  return rec;
}

double ideal_probability(const HrcsConfig& config, const StepCircuit& circuit,
                         std::span<const BitPattern> bath_outcomes, BitPattern final_outcome) {
  check_capacity(config, EngineMode::kTrajectory);
  check_circuit(config, circuit);
  if (static_cast<int>(bath_outcomes.size()) != config.steps) {
    throw ConfigError("expected " + std::to_string(config.steps) + " bath outcomes");
  }
  if (final_outcome >> config.n_system) throw ConfigError("final outcome wider than the system");
  const auto sys = config.system();
  const auto bath = config.bath();
  Statevector<double> state(config.n_total());
  double prob = 1.0;
  for (int k = 0; k < config.steps; ++k) {
    circuit[static_cast<std::size_t>(k)].apply(state);
    const auto z = bath_outcomes[static_cast<std::size_t>(k)];
    if (z >> config.n_bath) throw ConfigError("bath outcome wider than the bath");
    const Eigen::VectorXd probs = measure_probabilities(state, bath);
    if (!(probs(static_cast<Eigen::Index>(z)) > kUnderflowFloor)) return 0.0;
    auto collapsed = collapse(std::move(state), bath, z);
    prob *= collapsed.probability;
    state = config.reset_bath ? reset_to_zero(std::move(collapsed.state), bath, z)
                              : std::move(collapsed.state);
  }
  return prob * measure_probabilities(state, sys)(static_cast<Eigen::Index>(final_outcome));
}

namespace {

struct PureEnumerator {
  const HrcsConfig& config;
  const StepCircuit& circuit;
  QubitSubset sys;
  QubitSubset bath;
  Eigen::VectorXd& out;

  void descend(Statevector<double> state, int step, std::uint64_t prefix, double prob) {
    circuit[static_cast<std::size_t>(step)].apply(state);
    const Eigen::VectorXd probs = measure_probabilities(state, bath);
    for (Eigen::Index z = 0; z < probs.size(); ++z) {
      if (!(probs(z) > kUnderflowFloor)) continue;
      auto branch = collapse(state, bath, static_cast<BitPattern>(z));
      Statevector<double> next = config.reset_bath
                                     ? reset_to_zero(std::move(branch.state), bath, static_cast<BitPattern>(z))
                                     : std::move(branch.state);
      const std::uint64_t idx = (prefix << config.n_bath) | static_cast<std::uint64_t>(z);
      const double p = prob * branch.probability;
      if (step + 1 < config.steps) {
        descend(std::move(next), step + 1, idx, p);
      } else {
        const Eigen::VectorXd px = measure_probabilities(next, sys);
        const auto base = static_cast<Eigen::Index>(idx << config.n_system);
        out.segment(base, px.size()) = p * px;
      }
    }
  }
};

struct DensityEnumerator {
  const HrcsConfig& config;
  const std::vector<CMatrix<double>>& unitaries;
  NoiseModel noise;
  QubitSubset sys;
  QubitSubset bath;
  Eigen::VectorXd& out;

  void descend(const CMatrix<double>& rho, int step, std::uint64_t prefix, double prob) {
    const auto& u = unitaries[static_cast<std::size_t>(step)];
    CMatrix<double> evolved = u * rho * u.adjoint();
    evolved = depolarize(evolved, sys, config.n_total(), noise.gamma_system);
    evolved = depolarize(evolved, bath, config.n_total(), noise.gamma_bath);
    const Eigen::VectorXd probs = measure_probabilities(evolved, bath);
    for (Eigen::Index z = 0; z < probs.size(); ++z) {
      if (!(probs(z) > kUnderflowFloor)) continue;
      auto [branch, p_z] = collapse(evolved, bath, static_cast<BitPattern>(z));
      if (config.reset_bath) branch = reset_to_zero(branch, bath, static_cast<BitPattern>(z));
      const std::uint64_t idx = (prefix << config.n_bath) | static_cast<std::uint64_t>(z);
      const double p = prob * p_z;
      if (step + 1 < config.steps) {
        descend(branch, step + 1, idx, p);
      } else {
        const Eigen::VectorXd px = measure_probabilities(branch, sys);
        const auto base = static_cast<Eigen::Index>(idx << config.n_system);
        out.segment(base, px.size()) = p * px;
      }
    }
  }
};

}  // namespace

JointDistribution enumerate_joint_distribution(const HrcsConfig& config, const StepCircuit& circuit) {
  check_capacity(config, EngineMode::kEnumeration);
  check_circuit(config, circuit);
  JointDistribution dist{Eigen::VectorXd::Zero(Eigen::Index{1} << config.n_eff()), config.n_system,
                         config.n_bath, config.steps};
  PureEnumerator walker{config, circuit, config.system(), config.bath(), dist.probabilities};
  walker.descend(Statevector<double>(config.n_total()), 0, 0, 1.0);
  return dist;
}

Eigen::VectorXd marginalize(const JointDistribution& dist, const Marginal& marginal) {
  const int na = dist.n_system;
  const int nb = dist.n_bath;
  int shift = 0;
  int width = 0;
  switch (marginal.kind) {
    case theory::MarginalKind::kSpatial:
      width = na;
      break;
    case theory::MarginalKind::kTemporal:
      shift = na;
      width = dist.steps * nb;
      break;
    case theory::MarginalKind::kPerStep:
      if (marginal.step < 1 || marginal.step > dist.steps) {
        throw ConfigError("per-step marginal needs 1 <= k <= t");
      }
      shift = na + (dist.steps - marginal.step) * nb;
      width = nb;
      break;
  }
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index{1} << width);
  for (Eigen::Index i = 0; i < dist.probabilities.size(); ++i) {
    out(static_cast<Eigen::Index>((static_cast<std::uint64_t>(i) >> shift) & mask)) += dist.probabilities(i);
  }
  return out;
}

JointDistribution enumerate_noisy_joint_distribution(const HrcsConfig& config,
                                                     const StepCircuit& circuit,
                                                     const NoiseModel& noise) {
  check_capacity(config, EngineMode::kNoisyEnumeration);
  check_circuit(config, circuit);
  noise.validate();
  std::vector<CMatrix<double>> unitaries;
  unitaries.reserve(circuit.size());
  for (const auto& op : circuit) unitaries.push_back(op.to_matrix(config.n_total()));
  JointDistribution dist{Eigen::VectorXd::Zero(Eigen::Index{1} << config.n_eff()), config.n_system,
                         config.n_bath, config.steps};
  DensityEnumerator walker{config, unitaries, noise, config.system(), config.bath(), dist.probabilities};
  const Eigen::Index d = Eigen::Index{1} << config.n_total();
  CMatrix<double> rho = CMatrix<double>::Zero(d, d);
  rho(0, 0) = 1.0;
  walker.descend(rho, 0, 0, 1.0);
  return dist;
}

std::pair<JointDistribution, JointDistribution> replay_no_reset_equivalence(
    const HrcsConfig& config, const StepCircuit& circuit) {
  HrcsConfig with = config;
  with.reset_bath = true;
  HrcsConfig without = config;
  without.reset_bath = false;
  return {enumerate_joint_distribution(with, circuit), enumerate_joint_distribution(without, circuit)};
}

std::string to_hex(std::uint64_t bits) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(bits));
  return buf;
}

std::uint64_t from_hex(const std::string& text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw ConfigError("expected a 0x-prefixed hex string, got '" + text + "'");
  }
  std::size_t used = 0;
  const auto value = std::stoull(text.substr(2), &used, 16);
  if (used != text.size() - 2) throw ConfigError("malformed hex string '" + text + "'");
  return value;
}

nlohmann::json to_json(const HrcsConfig& config) {
  nlohmann::json j;
  j["n_system"] = config.n_system;
  j["n_bath"] = config.n_bath;
  j["steps"] = config.steps;
  j["reset_bath"] = config.reset_bath;
  j["source"] = config.source.kind == UnitarySource::Kind::kHaar ? "haar" : "hea";
  if (config.source.kind == UnitarySource::Kind::kHea) j["layers"] = config.source.layers;
  j["gamma_system"] = config.gamma_system;
  j["gamma_bath"] = config.gamma_bath;
  j["master_seed"] = config.master_seed;
  return j;
}

HrcsConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"n_system", "n_bath",       "steps",      "reset_bath", "source",
                                              "layers",   "gamma_system", "gamma_bath", "master_seed"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!kKeys.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }
  HrcsConfig c;
  c.n_system = j.value("n_system", c.n_system);
  c.n_bath = j.value("n_bath", c.n_bath);
  c.steps = j.value("steps", c.steps);
  c.reset_bath = j.value("reset_bath", c.reset_bath);
  const auto source = j.value("source", std::string("haar"));
  if (source == "haar") {
    c.source = UnitarySource::haar();
  } else if (source == "hea") {
    c.source = UnitarySource::hea(j.value("layers", 8));
  } else {
    throw ConfigError("unknown unitary source '" + source + "'");
  }
  c.gamma_system = j.value("gamma_system", c.gamma_system);
  c.gamma_bath = j.value("gamma_bath", c.gamma_bath);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const TrajectoryRecord& record, const HrcsConfig& config,
                       std::uint64_t instance_seed) {
  nlohmann::json j;
  j["config_hash"] = to_hex(config_hash(config));
  j["seed"] = to_hex(instance_seed);
  auto& z = j["bath_outcomes"] = nlohmann::json::array();
  for (const auto b : record.bath_outcomes) z.push_back(to_hex(b));
  j["final_outcome"] = to_hex(record.final_outcome);
  j["model_probability"] = record.model_probability;
  j["ideal_probability"] = record.ideal_probability ? nlohmann::json(*record.ideal_probability)
                                                    : nlohmann::json(nullptr);
  return j;
}

TrajectoryRecord trajectory_from_json(const nlohmann::json& j) {
  TrajectoryRecord r;
  for (const auto& z : j.at("bath_outcomes")) r.bath_outcomes.push_back(from_hex(z.get<std::string>()));
  r.final_outcome = from_hex(j.at("final_outcome").get<std::string>());
  r.model_probability = j.at("model_probability").get<double>();
  if (j.contains("ideal_probability") && !j.at("ideal_probability").is_null()) {
    r.ideal_probability = j.at("ideal_probability").get<double>();
  }
  return r;
}

nlohmann::json to_json(const JointDistribution& dist) {
  nlohmann::json j;
  j["n_system"] = dist.n_system;
  j["n_bath"] = dist.n_bath;
  j["steps"] = dist.steps;
  j["index_convention"] = "z_1|...|z_t|x, z_1 most significant";
  j["probabilities"] = std::vector<double>(dist.probabilities.data(),
                                           dist.probabilities.data() + dist.probabilities.size());
  return j;
}

JointDistribution joint_distribution_from_json(const nlohmann::json& j) {
  JointDistribution d;
  d.n_system = j.at("n_system").get<int>();
  d.n_bath = j.at("n_bath").get<int>();
  d.steps = j.at("steps").get<int>();
  const auto p = j.at("probabilities").get<std::vector<double>>();
  if (p.size() != (std::size_t{1} << d.n_eff())) throw ConfigError("probability vector length mismatch");
  d.probabilities = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  return d;
}

}  // namespace hrcs
