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

// The HRCS protocol on n_A system + n_B bath qubits over t steps:
//
//   for k = 1..t:  apply U_k to A (x) B, depolarize A and B, measure B -> z_k,
//                  optionally reset B to |0...0>
//   finally:       measure A -> x
//
// System qubits are [0, n_A), bath qubits [n_A, n_A + n_B). A joint outcome is
// indexed by the bit string [z_1 | z_2 | ... | z_t | x], z_1 most significant.

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hrcs/circuits.hpp"
#include "hrcs/core.hpp"
#include "hrcs/seeding.hpp"
#include "hrcs/theory.hpp"

namespace hrcs {

inline constexpr int kMaxEnumerationQubits = 22;
inline constexpr int kMaxDensityQubits = 8;
inline constexpr int kMaxNoisyEnumerationQubits = 20;
inline constexpr int kMaxHaarQubits = 12;
/// Upper bound on bytes held by the dense step unitaries of one instance.
inline constexpr std::uint64_t kMaxCircuitBytes = std::uint64_t{1} << 31;

struct UnitarySource {
  enum class Kind { kHaar, kHea };
  Kind kind = Kind::kHaar;
  int layers = 8;  // kHea only

  static UnitarySource haar() { return {}; }
  static UnitarySource hea(int layers) { return {Kind::kHea, layers}; }

  std::string name() const;
  friend bool operator==(const UnitarySource&, const UnitarySource&) = default;
};

/// Independent depolarizing channels on system and bath after every step
/// unitary. gamma = 1 is noiseless, gamma = 0 fully mixes.
struct NoiseModel {
  double gamma_system = 1.0;
  double gamma_bath = 1.0;

  static NoiseModel uniform(double gamma) { return {gamma, gamma}; }
  bool noiseless() const { return gamma_system == 1.0 && gamma_bath == 1.0; }
  void validate() const;
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct HrcsConfig {
  int n_system = 1;
  int n_bath = 1;
  int steps = 1;
  bool reset_bath = true;
  UnitarySource source;
  double gamma_system = 1.0;
  double gamma_bath = 1.0;
  std::uint64_t master_seed = 0;

  int n_total() const { return n_system + n_bath; }
  int n_eff() const { return n_system + steps * n_bath; }
  QubitSubset system() const { return QubitSubset::range(0, n_system); }
  QubitSubset bath() const { return QubitSubset::range(n_system, n_bath); }
  NoiseModel noise() const { return {gamma_system, gamma_bath}; }

  /// Shape and range checks; capacity is checked by each mode.
  void validate() const;
  friend bool operator==(const HrcsConfig&, const HrcsConfig&) = default;
};

/// FNV-1a of a canonical text rendering of every config field.
std::uint64_t config_hash(const HrcsConfig& config);

/// One step unitary: dense matrix (Haar) or gate list (HEA).
class StepOperator {
 public:
  static StepOperator dense(CMatrix<double> u) { return StepOperator(std::move(u)); }
  static StepOperator gates(GateSequence seq) { return StepOperator(std::move(seq)); }

  bool is_dense() const { return std::holds_alternative<CMatrix<double>>(op_); }
  const CMatrix<double>& matrix() const { return std::get<CMatrix<double>>(op_); }
  const GateSequence& gate_sequence() const { return std::get<GateSequence>(op_); }

  /// Full-register application.
  void apply(Statevector<double>& state) const;
  /// Dense matrix, built from the gates when needed.
  CMatrix<double> to_matrix(int n_qubits) const;

 private:
  explicit StepOperator(CMatrix<double> u) : op_(std::move(u)) {}
  explicit StepOperator(GateSequence seq) : op_(std::move(seq)) {}
  std::variant<CMatrix<double>, GateSequence> op_;
};

using StepCircuit = std::vector<StepOperator>;

struct TrajectoryRecord {
  std::vector<BitPattern> bath_outcomes;  // z_1..z_t
  BitPattern final_outcome = 0;           // x
  double model_probability = 0.0;
  std::optional<double> ideal_probability;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

struct JointDistribution {
  Eigen::VectorXd probabilities;
  int n_system = 0;
  int n_bath = 0;
  int steps = 0;

  int n_eff() const { return n_system + steps * n_bath; }
};

/// Which outcome bits to keep. per_step keeps z_step (1-based).
struct Marginal {
  theory::MarginalKind kind = theory::MarginalKind::kSpatial;
  int step = 0;

  static Marginal spatial() { return {theory::MarginalKind::kSpatial, 0}; }
  static Marginal temporal() { return {theory::MarginalKind::kTemporal, 0}; }
  static Marginal per_step(int k) { return {theory::MarginalKind::kPerStep, k}; }
};

/// Joint index of (z_1..z_t, x) under the [z_1 | ... | z_t | x] convention.
std::uint64_t joint_index(const HrcsConfig& config, std::span<const BitPattern> bath_outcomes,
                          BitPattern final_outcome);
/// Inverse of joint_index.
std::pair<std::vector<BitPattern>, BitPattern> split_joint_index(const HrcsConfig& config,
                                                                 std::uint64_t index);

/// Seed of the random stream that draws instance `instance_index`'s unitaries.
std::uint64_t circuit_seed(const HrcsConfig& config, std::uint64_t instance_index);

/// Deterministic in (master_seed, instance_index, n_A, n_B, t, source).
StepCircuit instantiate_circuit(const HrcsConfig& config, std::uint64_t instance_index);

/// Samples one (z, x) path. Without noise the model probability equals the
/// exact joint probability of the path.
TrajectoryRecord run_trajectory(const HrcsConfig& config, const StepCircuit& circuit,
                                const std::optional<NoiseModel>& noise, Rng& rng);

/// Noiseless probability of a given path; exact 0 for a null branch.
double ideal_probability(const HrcsConfig& config, const StepCircuit& circuit,
                         std::span<const BitPattern> bath_outcomes, BitPattern final_outcome);

/// Exact noiseless joint distribution by depth-first branching.
JointDistribution enumerate_joint_distribution(const HrcsConfig& config, const StepCircuit& circuit);

Eigen::VectorXd marginalize(const JointDistribution& dist, const Marginal& marginal);

/// Exact noisy joint distribution by density-matrix branching.
JointDistribution enumerate_noisy_joint_distribution(const HrcsConfig& config,
                                                     const StepCircuit& circuit,
                                                     const NoiseModel& noise);

/// Exact distributions of the same circuit with and without bath reset.
std::pair<JointDistribution, JointDistribution> replay_no_reset_equivalence(
    const HrcsConfig& config, const StepCircuit& circuit);

/// Throws CapacityError if `config` cannot be run in the named mode.
enum class EngineMode { kTrajectory, kEnumeration, kNoisyEnumeration };
void check_capacity(const HrcsConfig& config, EngineMode mode);

std::string to_hex(std::uint64_t bits);
std::uint64_t from_hex(const std::string& text);

nlohmann::json to_json(const HrcsConfig& config);
HrcsConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrajectoryRecord& record, const HrcsConfig& config,
                       std::uint64_t instance_seed);
TrajectoryRecord trajectory_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JointDistribution& dist);
JointDistribution joint_distribution_from_json(const nlohmann::json& j);

}  // namespace hrcs
