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

// One-dimensional hardware-efficient ansatz (HEA) and a minimal gate list.
//
// Layer l acts as RZ(phi_{l,i}) RX(theta_{l,i}) on every qubit i, followed by
// the CNOT brickwork CX(0,1) CX(2,3) ... then CX(1,2) CX(3,4) ...
// RX(a) = exp(-i a X / 2), RZ(a) = exp(-i a Z / 2).

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hrcs/core.hpp"

namespace hrcs {

enum class GateKind : std::uint8_t { kRx, kRz, kCx };

struct Gate {
  GateKind kind;
  /// {qubit, -1} for rotations, {control, target} for CX.
  std::array<int, 2> qubits;
  double angle = 0.0;

  static Gate rx(int q, double a) { return {GateKind::kRx, {q, -1}, a}; }
  static Gate rz(int q, double a) { return {GateKind::kRz, {q, -1}, a}; }
  static Gate cx(int control, int target) { return {GateKind::kCx, {control, target}, 0.0}; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Gates in application order (front applied first).
struct GateSequence {
  std::vector<Gate> gates;

  /// Throws ConfigError if any gate addresses a qubit outside [0, n_qubits).
  void validate(int n_qubits) const;

  friend bool operator==(const GateSequence&, const GateSequence&) = default;
};

struct HeaParams {
  int layers = 0;
  Eigen::MatrixXd thetas;  // layers x n
  Eigen::MatrixXd phis;    // layers x n

  int n_qubits() const { return static_cast<int>(thetas.cols()); }
  int parameter_count() const { return static_cast<int>(thetas.size() + phis.size()); }
};

struct GateCount {
  int rx = 0;
  int rz = 0;
  int cx = 0;
  int total() const { return rx + rz + cx; }
};

inline constexpr double kHeaAngleRange = 4.0 * 3.14159265358979323846;

template <typename Rng>
HeaParams sample_hea_params(int n_qubits, int layers, Rng& rng) {
  if (n_qubits < 2) throw ConfigError("HEA needs at least 2 qubits");
  if (layers < 1) throw ConfigError("HEA needs at least 1 layer");
  std::uniform_real_distribution<double> angle(0.0, kHeaAngleRange);
  HeaParams p{layers, Eigen::MatrixXd(layers, n_qubits), Eigen::MatrixXd(layers, n_qubits)};
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) p.thetas(l, q) = angle(rng);
    for (int q = 0; q < n_qubits; ++q) p.phis(l, q) = angle(rng);
  }
  return p;
}

GateSequence build_hea(int n_qubits, const HeaParams& params);

GateCount count_gates(const GateSequence& seq);

/// Gate count of build_hea(n, L): L * (2n + floor(n/2) + floor((n-1)/2)).
GateCount hea_gate_count(int n_qubits, int layers);

/// Dense product of `seq` on n_qubits <= 12.
CMatrix<double> gate_sequence_to_unitary(const GateSequence& seq, int n_qubits);

// ---------------------------------------------------------------------------
// Gate kernels, applied to every column of a row-indexed amplitude block.

template <typename Derived>
void apply_gate_rows(Eigen::MatrixBase<Derived>& states, const Gate& g) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Derived::RealScalar;
  const Eigen::Index rows = states.rows();
  switch (g.kind) {
    case GateKind::kRx: {
      const auto bit = std::uint64_t{1} << g.qubits[0];
      const Real c = std::cos(Real(g.angle) / 2);
      const Scalar ms(0, -std::sin(Real(g.angle) / 2));
      for (Eigen::Index col = 0; col < states.cols(); ++col) {
        for (Eigen::Index r = 0; r < rows; ++r) {
          if (static_cast<std::uint64_t>(r) & bit) continue;
          const auto r1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(r) | bit);
          const Scalar a0 = states(r, col);
          const Scalar a1 = states(r1, col);
          states(r, col) = c * a0 + ms * a1;
          states(r1, col) = ms * a0 + c * a1;
        }
      }
      break;
    }
    case GateKind::kRz: {
      const auto bit = std::uint64_t{1} << g.qubits[0];
      const Scalar p0 = std::polar(Real(1), -Real(g.angle) / 2);
      const Scalar p1 = std::conj(p0);
      for (Eigen::Index col = 0; col < states.cols(); ++col) {
        for (Eigen::Index r = 0; r < rows; ++r) {
          states(r, col) *= (static_cast<std::uint64_t>(r) & bit) ? p1 : p0;
        }
      }
      break;
    }
    case GateKind::kCx: {
      const auto cbit = std::uint64_t{1} << g.qubits[0];
      const auto tbit = std::uint64_t{1} << g.qubits[1];
      for (Eigen::Index col = 0; col < states.cols(); ++col) {
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto ur = static_cast<std::uint64_t>(r);
          if ((ur & cbit) && !(ur & tbit)) {
            std::swap(states(r, col), states(static_cast<Eigen::Index>(ur | tbit), col));
          }
        }
      }
      break;
    }
  }
}

template <typename Derived>
void apply_gates_rows(Eigen::MatrixBase<Derived>& states, const GateSequence& seq) {
  for (const auto& g : seq.gates) apply_gate_rows(states, g);
}

template <typename Real>
Statevector<Real> apply_gates(Statevector<Real> state, const GateSequence& seq) {
  seq.validate(state.n_qubits());
  apply_gates_rows(state.amplitudes(), seq);
  return state;
}

// JSON: array of {"kind": "rx"|"rz"|"cx", "qubits": [...], "angle": x}.
void to_json(nlohmann::json& j, const Gate& g);
void from_json(const nlohmann::json& j, Gate& g);
void to_json(nlohmann::json& j, const GateSequence& seq);
void from_json(const nlohmann::json& j, GateSequence& seq);

}  // namespace hrcs
