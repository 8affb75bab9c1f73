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

// Dense few-qubit linear algebra: statevectors, subsystem addressing,
// unitary application, Born-rule measurement, collapse, reset, Pauli strings,
// Haar sampling, and the small density-matrix toolkit the noisy oracle needs.
//
// Qubit 0 is the least significant bit of an amplitude index.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrcs/errors.hpp"

namespace hrcs {

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Dense unitary on 2^k amplitudes.
template <typename Real = double>
using UnitaryMatrix = CMatrix<Real>;

/// Measurement outcome on a subset: bit j is the result on the subset's j-th qubit.
using BitPattern = std::uint64_t;

inline constexpr int kMaxQubits = 24;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-9;
inline constexpr double kUnderflowFloor = 1e-300;

/// Sorted, duplicate-free list of qubit positions.
class QubitSubset {
 public:
  QubitSubset() = default;

  explicit QubitSubset(std::vector<int> indices) : indices_(std::move(indices)) {
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      if (indices_[j] < 0 || indices_[j] >= 64) {
        throw ConfigError("qubit index out of range: " + std::to_string(indices_[j]));
      }
      if (j > 0 && indices_[j] <= indices_[j - 1]) {
        throw ConfigError("qubit subset must be strictly increasing");
      }
      mask_ |= std::uint64_t{1} << indices_[j];
    }
  }

  /// Contiguous block [first, first + count).
  static QubitSubset range(int first, int count) {
    std::vector<int> idx(static_cast<std::size_t>(std::max(count, 0)));
    for (int j = 0; j < count; ++j) idx[static_cast<std::size_t>(j)] = first + j;
    return QubitSubset(std::move(idx));
  }

  /// Every qubit of an n-qubit register not in this subset.
  QubitSubset complement(int n_qubits) const {
    std::vector<int> rest;
    for (int q = 0; q < n_qubits; ++q) {
      if (!(mask_ >> q & 1U)) rest.push_back(q);
    }
    return QubitSubset(std::move(rest));
  }

  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  const std::vector<int>& indices() const { return indices_; }
  std::uint64_t mask() const { return mask_; }
  int operator[](int j) const { return indices_[static_cast<std::size_t>(j)]; }

  void check_within(int n_qubits) const {
    if (!indices_.empty() && indices_.back() >= n_qubits) {
      throw ConfigError("qubit " + std::to_string(indices_.back()) +
                        " not addressable in a " + std::to_string(n_qubits) + "-qubit register");
    }
  }

  /// True when the subset is a contiguous block.
  bool contiguous() const {
    return indices_.empty() || indices_.back() - indices_.front() + 1 == size();
  }

  /// Local bit pattern -> global index bits.
  std::uint64_t scatter(BitPattern local) const {
    if (contiguous()) return indices_.empty() ? 0 : local << indices_.front();
    std::uint64_t out = 0;
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      out |= (local >> j & 1U) << indices_[j];
    }
    return out;
  }

  /// Global index -> local bit pattern on this subset.
  BitPattern gather(std::uint64_t index) const {
    if (contiguous()) {
      return indices_.empty() ? 0 : (index >> indices_.front()) & ((std::uint64_t{1} << size()) - 1);
    }
    BitPattern out = 0;
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      out |= (index >> indices_[j] & 1U) << j;
    }
    return out;
  }

  friend bool operator==(const QubitSubset& a, const QubitSubset& b) {
    return a.indices_ == b.indices_;
  }

 private:
  std::vector<int> indices_;
  std::uint64_t mask_ = 0;
};

/// Pure state on n qubits, 2^n amplitudes.
template <typename Real = double>
class Statevector {
 public:
  /// |0...0>
  explicit Statevector(int n_qubits) : n_qubits_(check_size(n_qubits)) {
    amplitudes_ = CVector<Real>::Zero(Eigen::Index{1} << n_qubits);
    amplitudes_(0) = Complex<Real>(1);
  }

  static Statevector basis(int n_qubits, std::uint64_t index) {
    Statevector s(n_qubits);
    if (index >= static_cast<std::uint64_t>(s.dim())) {
      throw ConfigError("basis index out of range");
    }
    s.amplitudes_(0) = Complex<Real>(0);
    s.amplitudes_(static_cast<Eigen::Index>(index)) = Complex<Real>(1);
    return s;
  }

  /// Wraps a unit-norm amplitude vector whose length is a power of two.
  static Statevector from_amplitudes(CVector<Real> amplitudes) {
    const auto len = static_cast<std::uint64_t>(amplitudes.size());
    if (len == 0 || !std::has_single_bit(len)) {
      throw ConfigError("amplitude count must be a power of two");
    }
    Statevector s(std::countr_zero(len), std::move(amplitudes));
    if (std::abs(s.norm_squared() - Real(1)) > Real(kNormTolerance)) {
      throw ConfigError("amplitudes are not unit norm");
    }
    return s;
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const CVector<Real>& amplitudes() const { return amplitudes_; }
  /// Raw access for in-place kernels; callers keep the norm invariant.
  CVector<Real>& amplitudes() { return amplitudes_; }
  const Complex<Real>& operator[](Eigen::Index i) const { return amplitudes_(i); }

  Real norm_squared() const { return amplitudes_.squaredNorm(); }

  void renormalize() { amplitudes_ /= std::sqrt(norm_squared()); }

 private:
  Statevector(int n_qubits, CVector<Real> amplitudes)
      : n_qubits_(check_size(n_qubits)), amplitudes_(std::move(amplitudes)) {}

  static int check_size(int n) {
    if (n < 0 || n > kMaxQubits) {
      throw CapacityError("register of " + std::to_string(n) + " qubits unsupported (max " +
                          std::to_string(kMaxQubits) + ")");
    }
    return n;
  }

  int n_qubits_;
  CVector<Real> amplitudes_;
};

// ---------------------------------------------------------------------------
// Index helpers

namespace detail {

/// Global offsets of every local pattern on `subset`, in local-pattern order.
inline std::vector<std::uint64_t> subset_offsets(const QubitSubset& subset) {
  std::vector<std::uint64_t> out(std::size_t{1} << subset.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = subset.scatter(j);
  return out;
}

inline void check_targets(const QubitSubset& targets, int n_qubits) {
  targets.check_within(n_qubits);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Unitary application

/// Applies `u` to the target subspace of every column of `states` in place.
/// Row index convention: qubit 0 is the least significant bit.
template <typename Derived>
void apply_unitary_rows(Eigen::MatrixBase<Derived>& states,
                        const CMatrix<typename Derived::RealScalar>& u,
                        const QubitSubset& targets, int n_qubits) {
  using Real = typename Derived::RealScalar;
  detail::check_targets(targets, n_qubits);
  const Eigen::Index block = Eigen::Index{1} << targets.size();
  if (u.rows() != block || u.cols() != block) {
    throw ConfigError("unitary dimension " + std::to_string(u.rows()) + " does not match " +
                      std::to_string(targets.size()) + " target qubits");
  }
  if (targets.size() == n_qubits) {
    // Targets are 0..n-1 in order: the subset pattern is the row index itself.
    states.derived() = (u * states.derived()).eval();
    return;
  }
  const auto offsets = detail::subset_offsets(targets);
  const auto rest = targets.complement(n_qubits);
  const Eigen::Index n_rest = Eigen::Index{1} << rest.size();
  CMatrix<Real> gathered(block, n_rest);
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    for (Eigen::Index r = 0; r < n_rest; ++r) {
      const auto base = rest.scatter(static_cast<BitPattern>(r));
      for (Eigen::Index j = 0; j < block; ++j) {
        gathered(j, r) = states(static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(j)]), c);
      }
    }
    gathered = (u * gathered).eval();
    for (Eigen::Index r = 0; r < n_rest; ++r) {
      const auto base = rest.scatter(static_cast<BitPattern>(r));
      for (Eigen::Index j = 0; j < block; ++j) {
        states(static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(j)]), c) = gathered(j, r);
      }
    }
  }
}

template <typename Real>
void apply_unitary_in_place(Statevector<Real>& state, const CMatrix<Real>& u,
                            const QubitSubset& targets) {
  apply_unitary_rows(state.amplitudes(), u, targets, state.n_qubits());
}

template <typename Real>
Statevector<Real> apply_unitary(Statevector<Real> state, const CMatrix<Real>& u,
                                const QubitSubset& targets) {
  apply_unitary_in_place(state, u, targets);
  return state;
}

// ---------------------------------------------------------------------------
// Haar sampling

/// Haar-distributed unitary: Ginibre matrix, QR, then each column of Q is
/// multiplied by r_jj/|r_jj| so the triangular factor has a positive diagonal.
template <typename Real = double, typename Rng>
CMatrix<Real> sample_haar_unitary(Eigen::Index dim, Rng& rng) {
  if (dim < 2) throw ConfigError("Haar unitary needs dim >= 2");
  std::normal_distribution<Real> normal(Real(0), std::sqrt(Real(0.5)));
  CMatrix<Real> g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      const Real re = normal(rng);
      const Real im = normal(rng);
      g(r, c) = Complex<Real>(re, im);
    }
  }
  Eigen::HouseholderQR<CMatrix<Real>> qr(g);
  CMatrix<Real> q = qr.householderQ();
  const auto& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex<Real> r = packed(j, j);
    const Real mag = std::abs(r);
    if (mag > Real(0)) q.col(j) *= r / mag;
  }
  return q;
}

/// Haar-random pure state: a normalized standard complex Gaussian vector. Same
/// law as the first column of a Haar unitary, at O(d) cost.
template <typename Real = double, typename Rng>
Statevector<Real> sample_haar_state(int n_qubits, Rng& rng) {
  std::normal_distribution<Real> normal(Real(0), Real(1));
  CVector<Real> v(Eigen::Index{1} << n_qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Real re = normal(rng);
    const Real im = normal(rng);
    v(i) = Complex<Real>(re, im);
  }
  v.normalize();
  return Statevector<Real>::from_amplitudes(std::move(v));
}

// ---------------------------------------------------------------------------
// Measurement

/// Born probabilities of every pattern on `targets`, marginalized over the rest.
template <typename Real>
RVector<Real> measure_probabilities(const Statevector<Real>& state, const QubitSubset& targets) {
  detail::check_targets(targets, state.n_qubits());
  RVector<Real> probs = RVector<Real>::Zero(Eigen::Index{1} << targets.size());
  const auto& a = state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    probs(static_cast<Eigen::Index>(targets.gather(static_cast<std::uint64_t>(i)))) += std::norm(a(i));
  }
  return probs;
}

template <typename Real>
struct Collapsed {
  Statevector<Real> state;
  Real probability;
};

/// Projects `targets` onto `outcome` and renormalizes. The returned probability
/// is the Born probability of `outcome` before the projection.
template <typename Real>
Collapsed<Real> collapse(Statevector<Real> state, const QubitSubset& targets, BitPattern outcome) {
  detail::check_targets(targets, state.n_qubits());
  if (outcome >> targets.size() != 0) throw ConfigError("outcome has bits outside the subset");
  const auto want = targets.scatter(outcome);
  auto& a = state.amplitudes();
  Real p = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if ((static_cast<std::uint64_t>(i) & targets.mask()) == want) {
      p += std::norm(a(i));
    } else {
      a(i) = Complex<Real>(0);
    }
  }
  if (!(p > Real(kUnderflowFloor))) {
    throw DegenerateBranchError("collapse onto an outcome of probability " + std::to_string(p));
  }
  a /= std::sqrt(p);
  return {std::move(state), p};
}

/// Flips every target bit set in `known_outcome`, mapping |known_outcome> to |0...0>.
template <typename Real>
Statevector<Real> reset_to_zero(Statevector<Real> state, const QubitSubset& targets,
                                BitPattern known_outcome) {
  detail::check_targets(targets, state.n_qubits());
  const auto flip = targets.scatter(known_outcome);
  if (flip == 0) return state;
  auto& a = state.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(static_cast<std::uint64_t>(i) ^ flip);
    if (j > i) std::swap(a(i), a(j));
  }
  return state;
}

// ---------------------------------------------------------------------------
// Pauli strings

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

template <typename Derived>
void apply_pauli_rows(Eigen::MatrixBase<Derived>& states, Pauli p, int qubit) {
  using Scalar = typename Derived::Scalar;
  if (p == Pauli::I) return;
  const auto bit = std::uint64_t{1} << qubit;
  const Scalar i_unit(0, 1);
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    for (Eigen::Index r = 0; r < states.rows(); ++r) {
      const auto ur = static_cast<std::uint64_t>(r);
      if (ur & bit) continue;
      const auto r1 = static_cast<Eigen::Index>(ur | bit);
      Scalar& a0 = states(r, c);
      Scalar& a1 = states(r1, c);
      switch (p) {
        case Pauli::X:
          std::swap(a0, a1);
          break;
        case Pauli::Y: {
          const Scalar t0 = a0;
          a0 = -i_unit * a1;
          a1 = i_unit * t0;
          break;
        }
        case Pauli::Z:
          a1 = -a1;
          break;
        case Pauli::I:
          break;
      }
    }
  }
}

template <typename Real>
Statevector<Real> apply_pauli_string(Statevector<Real> state, std::span<const Pauli> labels,
                                     const QubitSubset& targets) {
  detail::check_targets(targets, state.n_qubits());
  if (static_cast<int>(labels.size()) != targets.size()) {
    throw ConfigError("Pauli string length does not match target count");
  }
  for (int j = 0; j < targets.size(); ++j) {
    apply_pauli_rows(state.amplitudes(), labels[static_cast<std::size_t>(j)], targets[j]);
  }
  return state;
}

/// Uniform draw from the 4^m Pauli strings (identity included).
template <typename Rng>
std::vector<Pauli> random_pauli_string(int length, Rng& rng) {
  std::vector<Pauli> out(static_cast<std::size_t>(length));
  std::uniform_int_distribution<int> pick(0, 3);
  for (auto& p : out) p = static_cast<Pauli>(pick(rng));
  return out;
}

// ---------------------------------------------------------------------------
// Density matrices (noisy oracle support)

template <typename Real>
CMatrix<Real> density_matrix(const Statevector<Real>& state) {
  return state.amplitudes() * state.amplitudes().adjoint();
}

/// rho -> gamma * rho + (1 - gamma) * (I/d_S) (x) tr_S(rho) on subset S.
template <typename Real>
CMatrix<Real> depolarize(const CMatrix<Real>& rho, const QubitSubset& subset, int n_qubits,
                         Real gamma) {
  detail::check_targets(subset, n_qubits);
  if (gamma < Real(0) || gamma > Real(1)) throw ConfigError("depolarizing gamma outside [0, 1]");
  CMatrix<Real> out = gamma * rho;
  if (gamma == Real(1)) return out;
  const auto offsets = detail::subset_offsets(subset);
  const auto rest = subset.complement(n_qubits);
  const Eigen::Index n_rest = Eigen::Index{1} << rest.size();
  const Real weight = (Real(1) - gamma) / static_cast<Real>(offsets.size());
  std::vector<std::uint64_t> rest_base(static_cast<std::size_t>(n_rest));
  for (Eigen::Index r = 0; r < n_rest; ++r) rest_base[static_cast<std::size_t>(r)] = rest.scatter(static_cast<BitPattern>(r));
  CMatrix<Real> reduced = CMatrix<Real>::Zero(n_rest, n_rest);
  for (Eigen::Index r = 0; r < n_rest; ++r) {
    for (Eigen::Index c = 0; c < n_rest; ++c) {
      Complex<Real> acc(0);
      for (const auto s : offsets) {
        acc += rho(static_cast<Eigen::Index>(rest_base[static_cast<std::size_t>(r)] | s),
                   static_cast<Eigen::Index>(rest_base[static_cast<std::size_t>(c)] | s));
      }
      reduced(r, c) = acc;
    }
  }
  for (Eigen::Index r = 0; r < n_rest; ++r) {
    for (Eigen::Index c = 0; c < n_rest; ++c) {
      const Complex<Real> add = weight * reduced(r, c);
      for (const auto s : offsets) {
        out(static_cast<Eigen::Index>(rest_base[static_cast<std::size_t>(r)] | s),
            static_cast<Eigen::Index>(rest_base[static_cast<std::size_t>(c)] | s)) += add;
      }
    }
  }
  return out;
}

/// Diagonal of rho marginalized onto `targets`.
template <typename Real>
RVector<Real> measure_probabilities(const CMatrix<Real>& rho, const QubitSubset& targets) {
  RVector<Real> probs = RVector<Real>::Zero(Eigen::Index{1} << targets.size());
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    probs(static_cast<Eigen::Index>(targets.gather(static_cast<std::uint64_t>(i)))) += rho(i, i).real();
  }
  return probs;
}

/// Projects rho onto `outcome` of `targets`; returns the normalized branch and its probability.
template <typename Real>
std::pair<CMatrix<Real>, Real> collapse(const CMatrix<Real>& rho, const QubitSubset& targets,
                                        BitPattern outcome) {
  const auto want = targets.scatter(outcome);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    if ((static_cast<std::uint64_t>(i) & targets.mask()) == want) keep.push_back(i);
  }
  CMatrix<Real> out = CMatrix<Real>::Zero(rho.rows(), rho.cols());
  Real p = 0;
  for (const auto r : keep) {
    p += rho(r, r).real();
    for (const auto c : keep) out(r, c) = rho(r, c);
  }
  if (!(p > Real(kUnderflowFloor))) {
    throw DegenerateBranchError("density collapse onto a null branch");
  }
  out /= p;
  return {std::move(out), p};
}

/// Permutes basis states by XOR with the scattered `known_outcome` (bit-flip reset).
template <typename Real>
CMatrix<Real> reset_to_zero(const CMatrix<Real>& rho, const QubitSubset& targets,
                            BitPattern known_outcome) {
  const auto flip = targets.scatter(known_outcome);
  if (flip == 0) return rho;
  CMatrix<Real> out(rho.rows(), rho.cols());
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      out(static_cast<Eigen::Index>(static_cast<std::uint64_t>(r) ^ flip),
          static_cast<Eigen::Index>(static_cast<std::uint64_t>(c) ^ flip)) = rho(r, c);
    }
  }
  return out;
}

/// (1/2) * sum |eigenvalues(a - b)| for Hermitian a, b.
template <typename Real>
Real trace_distance(const CMatrix<Real>& a, const CMatrix<Real>& b) {
  const CMatrix<Real> diff = a - b;
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(diff, Eigen::EigenvaluesOnly);
  return Real(0.5) * es.eigenvalues().cwiseAbs().sum();
}

/// max |U^dagger U - I|, entrywise.
template <typename Real>
Real unitarity_defect(const CMatrix<Real>& u) {
  return (u.adjoint() * u - CMatrix<Real>::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace hrcs
