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

#include "hrcs/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hrcs/errors.hpp"

namespace hrcs::theory {
namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_qubits(int n, const char* what, int min = 1) {
  if (n < min || n > 64) {
    throw ConfigError(std::string(what) + " qubit count out of range: " + std::to_string(n));
  }
}

void check_steps(int t) {
  if (t < 1) throw ConfigError("steps must be >= 1");
}

void check_order(int k, int min) {
  if (k < min) throw ConfigError("power-sum order must be >= " + std::to_string(min));
}

double dim_of(int n) { return std::ldexp(1.0, n); }

/// sum_{j=1}^{K-1} log(1 + j/d) = log(prod_{j<K}(d+j) / d^K).
double log_rising(double d, int order) {
  double acc = 0.0;
  for (int j = 1; j < order; ++j) acc += std::log1p(j / d);
  return acc;
}

}  // namespace

DimensionPair DimensionPair::from_qubits(int n_system, int n_bath) {
  check_qubits(n_system, "system", 0);
  check_qubits(n_bath, "bath", 0);
  return {dim_of(n_system), dim_of(n_bath)};
}

double log_haar_power_sum(int n_qubits, int order) {
  check_qubits(n_qubits, "register", 0);
  check_order(order, 1);
  const double d = dim_of(n_qubits);
  return std::lgamma(order + 1.0) - (order - 1) * n_qubits * kLn2 - log_rising(d, order);
}

double haar_power_sum(int n_qubits, int order) { return std::exp(log_haar_power_sum(n_qubits, order)); }

double haar_subsystem_cp(int n_system, int n_bath) {
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  return (dims.d_system + 1.0) / (dims.d_system * dims.d_bath + 1.0);
}

double log_hrcs_power_sum(int n_system, int n_bath, int steps, int order, Mode mode) {
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  check_steps(steps);
  check_order(order, 2);
  const long n_eff = n_system + static_cast<long>(steps) * n_bath;
  if (n_eff > 1023) throw DomainError("effective qubit count too large for double exponent range");
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double da = dims.d_system;
  const double db = dims.d_bath;
  if (mode == Mode::kExact) {
    return std::lgamma(order + 1.0) - (order - 1) * static_cast<double>(n_eff) * kLn2 +
           (steps - 1) * log_rising(da, order) - steps * log_rising(da * db, order);
  }
  const double d_eff = std::ldexp(1.0, static_cast<int>(n_eff));
  const double log_haar = std::lgamma(order + 1.0) - (order - 1) * static_cast<double>(n_eff) * kLn2 -
                          log_rising(d_eff, order);
  const double tail = steps * (1.0 - 1.0 / db) + std::pow(db, -steps) - 1.0;
  return log_haar + order * (order - 1.0) * tail / (2.0 * da);
}

double hrcs_power_sum(int n_system, int n_bath, int steps, int order, Mode mode) {
  return std::exp(log_hrcs_power_sum(n_system, n_bath, steps, order, mode));
}

double hrcs_cp(int n_system, int n_bath, int steps) {
  return hrcs_power_sum(n_system, n_bath, steps, 2, Mode::kExact);
}

double marginal_cp(MarginalKind kind, int n_system, int n_bath, int steps) {
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  check_steps(steps);
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double da = dims.d_system;
  const double db = dims.d_bath;
  const double da2 = da * da;
  // Shared decay ratio of the swap component under repeated twirls.
  const double r = (da2 - 1.0) * db / (da2 * db * db - 1.0);
  switch (kind) {
    case MarginalKind::kSpatial:
      return (da * db + 1.0) / (da2 * db + 1.0) +
             (da - 1.0) * (da * db - 1.0) / ((da + 1.0) * (da2 * db + 1.0)) * std::pow(r, steps);
    case MarginalKind::kTemporal:
      return std::pow((da + 1.0) / (da * db + 1.0), steps);
    case MarginalKind::kPerStep:
      return (da2 + 1.0) / (da2 * db + 1.0) +
             da * (db - 1.0) * (da * db - 1.0) / (db * (da + 1.0) * (da2 * db + 1.0)) *
                 std::pow(r, steps);
  }
  throw ConfigError("unknown marginal kind");
}

double critical_steps(CriticalKind kind, int n_system, int n_bath, double epsilon, int order) {
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double da = dims.d_system;
  const double db = dims.d_bath;
  const double prefactor = db / (db - 1.0);
  switch (kind) {
    case CriticalKind::kJointCp:
      return prefactor * (0.5 + da * std::log1p(epsilon));
    case CriticalKind::kJointPs:
      check_order(order, 2);
      return prefactor * (0.5 + 2.0 * da * std::log1p(epsilon) / (order * (order - 1.0)));
    case CriticalKind::kTemporal:
      return prefactor * da * std::log1p(epsilon);
    case CriticalKind::kSpatial: {
      const double denom = da * db * epsilon - 1.0;
      if (!(denom > 0.0)) throw DomainError("spatial critical steps need d_A d_B epsilon > 1");
      return std::log(da * db / denom) / std::log(db);
    }
    case CriticalKind::kPerStep: {
      const double num = (db - 1.0) * (da * db - db - 1.0);
      const double denom = da * da * db * epsilon - db + 1.0;
      if (!(num > 0.0) || !(denom > 0.0)) throw DomainError("per-step critical steps undefined here");
      return std::log(num / denom) / std::log(db);
    }
  }
  throw ConfigError("unknown critical-step kind");
}

double porter_thomas_density(double dim, double p) {
  if (!(dim >= 2.0)) throw ConfigError("Porter-Thomas needs dim >= 2");
  if (p < 0.0 || p > 1.0) throw DomainError("probability outside [0, 1]");
  if (dim == 2.0) return 1.0;
  if (p == 1.0) return 0.0;
  return (dim - 1.0) * std::exp((dim - 2.0) * std::log1p(-p));
}

double porter_thomas_cdf(double dim, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1((dim - 1.0) * std::log1p(-p));
}

double beta_marginal_density(double d_system, double d_bath, double p) {
  if (!(d_system >= 1.0) || !(d_bath >= 2.0)) throw ConfigError("Beta marginal needs d_A >= 1, d_B >= 2");
  if (p < 0.0 || p > 1.0) throw DomainError("probability outside [0, 1]");
  const double a = d_system;
  const double b = (d_bath - 1.0) * d_system;
  if (p == 0.0) return a == 1.0 ? b : 0.0;
  if (p == 1.0) return b == 1.0 ? a : 0.0;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp((a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p) - log_beta);
}

double pop_density(PopKind kind, double d_system, double d_bath, double p) {
  return kind == PopKind::kPorterThomas ? porter_thomas_density(d_system, p)
                                        : beta_marginal_density(d_system, d_bath, p);
}

double tvd_upper_bound(int n_system, int n_bath, int steps, Mode mode) {
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  check_steps(steps);
  if (mode == Mode::kExact) {
    const double n_eff = n_system + static_cast<double>(steps) * n_bath;
    return 0.5 * std::exp(0.5 * (n_eff * kLn2 + log_hrcs_power_sum(n_system, n_bath, steps, 2, Mode::kExact)));
  }
  return std::exp((steps - 1.0) / (2.0 * dim_of(n_system))) / std::numbers::sqrt2;
}

double ideal_xeb(int n_system, int n_bath, int steps, bool patched) {
  const double n_eff = n_system + static_cast<double>(steps) * n_bath;
  const double log_one_plus = n_eff * kLn2 + log_hrcs_power_sum(n_system, n_bath, steps, 2, Mode::kExact);
  return std::expm1(patched ? 2.0 * log_one_plus : log_one_plus);
}

NoisyTransferMatrix NoisyTransferMatrix::build(int n_system, int n_bath, double gamma_system,
                                               double gamma_bath) {
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  for (const double g : {gamma_system, gamma_bath}) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("depolarizing gamma outside [0, 1]");
  }
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double da = dims.d_system;
  const double db = dims.d_bath;
  const double norm = db * (da * da * db * db - 1.0);
  const double alpha = (da * da * db - 1.0) / norm;
  const double beta = da * (db - 1.0) / norm;
  const double ga = gamma_system + (1.0 - gamma_system) / da;
  const double gb = gamma_bath + (1.0 - gamma_bath) / db;
  const double leak = (1.0 - gamma_system) / da;
  return {alpha + beta * leak * gb, beta + alpha * leak * gb, beta * gamma_system * gb,
          alpha * gamma_system * gb, ga, gb};
}

double noisy_xeb(int n_system, int n_bath, int steps, double gamma_system, double gamma_bath,
                 bool patched) {
  check_steps(steps);
  const auto m = NoisyTransferMatrix::build(n_system, n_bath, gamma_system, gamma_bath);
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double da = dims.d_system;
  const double db = dims.d_bath;
  const double d = da * db;
  // Vector (e, tau) after the first twirl and bath readout, then per later
  // step: system depolarization, twirl, bath readout. The final system
  // readout contracts with (1, g_A). Each step is rescaled by d_B^2 so the
  // 4^{N_eff} prefactor is absorbed; the log accumulator guards overflow.
  const double norm = db * (da * da * db * db - 1.0);
  const double alpha = (da * da * db - 1.0) / norm;
  const double beta = da * (db - 1.0) / norm;
  const double leak = (1.0 - gamma_system) / da;
  double e = 1.0;
  double tau = m.g_bath;
  double log_scale = 0.0;
  for (int k = 1; k < steps; ++k) {
    const double e_noisy = e + leak * tau;
    const double tau_noisy = gamma_system * tau;
    e = db * db * (alpha * e_noisy + beta * tau_noisy);
    tau = db * db * m.g_bath * (beta * e_noisy + alpha * tau_noisy);
    const double s = std::max(std::abs(e), std::abs(tau));
    e /= s;
    tau /= s;
    log_scale += std::log(s);
  }
  const double log_one_plus = std::log(d / (d + 1.0)) + log_scale + std::log(e + m.g_system * tau);
  return std::expm1(patched ? 2.0 * log_one_plus : log_one_plus);
}

double noisy_xeb(int n_system, int n_bath, int steps, double gamma, Mode mode, bool patched) {
  if (mode == Mode::kExact) return noisy_xeb(n_system, n_bath, steps, gamma, gamma, patched);
  check_qubits(n_system, "system");
  check_qubits(n_bath, "bath");
  check_steps(steps);
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("asymptotic noisy XEB requires gamma in (0, 1)");
  }
  const auto dims = DimensionPair::from_qubits(n_system, n_bath);
  const double f = std::pow(gamma, 2.0 * steps) * (1.0 + (1.0 - gamma) * steps / (gamma * dims.d_bath)) +
                   gamma / ((1.0 - gamma) * dims.d_system);
  return patched ? (1.0 + f) * (1.0 + f) - 1.0 : f;
}

std::string source_tag(const std::string& family, Mode mode) {
  return family + (mode == Mode::kExact ? "_exact" : "_asymptotic");
}

}  // namespace hrcs::theory
