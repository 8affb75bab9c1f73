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

// Closed-form ensemble averages for holographic random circuit sampling.
//
// Notation: d_A = 2^{n_A} (system), d_B = 2^{n_B} (bath), t = steps,
// N_eff = n_A + t * n_B. Products of factorial ratios are evaluated as sums of
// log1p terms so dimensions up to 2^64 stay finite.

#pragma once

#include <string>

namespace hrcs::theory {

struct DimensionPair {
  double d_system;
  double d_bath;

  static DimensionPair from_qubits(int n_system, int n_bath);
};

enum class Mode { kExact, kAsymptotic };

enum class MarginalKind { kSpatial, kTemporal, kPerStep };

enum class CriticalKind { kJointCp, kJointPs, kSpatial, kTemporal, kPerStep };

enum class PopKind { kPorterThomas, kBetaMarginal };

/// log of K! d! / (d+K-1)!, d = 2^n.
double log_haar_power_sum(int n_qubits, int order);
/// K-th power sum of a Haar-random state on n qubits.
double haar_power_sum(int n_qubits, int order);

/// Collision probability of the n_bath-qubit marginal of a Haar state on
/// n_system + n_bath qubits, the n_system qubits traced out: (d_A + 1) / (d_A d_B + 1).
double haar_subsystem_cp(int n_system, int n_bath);

double log_hrcs_power_sum(int n_system, int n_bath, int steps, int order, Mode mode);
/// Ensemble-averaged K-th power sum of the joint (z_1..z_t, x) distribution.
double hrcs_power_sum(int n_system, int n_bath, int steps, int order, Mode mode);
/// hrcs_power_sum at K = 2, exact.
double hrcs_cp(int n_system, int n_bath, int steps);

/// Ensemble-averaged collision probability of a marginal:
/// spatial = final system bits x, temporal = all bath bits z_1..z_t,
/// per_step = the bath bits z_t of the last step.
double marginal_cp(MarginalKind kind, int n_system, int n_bath, int steps);

/// Step count at which the relevant collision probability (or K-th power sum)
/// exceeds its Haar reference by the relative margin epsilon. `order` is used
/// only by kJointPs.
double critical_steps(CriticalKind kind, int n_system, int n_bath, double epsilon, int order = 2);

/// Porter-Thomas density (d-1)(1-p)^{d-2} and its CDF 1-(1-p)^{d-1}.
double porter_thomas_density(double dim, double p);
double porter_thomas_cdf(double dim, double p);
/// Beta(d_A, (d_B - 1) d_A) density of one marginal outcome probability.
double beta_marginal_density(double d_system, double d_bath, double p);
double pop_density(PopKind kind, double d_system, double d_bath, double p);

/// Upper bound on the ensemble TVD between HRCS and Haar sampling on N_eff qubits.
/// exact: 0.5 sqrt(2^{N_eff} Z_HRCS); asymptotic: exp((t-1)/(2 d_A)) / sqrt(2).
double tvd_upper_bound(int n_system, int n_bath, int steps, Mode mode);

/// 2^{N_eff} Z_HRCS(t) - 1, or (1 + F)^2 - 1 for two identical side-by-side patches.
double ideal_xeb(int n_system, int n_bath, int steps, bool patched);

/// 2x2 recursion on (identity, swap) coefficients for one step of the noisy
/// twirl: Haar twirl, bath contraction, then system depolarization. Columns are
/// the images of identity and swap. At gamma = 1 it is the noiseless matrix.
struct NoisyTransferMatrix {
  double m00, m01, m10, m11;
  double g_system;  // gamma_A + (1 - gamma_A)/d_A
  double g_bath;    // gamma_B + (1 - gamma_B)/d_B

  static NoisyTransferMatrix build(int n_system, int n_bath, double gamma_system, double gamma_bath);
};

/// XEB of a depolarized sampler scored against the ideal circuit.
/// exact: transfer-matrix recursion; asymptotic: large d_A, d_B limit, defined
/// for gamma in (0, 1).
double noisy_xeb(int n_system, int n_bath, int steps, double gamma, Mode mode, bool patched);
/// Exact form with distinct system and bath depolarizing strengths.
double noisy_xeb(int n_system, int n_bath, int steps, double gamma_system, double gamma_bath,
                 bool patched);

/// Stable identifiers for formula families, used in result records.
std::string source_tag(const std::string& family, Mode mode);

}  // namespace hrcs::theory
