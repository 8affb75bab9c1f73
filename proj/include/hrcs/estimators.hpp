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

// Sampling statistics: power sums, linear XEB, probability-of-probability
// histograms, Kolmogorov-Smirnov distance to Porter-Thomas, exact TVD, and a
// mergeable mean / standard-error accumulator.

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hrcs/engine.hpp"

namespace hrcs {

struct EnsembleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two values.
  double variance() const;
  EnsembleStats stats() const;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

EnsembleStats ensemble_aggregate(std::span<const double> values);

/// sum_y p(y)^K, summed from the largest term down.
double power_sum_exact(const Eigen::VectorXd& probabilities, int order);
double power_sum_exact(const JointDistribution& dist, int order);

/// Mean and SE of model_probability^{K-1} over noiseless trajectories.
EnsembleStats power_sum_mc(std::span<const TrajectoryRecord> trajectories, int order);

/// Mean and SE of 2^{n_eff} P - 1 over ideal probabilities of sampled strings.
EnsembleStats xeb_estimate(std::span<const double> ideal_probabilities, int n_eff);

/// Pooled XEB over B instances of M shots each. The mean is the grand mean;
/// the standard error is taken over per-instance means.
EnsembleStats xeb_estimate(const std::vector<std::vector<double>>& per_instance, int n_eff);

struct PopHistogram {
  std::vector<double> edges;      // bins + 1 edges in p, log spaced
  std::vector<double> densities;  // per-bin density in p
  std::vector<double> reference;  // Porter-Thomas density at each bin's geometric centre
  int n_eff = 0;
  std::size_t sample_count = 0;
};

/// Log-binned density of positive values over [1e-2/D, min(50/D, 1)], D = 2^{n_eff}.
/// Values outside the range are counted in the nearest edge bin.
PopHistogram pop_histogram(std::span<const double> values, int n_eff, int bins = 50);

/// sup |F_emp - F_PT(d)| over the given probabilities.
double ks_distance_porter_thomas(std::span<const double> values, double dim);

/// Draws `count` exact Porter-Thomas variates of dimension `dim`.
std::vector<double> sample_porter_thomas(std::size_t count, double dim, Rng& rng);

/// Empirical quantile of the KS distance between `count` true Porter-Thomas
/// samples and their law, over `trials` repetitions.
double ks_calibration_quantile(std::size_t count, double dim, int trials, double quantile,
                               std::uint64_t seed);

double tvd_exact(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double tvd_exact(const JointDistribution& a, const JointDistribution& b);

nlohmann::json to_json(const EnsembleStats& stats);
nlohmann::json to_json(const PopHistogram& hist);

}  // namespace hrcs
