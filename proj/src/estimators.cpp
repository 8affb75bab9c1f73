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

#include "hrcs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "hrcs/theory.hpp"

namespace hrcs {

void Accumulator::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void Accumulator::merge(const Accumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count_);
  const double n_b = static_cast<double>(other.count_);
  const double n = n_a + n_b;
  const double delta = other.mean_ - mean_;
  mean_ += delta * n_b / n;
  m2_ += other.m2_ + delta * delta * n_a * n_b / n;
  count_ += other.count_;
}

double Accumulator::variance() const {
  return count_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(count_ - 1));
}

EnsembleStats Accumulator::stats() const {
  if (count_ == 0) throw ConfigError("statistics of an empty sample");
  return {count_, mean_, std::sqrt(variance() / static_cast<double>(count_))};
}

EnsembleStats ensemble_aggregate(std::span<const double> values) {
  Accumulator acc;
  for (const double v : values) acc.add(v);
  return acc.stats();
}

double power_sum_exact(const Eigen::VectorXd& probabilities, int order) {
  if (order < 1) throw ConfigError("power-sum order must be >= 1");
  std::vector<double> terms(probabilities.data(), probabilities.data() + probabilities.size());
  for (auto& p : terms) {
    if (p < 0.0) throw ConfigError("negative probability");
    p = std::pow(p, order);
  }
  std::sort(terms.begin(), terms.end(), std::greater<>());
  double sum = 0.0;
  for (const double v : terms) sum += v;
  return sum;
}

double power_sum_exact(const JointDistribution& dist, int order) {
  return power_sum_exact(dist.probabilities, order);
}

EnsembleStats power_sum_mc(std::span<const TrajectoryRecord> trajectories, int order) {
  if (order < 2) throw ConfigError("Monte-Carlo power sum needs order >= 2");
  Accumulator acc;
  for (const auto& r : trajectories) acc.add(std::pow(r.model_probability, order - 1));
  return acc.stats();
}

EnsembleStats xeb_estimate(std::span<const double> ideal_probabilities, int n_eff) {
  const double scale = std::ldexp(1.0, n_eff);
  Accumulator acc;
  for (const double p : ideal_probabilities) acc.add(scale * p - 1.0);
  return acc.stats();
}

EnsembleStats xeb_estimate(const std::vector<std::vector<double>>& per_instance, int n_eff) {
  const double scale = std::ldexp(1.0, n_eff);
  Accumulator grand;
  Accumulator instances;
  for (const auto& shots : per_instance) {
    if (shots.empty()) throw ConfigError("instance with no shots");
    Accumulator one;
    for (const double p : shots) one.add(scale * p - 1.0);
    grand.merge(one);
    instances.add(one.mean());
  }
  auto out = instances.stats();
  out.mean = grand.mean();
  out.count = grand.count();
  return out;
}

PopHistogram pop_histogram(std::span<const double> values, int n_eff, int bins) {
  if (values.empty()) throw ConfigError("histogram of no values");
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  const double dim = std::ldexp(1.0, n_eff);
  const double lo = std::log(1e-2 / dim);
  const double hi = std::log(std::min(50.0 / dim, 1.0));
  if (!(hi > lo)) throw ConfigError("empty histogram range");
  PopHistogram h;
  h.n_eff = n_eff;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = std::exp(lo + (hi - lo) * b / bins);
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (const double v : values) {
    if (!(v > 0.0)) continue;
    const double pos = (std::log(v) - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(pos)), 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
    ++h.sample_count;
  }
  h.densities.resize(static_cast<std::size_t>(bins));
  h.reference.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    const double width = h.edges[i + 1] - h.edges[i];
    h.densities[i] = h.sample_count ? counts[i] / (static_cast<double>(h.sample_count) * width) : 0.0;
    h.reference[i] = dim >= 2.0 ? theory::porter_thomas_density(dim, std::sqrt(h.edges[i] * h.edges[i + 1]))
                                : 0.0;
  }
  return h;
}

double ks_distance_porter_thomas(std::span<const double> values, double dim) {
  if (values.empty()) throw ConfigError("KS distance of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = theory::porter_thomas_cdf(dim, sorted[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

std::vector<double> sample_porter_thomas(std::size_t count, double dim, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(count);
  for (auto& p : out) p = -std::expm1(std::log1p(-unif(rng)) / (dim - 1.0));
  return out;
}

double ks_calibration_quantile(std::size_t count, double dim, int trials, double quantile,
                               std::uint64_t seed) {
  if (trials < 1) throw ConfigError("calibration needs at least one trial");
  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(trials));
  for (int k = 0; k < trials; ++k) {
    const auto sample = sample_porter_thomas(count, dim, rng);
    stats.push_back(ks_distance_porter_thomas(sample, dim));
  }
  std::sort(stats.begin(), stats.end());
  const auto idx = std::min(stats.size() - 1, static_cast<std::size_t>(std::ceil(quantile * trials)) - 1);
  return stats[idx];
}

double tvd_exact(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ConfigError("TVD of distributions with different supports");
  return 0.5 * (a - b).cwiseAbs().sum();
}

double tvd_exact(const JointDistribution& a, const JointDistribution& b) {
  return tvd_exact(a.probabilities, b.probabilities);
}

nlohmann::json to_json(const EnsembleStats& stats) {
  return {{"count", stats.count}, {"mean", stats.mean}, {"std_error", stats.std_error}};
}

nlohmann::json to_json(const PopHistogram& hist) {
  return {{"edges", hist.edges},
          {"densities", hist.densities},
          {"reference_porter_thomas", hist.reference},
          {"n_eff", hist.n_eff},
          {"sample_count", hist.sample_count}};
}

}  // namespace hrcs
