// Copyright 2026 The GMOCP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmocp/scoring.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gmocp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double RegularizationTerm(std::size_t k_y, const ScoreParams& params) {
  const long long excess =
      static_cast<long long>(k_y) - static_cast<long long>(params.k_reg);
  return params.xi * std::sqrt(static_cast<double>(std::max(excess, 0LL)));
}

}  // namespace

ProbVector::ProbVector(std::vector<double> probs, double tolerance)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("ProbVector: empty probability vector");
  }
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ProbVector: negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw std::invalid_argument("ProbVector: entries sum to " +
                                std::to_string(sum) + ", not 1");
  }
}

void ScoreParams::Validate() const {
  if (n_labels < 1) throw std::invalid_argument("ScoreParams: n_labels < 1");
  if (k_reg < 0 || k_reg > n_labels) {
    throw std::invalid_argument("ScoreParams: k_reg outside [0, n_labels]");
  }
  if (!(xi >= 0.0)) throw std::invalid_argument("ScoreParams: xi < 0");
}

double NonconformityScore(const ProbVector& p, int label, double u,
                          const ScoreParams& params) {
  if (label < 0 || static_cast<std::size_t>(label) >= p.size()) {
    throw std::invalid_argument("NonconformityScore: invalid label index " +
                                std::to_string(label));
  }
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("NonconformityScore: u outside [0, 1]");
  }
  const double own = p[label];
  std::size_t k_y = 0;
  std::vector<double> above;
  for (double v : p.values()) {
    if (v >= own) ++k_y;
    if (v > own) above.push_back(v);
  }
  // Summed in descending order so the result is bit-identical to the
  // prefix sums in ScoreAllLabels.
  std::sort(above.begin(), above.end(), std::greater<>());
  double rho = 0.0;
  for (double v : above) rho += v;
  return RegularizationTerm(k_y, params) + u * own + rho;
}

std::vector<double> ScoreAllLabels(const ProbVector& p, double u,
                                   const ScoreParams& params) {
  const std::size_t k = p.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

  std::vector<double> scores(k);
  double prefix = 0.0;  // sum of probabilities strictly above the group
  std::size_t begin = 0;
  while (begin < k) {
    const double value = p[order[begin]];
    std::size_t end = begin;
    while (end < k && p[order[end]] == value) ++end;
    const double reg = RegularizationTerm(end, params);
    for (std::size_t i = begin; i < end; ++i) {
      scores[order[i]] = reg + u * value + prefix;
    }
    for (std::size_t i = begin; i < end; ++i) prefix += value;
    begin = end;
  }
  return scores;
}

bool PredictionSet::Contains(int label) const {
  return std::binary_search(labels.begin(), labels.end(), label);
}

PredictionSet BuildPredictionSet(const ProbVector& p, double threshold,
                                 double u, const ScoreParams& params) {
  PredictionSet set;
  set.threshold = threshold;
  if (threshold == kInf) {
    set.labels.resize(p.size());
    std::iota(set.labels.begin(), set.labels.end(), 0);
    return set;
  }
  if (threshold == -kInf) return set;
  const std::vector<double> scores = ScoreAllLabels(p, u, params);
  for (std::size_t y = 0; y < scores.size(); ++y) {
    if (scores[y] <= threshold) set.labels.push_back(static_cast<int>(y));
  }
  return set;
}

std::size_t PredictionSetSize(const ProbVector& p, double threshold, double u,
                              const ScoreParams& params) {
  if (threshold == kInf) return p.size();
  if (threshold == -kInf) return 0;
  const std::vector<double> scores = ScoreAllLabels(p, u, params);
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(),
                    [&](double s) { return s <= threshold; }));
}

long long QuantileIndex(std::size_t count, double alpha) {
  const double level = static_cast<double>(count + 1) * (1.0 - alpha);
  if (level >= 9.0e18) return std::numeric_limits<long long>::max();
  if (level <= -9.0e18) return std::numeric_limits<long long>::min();
  // Snap rounding noise so that exact rational alphas such as (r + 1) / t
  // land on their integer level instead of the next one up.
  const double nearest = std::round(level);
  if (std::abs(level - nearest) <= 1e-9 * std::max(1.0, std::abs(level))) {
    return static_cast<long long>(nearest);
  }
  return static_cast<long long>(std::ceil(level));
}

void CalibrationStore::Insert(double score) { pending_.push_back(score); }

void CalibrationStore::Flush() {
  if (pending_.empty()) return;
  if (pending_.size() == 1) {
    const double s = pending_.front();
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), s), s);
  } else {
    std::sort(pending_.begin(), pending_.end());
    const auto mid = static_cast<std::ptrdiff_t>(sorted_.size());
    sorted_.insert(sorted_.end(), pending_.begin(), pending_.end());
    std::inplace_merge(sorted_.begin(), sorted_.begin() + mid, sorted_.end());
  }
  pending_.clear();
}

std::span<const double> CalibrationStore::Sorted() {
  Flush();
  return sorted_;
}

double CalibrationStore::QuantileThreshold(double alpha) {
  const std::size_t n = count();
  if (n == 0) return kInf;
  const long long k = QuantileIndex(n, alpha);
  if (k > static_cast<long long>(n)) return kInf;
  if (k <= 0) return -kInf;
  Flush();
  return sorted_[static_cast<std::size_t>(k - 1)];
}

double CalibrationStore::OptimalAlphaBar(double true_score) {
  const std::size_t n = count();
  if (n == 0) return 1.0;
  Flush();
  const auto first_ge =
      std::lower_bound(sorted_.begin(), sorted_.end(), true_score);
  const auto r = static_cast<double>(sorted_.end() - first_ge);
  return (r + 1.0) / (static_cast<double>(n) + 1.0);
}

}  // namespace gmocp
