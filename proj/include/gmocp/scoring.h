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

#ifndef GMOCP_SCORING_H_
#define GMOCP_SCORING_H_

#include <cstddef>
#include <span>
#include <vector>

namespace gmocp {

// One model's probability distribution over labels at one timestep.
class ProbVector {
 public:
  ProbVector() = default;

  // Validates non-negativity and that the entries sum to 1 within
  // `tolerance`. Throws std::invalid_argument otherwise.
  explicit ProbVector(std::vector<double> probs, double tolerance = 1e-6);

  std::span<const double> values() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<double> probs_;
};

struct ScoreParams {
  double xi = 0.02;
  int k_reg = 5;
  int n_labels = 100;

  void Validate() const;
};

// Regularized adaptive score for candidate label `label`:
//   xi * sqrt(max(k_y - k_reg, 0)) + u * p[label] + rho,
// where k_y counts labels with p >= p[label] (ties included) and rho sums
// the probabilities strictly greater than p[label].
double NonconformityScore(const ProbVector& p, int label, double u,
                          const ScoreParams& params);

// Scores of every label in O(K log K). Agrees with NonconformityScore.
std::vector<double> ScoreAllLabels(const ProbVector& p, double u,
                                   const ScoreParams& params);

struct PredictionSet {
  std::vector<int> labels;  // ascending
  double threshold = 0.0;

  std::size_t size() const { return labels.size(); }
  bool Contains(int label) const;
};

// {y : score(p, y, u) <= threshold}. The same u is shared by all labels.
PredictionSet BuildPredictionSet(const ProbVector& p, double threshold,
                                 double u, const ScoreParams& params);

// Number of labels BuildPredictionSet would return, without materializing it.
std::size_t PredictionSetSize(const ProbVector& p, double threshold, double u,
                              const ScoreParams& params);

// Per-model multiset of historical nonconformity scores.
//
// Inserts are appended to a pending buffer in O(1) and merged into the
// sorted array the next time the store is queried. A model that is not
// queried for k steps pays one O(t + k log k) merge instead of k O(t)
// insertions, so per-step cost scales with the number of models that are
// actually consulted.
class CalibrationStore {
 public:
  void Insert(double score);

  // Number of inserted scores (t - 1 at time t).
  std::size_t count() const { return sorted_.size() + pending_.size(); }

  // Ascending view over all inserted scores.
  std::span<const double> Sorted();

  // Threshold at miscoverage `alpha`. With n = count() and t = n + 1 the
  // 1-based index k = ceil(t (1 - alpha)) is taken into the sorted scores;
  // k > n gives +inf and k <= 0 gives -inf. Any real alpha is accepted.
  double QuantileThreshold(double alpha);

  // sup{a : true_score <= QuantileThreshold(a)} = (r + 1) / (n + 1), where
  // r counts stored scores >= true_score. Returns 1 on an empty store. The
  // supremum is not attained: a < result is covered, a = result is not.
  double OptimalAlphaBar(double true_score);

 private:
  void Flush();

  std::vector<double> sorted_;
  std::vector<double> pending_;
};

// 1-based quantile index ceil(t (1 - alpha)) used by QuantileThreshold,
// saturated to the int64 range.
long long QuantileIndex(std::size_t count, double alpha);

}  // namespace gmocp

#endif  // GMOCP_SCORING_H_
