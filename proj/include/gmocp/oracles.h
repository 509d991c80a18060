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

#ifndef GMOCP_ORACLES_H_
#define GMOCP_ORACLES_H_

// Slow reference computations used to cross-check the fast paths. None of
// these call into the implementation they are checking.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmocp/graph.h"
#include "gmocp/rng.h"

namespace gmocp::oracle {

// Sorts a copy, forms the level L = ceil(t (1 - alpha)) / (t - 1) and scans
// for the first position i with i / (t - 1) >= L.
double BruteForceQuantile(std::span<const double> scores, double alpha);

// Largest alpha on the grid {0, res, 2 res, ..., 1} whose brute-force
// threshold still covers `true_score`.
double GridAlphaBar(std::span<const double> scores, double true_score,
                    double resolution = 1e-4);

// Inclusion probability of every model by enumerating all M^N draw
// sequences of each node, weighted by the node PMF. Exponential; keep
// M^N small.
std::vector<double> EnumeratedInclusion(const FeedbackGraph& graph,
                                        int max_links);

// Frequency with which each model lands in the selected node's row when
// rows are redrawn from the graph's connection PMFs and the node is drawn
// from the graph's node PMF. Every row is sampled `draws` times and the
// per-row frequencies are averaged under the node PMF.
std::vector<double> MonteCarloInclusion(const FeedbackGraph& graph,
                                        int max_links, std::size_t draws,
                                        Rng& rng);

// Minimum of sum_t PinballLoss(a_t, x) over the grid lo, lo + res, ..., hi.
double GridConstantAlphaLoss(std::span<const double> alpha_bars,
                             double target_alpha, double lo, double hi,
                             double resolution = 1e-4);

struct Report {
  std::string name;
  std::size_t instances = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

// Names: quantile, alpha_bar, inclusion_prob, loss_unbiasedness,
// regret_grid. Throws std::invalid_argument for anything else.
Report Run(std::string_view name, std::uint64_t seed, std::size_t instances);

std::vector<std::string_view> Names();

}  // namespace gmocp::oracle

#endif  // GMOCP_ORACLES_H_
