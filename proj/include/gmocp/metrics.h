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

#ifndef GMOCP_METRICS_H_
#define GMOCP_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "gmocp/policies.h"

namespace gmocp {

struct RunMetrics {
  double coverage_pct = 0.0;
  double avg_width = 0.0;
  double single_width_pct = 0.0;   // size 1 and covered, over all steps
  std::vector<double> local_coverage;  // per-window mean of (1 - err)
  double width_under_k_pct = 0.0;  // size < cap and covered, over all steps
  double runtime_secs = 0.0;
};

struct MetricsOptions {
  std::size_t window = 100;
  int width_cap = 40;
  // Sliding windows with stride 1 instead of disjoint blocks.
  bool overlapping_windows = false;
};

// Throws std::invalid_argument on empty input.
RunMetrics ComputeMetrics(std::span<const StepRecord> records,
                          const MetricsOptions& options = {});

// Minimum over constant alpha in [lo, hi] of sum_t PinballLoss(a_t, alpha).
// The objective is convex and piecewise linear with kinks at the a_t, so it
// is evaluated exactly at every kink inside the interval and at both ends.
struct ConstantAlphaFit {
  double alpha = 0.0;
  double loss = 0.0;
};
ConstantAlphaFit BestConstantAlpha(std::span<const double> alpha_bars,
                                   double target_alpha, double lo, double hi);

// Offline regret: sum_t chosen_losses[t] minus the best (model, constant
// alpha) total. alpha_bars[m][t] is model m's alpha_bar at step t; alpha is
// searched over [-eta, 1 + eta].
double HindsightRegret(std::span<const double> chosen_losses,
                       std::span<const std::vector<double>> alpha_bars,
                       double target_alpha, double eta);

// Regret over the first `horizon` records. Requires records produced with
// PolicyConfig::record_all_alpha_bar.
double HindsightRegret(std::span<const StepRecord> records,
                       std::size_t horizon, double target_alpha, double eta);

}  // namespace gmocp

#endif  // GMOCP_METRICS_H_
