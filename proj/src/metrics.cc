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

#include "gmocp/metrics.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "gmocp/adapt.h"

namespace gmocp {

RunMetrics ComputeMetrics(std::span<const StepRecord> records,
                          const MetricsOptions& options) {
  if (records.empty()) {
    throw std::invalid_argument("ComputeMetrics: no records");
  }
  if (options.window == 0) {
    throw std::invalid_argument("ComputeMetrics: window must be positive");
  }
  const double n = static_cast<double>(records.size());
  double errs = 0.0, width = 0.0, single = 0.0, under = 0.0, nanos = 0.0;
  for (const StepRecord& r : records) {
    errs += r.err;
    width += r.set_size;
    if (r.err == 0 && r.set_size == 1) single += 1.0;
    if (r.err == 0 && r.set_size < options.width_cap) under += 1.0;
    nanos += static_cast<double>(r.wall_nanos);
  }
  RunMetrics out;
  out.coverage_pct = 100.0 * (1.0 - errs / n);
  out.avg_width = width / n;
  out.single_width_pct = 100.0 * single / n;
  out.width_under_k_pct = 100.0 * under / n;
  out.runtime_secs = nanos * 1e-9;

  const std::size_t w = options.window;
  auto window_mean = [&](std::size_t begin, std::size_t end) {
    double covered = 0.0;
    for (std::size_t i = begin; i < end; ++i) covered += 1 - records[i].err;
    return covered / static_cast<double>(end - begin);
  };
  if (options.overlapping_windows && records.size() >= w) {
    double covered = 0.0;
    for (std::size_t i = 0; i < w; ++i) covered += 1 - records[i].err;
    out.local_coverage.push_back(covered / static_cast<double>(w));
    for (std::size_t i = w; i < records.size(); ++i) {
      covered += (1 - records[i].err) - (1 - records[i - w].err);
      out.local_coverage.push_back(covered / static_cast<double>(w));
    }
  } else {
    for (std::size_t begin = 0; begin < records.size(); begin += w) {
      out.local_coverage.push_back(
          window_mean(begin, std::min(records.size(), begin + w)));
    }
  }
  return out;
}

ConstantAlphaFit BestConstantAlpha(std::span<const double> alpha_bars,
                                   double target_alpha, double lo, double hi) {
  std::vector<double> a(alpha_bars.begin(), alpha_bars.end());
  std::sort(a.begin(), a.end());
  std::vector<double> prefix(a.size() + 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) prefix[i + 1] = prefix[i] + a[i];
  const double total = prefix.back();
  const double count = static_cast<double>(a.size());

  // f(x) = target * sum_{a >= x} (a - x) + (1 - target) * sum_{a < x} (x - a)
  auto objective = [&](double x) {
    const auto below = static_cast<std::size_t>(
        std::lower_bound(a.begin(), a.end(), x) - a.begin());
    const double nb = static_cast<double>(below);
    const double sum_below = prefix[below];
    const double sum_above = total - sum_below;
    return target_alpha * (sum_above - (count - nb) * x) +
           (1.0 - target_alpha) * (nb * x - sum_below);
  };

  ConstantAlphaFit best{lo, objective(lo)};
  auto consider = [&](double x) {
    const double f = objective(x);
    if (f < best.loss) best = {x, f};
  };
  consider(hi);
  for (double x : a) {
    if (x > lo && x < hi) consider(x);
  }
  // The prefix-sum form cancels; report the loss summed term by term.
  double direct = 0.0;
  for (double v : alpha_bars) direct += PinballLoss(v, best.alpha, target_alpha);
  best.loss = direct;
  return best;
}

double HindsightRegret(std::span<const double> chosen_losses,
                       std::span<const std::vector<double>> alpha_bars,
                       double target_alpha, double eta) {
  double realized = 0.0;
  for (double l : chosen_losses) realized += l;
  double best = std::numeric_limits<double>::infinity();
  for (const std::vector<double>& model : alpha_bars) {
    if (model.size() != chosen_losses.size()) {
      throw std::invalid_argument("HindsightRegret: ragged alpha_bar matrix");
    }
    best = std::min(
        best, BestConstantAlpha(model, target_alpha, -eta, 1.0 + eta).loss);
  }
  return realized - best;
}

double HindsightRegret(std::span<const StepRecord> records,
                       std::size_t horizon, double target_alpha, double eta) {
  if (horizon > records.size()) {
    throw std::invalid_argument("HindsightRegret: horizon beyond records");
  }
  if (horizon == 0) return 0.0;
  const std::size_t n_models = records.front().alpha_bar_all.size();
  if (n_models == 0) {
    throw std::invalid_argument(
        "HindsightRegret: records lack per-model alpha_bar");
  }
  std::vector<double> chosen(horizon);
  std::vector<std::vector<double>> bars(n_models, std::vector<double>(horizon));
  for (std::size_t t = 0; t < horizon; ++t) {
    chosen[t] = records[t].chosen_loss;
    if (records[t].alpha_bar_all.size() != n_models) {
      throw std::invalid_argument(
          "HindsightRegret: records lack per-model alpha_bar");
    }
    for (std::size_t m = 0; m < n_models; ++m) {
      bars[m][t] = records[t].alpha_bar_all[m];
    }
  }
  return HindsightRegret(chosen, bars, target_alpha, eta);
}

}  // namespace gmocp
