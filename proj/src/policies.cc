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

#include "gmocp/policies.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gmocp/rng.h"

namespace gmocp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> Weights(const std::vector<ModelState>& models) {
  std::vector<double> w(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) w[m] = models[m].weight;
  return w;
}

}  // namespace

PolicyKind ParsePolicyKind(std::string_view name) {
  if (name == "gmocp") return PolicyKind::kGmocp;
  if (name == "egmocp") return PolicyKind::kEgmocp;
  if (name == "mocp") return PolicyKind::kMocp;
  if (name == "coma") return PolicyKind::kComa;
  if (name == "aci") return PolicyKind::kAci;
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

std::string_view PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kGmocp: return "gmocp";
    case PolicyKind::kEgmocp: return "egmocp";
    case PolicyKind::kMocp: return "mocp";
    case PolicyKind::kComa: return "coma";
    case PolicyKind::kAci: return "aci";
  }
  return "gmocp";
}

int PolicyConfig::Bits() const {
  return std::bit_width(static_cast<unsigned>(graph.n_selective)) - 1;
}

void PolicyConfig::Validate() const {
  if (!(target_alpha > 0.0 && target_alpha < 1.0)) {
    throw std::invalid_argument("PolicyConfig: target_alpha outside (0, 1)");
  }
  if (!(eta > 0.0)) throw std::invalid_argument("PolicyConfig: eta <= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("PolicyConfig: epsilon outside (0, 1)");
  }
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("PolicyConfig: beta outside [0, 1)");
  }
  if (n_models < 1) throw std::invalid_argument("PolicyConfig: n_models < 1");
  if (!(coma_gamma >= 0.0)) {
    throw std::invalid_argument("PolicyConfig: coma_gamma < 0");
  }
  if (!(aci_step > 0.0)) {
    throw std::invalid_argument("PolicyConfig: aci_step <= 0");
  }
  graph.Validate();
  score.Validate();
}

Policy::Policy(PolicyConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.Validate();
  models_.resize(static_cast<std::size_t>(cfg_.n_models));
  for (ModelState& m : models_) {
    m.alpha.alpha = cfg_.initial_alpha.value_or(cfg_.target_alpha);
    m.alpha.eta = cfg_.eta;
  }
}

StepResult Policy::Step(const StreamStep& step) {
  if (step.probs.size() != models_.size()) {
    throw std::invalid_argument("Policy::Step: got " +
                                std::to_string(step.probs.size()) +
                                " model outputs, expected " +
                                std::to_string(models_.size()));
  }
  const auto start = std::chrono::steady_clock::now();
  StepResult result = DoStep(step);
  const auto stop = std::chrono::steady_clock::now();
  result.record.t = step.t;
  result.record.wall_nanos =
      std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
          .count();
  return result;
}

double Policy::ScoreU(std::int64_t t, int model) const {
  Rng rng(seed_, StreamId::kScoreU, static_cast<std::uint64_t>(t),
          cfg_.shared_u ? 0 : static_cast<std::uint64_t>(model));
  return rng.Uniform();
}

double Policy::TrueScore(const StreamStep& step, int model) const {
  return NonconformityScore(step.probs[model], step.true_label,
                            ScoreU(step.t, model), cfg_.score);
}

void Policy::InsertCalibration(const StreamStep& step,
                               std::span<const double> known_scores) {
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const double s = std::isnan(known_scores[m])
                         ? TrueScore(step, static_cast<int>(m))
                         : known_scores[m];
    models_[m].calibration.Insert(s);
  }
}

void Policy::RecordAllAlphaBar(const StreamStep& step, StepRecord* record) {
  if (!cfg_.record_all_alpha_bar) return;
  record->alpha_bar_all.resize(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    record->alpha_bar_all[m] = models_[m].calibration.OptimalAlphaBar(
        TrueScore(step, static_cast<int>(m)));
  }
}

void Policy::RenormalizeWeights() {
  double max_w = 0.0;
  for (ModelState& m : models_) {
    m.weight = std::max(m.weight, std::numeric_limits<double>::min());
    max_w = std::max(max_w, m.weight);
  }
  if (max_w < 1e-300) {
    for (ModelState& m : models_) {
      m.weight = std::max(m.weight / max_w, std::numeric_limits<double>::min());
    }
  }
}

GmocpPolicy::GmocpPolicy(PolicyConfig cfg, std::uint64_t seed,
                         bool size_feedback)
    : Policy(std::move(cfg), seed), size_feedback_(size_feedback) {}

GmocpPolicy::Draw GmocpPolicy::Sample(std::int64_t t) const {
  const auto ut = static_cast<std::uint64_t>(t);
  const std::vector<double> weights = Weights(models_);
  Draw d;
  Rng graph_rng(seed_, StreamId::kGraph, ut);
  d.graph = GenerateGraph(weights, cfg_.graph, graph_rng);
  Rng node_rng(seed_, StreamId::kNode, ut);
  d.node = SelectNode(d.graph, node_rng);
  d.subset = EffectiveSubset(d.graph, d.node);
  std::vector<double> subset_w(d.subset.size());
  for (std::size_t i = 0; i < d.subset.size(); ++i) {
    subset_w[i] = weights[d.subset[i]];
  }
  Rng model_rng(seed_, StreamId::kModel, ut);
  d.chosen_model = d.subset[model_rng.Categorical(subset_w)];
  return d;
}

StepResult GmocpPolicy::DoStep(const StreamStep& step) {
  Draw draw = Sample(step.t);
  const int chosen = draw.chosen_model;
  const double target = cfg_.target_alpha;
  const double scale = std::ldexp(1.0, -cfg_.Bits());  // 1 / 2^b

  StepResult out;
  ModelState& chosen_state = models_[chosen];
  const double threshold =
      chosen_state.calibration.QuantileThreshold(chosen_state.alpha.alpha);
  out.set = BuildPredictionSet(step.probs[chosen], threshold,
                               ScoreU(step.t, chosen), cfg_.score);

  StepRecord& rec = out.record;
  rec.node = draw.node;
  rec.chosen_model = chosen;
  rec.set_size = static_cast<int>(out.set.size());
  rec.err = out.set.Contains(step.true_label) ? 0 : 1;
  RecordAllAlphaBar(step, &rec);

  // Set sizes at each subset model's own current level, taken before any
  // update of this step.
  std::vector<std::size_t> lengths(draw.subset.size(), 0);
  if (size_feedback_) {
    for (std::size_t i = 0; i < draw.subset.size(); ++i) {
      const int m = draw.subset[i];
      if (m == chosen) {
        lengths[i] = out.set.size();
        continue;
      }
      ModelState& s = models_[m];
      lengths[i] = PredictionSetSize(
          step.probs[m], s.calibration.QuantileThreshold(s.alpha.alpha),
          ScoreU(step.t, m), cfg_.score);
    }
  }

  std::vector<double> scores(models_.size(), kNaN);
  for (std::size_t i = 0; i < draw.subset.size(); ++i) {
    const int m = draw.subset[i];
    ModelState& s = models_[m];
    scores[m] = TrueScore(step, m);
    const double alpha_bar = s.calibration.OptimalAlphaBar(scores[m]);
    const double loss = PinballLoss(alpha_bar, s.alpha.alpha, target);
    const double estimate = loss / draw.graph.inclusion_prob[m];
    double exponent = estimate * scale;
    if (size_feedback_) {
      exponent = (1.0 - cfg_.beta) * estimate * scale +
                 cfg_.beta * static_cast<double>(lengths[i]);
    }
    s.weight *= std::exp(-cfg_.epsilon * exponent);
    if (m == chosen) {
      rec.chosen_loss = loss;
      rec.chosen_alpha_bar = alpha_bar;
    }
    s.alpha = SfogdUpdate(s.alpha, alpha_bar, target);
    rec.losses.emplace_back(m, estimate);
  }
  rec.subset = std::move(draw.subset);

  InsertCalibration(step, scores);
  RenormalizeWeights();
  return out;
}

MocpPolicy::MocpPolicy(PolicyConfig cfg, std::uint64_t seed)
    : Policy(std::move(cfg), seed) {}

StepResult MocpPolicy::DoStep(const StreamStep& step) {
  Rng model_rng(seed_, StreamId::kModel, static_cast<std::uint64_t>(step.t));
  const int chosen =
      static_cast<int>(model_rng.Categorical(Weights(models_)));
  const double target = cfg_.target_alpha;

  StepResult out;
  ModelState& chosen_state = models_[chosen];
  out.set = BuildPredictionSet(
      step.probs[chosen],
      chosen_state.calibration.QuantileThreshold(chosen_state.alpha.alpha),
      ScoreU(step.t, chosen), cfg_.score);

  StepRecord& rec = out.record;
  rec.chosen_model = chosen;
  rec.set_size = static_cast<int>(out.set.size());
  rec.err = out.set.Contains(step.true_label) ? 0 : 1;
  RecordAllAlphaBar(step, &rec);

  std::vector<double> scores(models_.size());
  rec.subset.resize(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const int m = static_cast<int>(i);
    ModelState& s = models_[i];
    scores[i] = TrueScore(step, m);
    const double alpha_bar = s.calibration.OptimalAlphaBar(scores[i]);
    const double loss = PinballLoss(alpha_bar, s.alpha.alpha, target);
    s.weight *= std::exp(-cfg_.epsilon * loss);
    if (m == chosen) {
      rec.chosen_loss = loss;
      rec.chosen_alpha_bar = alpha_bar;
    }
    s.alpha = SfogdUpdate(s.alpha, alpha_bar, target);
    rec.subset[i] = m;
    rec.losses.emplace_back(m, loss);
  }

  InsertCalibration(step, scores);
  RenormalizeWeights();
  return out;
}

PredictionSet MajorityVote(std::span<const PredictionSet> member_sets,
                           std::span<const double> weights, double u,
                           int n_labels) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> votes(static_cast<std::size_t>(n_labels), 0.0);
  for (std::size_t m = 0; m < member_sets.size(); ++m) {
    const double share = weights[m] / total;
    for (int y : member_sets[m].labels) votes[y] += share;
  }
  PredictionSet set;
  set.threshold = (1.0 + u) / 2.0;
  for (int y = 0; y < n_labels; ++y) {
    if (votes[y] > set.threshold) set.labels.push_back(y);
  }
  return set;
}

ComaPolicy::ComaPolicy(PolicyConfig cfg, std::uint64_t seed)
    : Policy(std::move(cfg), seed) {
  shared_alpha_.alpha = cfg_.initial_alpha.value_or(cfg_.target_alpha);
  shared_alpha_.eta = cfg_.eta;
}

StepResult ComaPolicy::DoStep(const StreamStep& step) {
  const std::vector<double> weights = Weights(models_);
  std::vector<PredictionSet> member_sets;
  member_sets.reserve(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    member_sets.push_back(BuildPredictionSet(
        step.probs[m],
        models_[m].calibration.QuantileThreshold(shared_alpha_.alpha),
        ScoreU(step.t, static_cast<int>(m)), cfg_.score));
  }
  Rng vote_rng(seed_, StreamId::kVote, static_cast<std::uint64_t>(step.t));
  StepResult out;
  out.set = MajorityVote(member_sets, weights, vote_rng.Uniform(),
                         cfg_.score.n_labels);

  StepRecord& rec = out.record;
  const int leader = static_cast<int>(
      std::max_element(weights.begin(), weights.end()) - weights.begin());
  rec.chosen_model = leader;
  rec.set_size = static_cast<int>(out.set.size());
  rec.err = out.set.Contains(step.true_label) ? 0 : 1;
  RecordAllAlphaBar(step, &rec);

  std::vector<double> scores(models_.size(), kNaN);
  scores[leader] = TrueScore(step, leader);
  rec.chosen_alpha_bar =
      models_[leader].calibration.OptimalAlphaBar(scores[leader]);
  rec.chosen_loss = PinballLoss(rec.chosen_alpha_bar, shared_alpha_.alpha,
                                cfg_.target_alpha);

  shared_alpha_ =
      SfogdStep(shared_alpha_, static_cast<double>(rec.err) - cfg_.target_alpha);
  rec.subset.resize(models_.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const double len = static_cast<double>(member_sets[m].size());
    models_[m].weight *= std::exp(-cfg_.coma_gamma * len);
    models_[m].alpha.alpha = shared_alpha_.alpha;
    rec.subset[m] = static_cast<int>(m);
    rec.losses.emplace_back(static_cast<int>(m), len);
  }

  InsertCalibration(step, scores);
  RenormalizeWeights();
  return out;
}

AciPolicy::AciPolicy(PolicyConfig cfg, std::uint64_t seed)
    : Policy(std::move(cfg), seed) {}

StepResult AciPolicy::DoStep(const StreamStep& step) {
  ModelState& s = models_[0];
  StepResult out;
  out.set = BuildPredictionSet(step.probs[0],
                               s.calibration.QuantileThreshold(s.alpha.alpha),
                               ScoreU(step.t, 0), cfg_.score);
  StepRecord& rec = out.record;
  rec.chosen_model = 0;
  rec.subset = {0};
  rec.set_size = static_cast<int>(out.set.size());
  rec.err = out.set.Contains(step.true_label) ? 0 : 1;

  const double score = TrueScore(step, 0);
  rec.chosen_alpha_bar = s.calibration.OptimalAlphaBar(score);
  rec.chosen_loss =
      PinballLoss(rec.chosen_alpha_bar, s.alpha.alpha, cfg_.target_alpha);
  rec.losses.emplace_back(0, rec.chosen_loss);
  if (cfg_.record_all_alpha_bar) rec.alpha_bar_all = {rec.chosen_alpha_bar};

  s.alpha.alpha +=
      cfg_.aci_step * (cfg_.target_alpha - static_cast<double>(rec.err));
  s.calibration.Insert(score);
  return out;
}

std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const PolicyConfig& cfg,
                                   std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::kGmocp:
      return std::make_unique<GmocpPolicy>(cfg, seed, false);
    case PolicyKind::kEgmocp:
      return std::make_unique<GmocpPolicy>(cfg, seed, true);
    case PolicyKind::kMocp:
      return std::make_unique<MocpPolicy>(cfg, seed);
    case PolicyKind::kComa:
      return std::make_unique<ComaPolicy>(cfg, seed);
    case PolicyKind::kAci:
      return std::make_unique<AciPolicy>(cfg, seed);
  }
  throw std::invalid_argument("MakePolicy: unknown kind");
}

}  // namespace gmocp
