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

#ifndef GMOCP_POLICIES_H_
#define GMOCP_POLICIES_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmocp/adapt.h"
#include "gmocp/graph.h"
#include "gmocp/scoring.h"
#include "gmocp/streams.h"

namespace gmocp {

enum class PolicyKind { kGmocp, kEgmocp, kMocp, kComa, kAci };

PolicyKind ParsePolicyKind(std::string_view name);
std::string_view PolicyName(PolicyKind kind);

struct PolicyConfig {
  double target_alpha = 0.1;
  double eta = 0.05;      // SF-OGD learning rate
  double epsilon = 0.5;   // weight step size
  double beta = 0.05;     // set-size mix (EGMOCP)
  GraphParams graph;
  int n_models = 1;
  ScoreParams score;
  // Initial alpha for every model; target_alpha when unset.
  std::optional<double> initial_alpha;
  double coma_gamma = 0.01;  // COMA weight decay per unit of set size
  double aci_step = 0.005;   // fixed step of the single-model baseline
  // One u per timestep shared by all models instead of one per model.
  bool shared_u = false;
  // Record alpha_bar for every model each step (offline regret analysis).
  // Costs O(M t) per step, so it is off for timing runs.
  bool record_all_alpha_bar = false;

  // b = floor(log2 J).
  int Bits() const;
  void Validate() const;
};

struct ModelState {
  double weight = 1.0;
  AlphaState alpha;
  CalibrationStore calibration;
};

struct StepRecord {
  std::int64_t t = 0;
  int node = 0;
  int chosen_model = 0;
  std::vector<int> subset;
  int set_size = 0;
  int err = 0;
  // Importance-weighted loss l^m for each model in the subset.
  std::vector<std::pair<int, double>> losses;
  // Pinball loss and alpha_bar of the chosen model.
  double chosen_loss = 0.0;
  double chosen_alpha_bar = 0.0;
  std::vector<double> alpha_bar_all;  // only with record_all_alpha_bar
  std::int64_t wall_nanos = 0;
};

struct StepResult {
  PredictionSet set;
  StepRecord record;
};

// Online conformal policy. Step() builds the set for the step's inputs,
// then reveals the true label and updates internal state.
class Policy {
 public:
  virtual ~Policy() = default;

  StepResult Step(const StreamStep& step);

  const std::vector<ModelState>& models() const { return models_; }
  std::vector<ModelState>& mutable_models() { return models_; }
  const PolicyConfig& config() const { return cfg_; }

  // Per-step score randomization for model m.
  double ScoreU(std::int64_t t, int model) const;

 protected:
  Policy(PolicyConfig cfg, std::uint64_t seed);

  virtual StepResult DoStep(const StreamStep& step) = 0;

  // Appends every model's score for (X_t, true label) to its store.
  void InsertCalibration(const StreamStep& step,
                         std::span<const double> known_scores);

  // Floors weights at the smallest normal double and rescales them by
  // 1/max when the largest drops below 1e-300.
  void RenormalizeWeights();

  double TrueScore(const StreamStep& step, int model) const;
  void RecordAllAlphaBar(const StreamStep& step, StepRecord* record);

  PolicyConfig cfg_;
  std::uint64_t seed_;
  std::vector<ModelState> models_;
};

std::unique_ptr<Policy> MakePolicy(PolicyKind kind, const PolicyConfig& cfg,
                                   std::uint64_t seed);

// Graph-structured multi-model policy. With beta > 0 the weight update
// also penalizes each subset model's own set size (EGMOCP).
class GmocpPolicy : public Policy {
 public:
  GmocpPolicy(PolicyConfig cfg, std::uint64_t seed, bool size_feedback);

  // Graph, node and subset as they would be drawn at step t from the
  // current weights.
  struct Draw {
    FeedbackGraph graph;
    int node = 0;
    std::vector<int> subset;
    int chosen_model = 0;
  };
  Draw Sample(std::int64_t t) const;

 protected:
  StepResult DoStep(const StreamStep& step) override;

 private:
  bool size_feedback_;
};

// Full-information multi-model policy: every model is observed each step.
class MocpPolicy : public Policy {
 public:
  MocpPolicy(PolicyConfig cfg, std::uint64_t seed);

 protected:
  StepResult DoStep(const StreamStep& step) override;
};

// Weighted-majority vote over per-model sets at a shared adaptive level.
class ComaPolicy : public Policy {
 public:
  ComaPolicy(PolicyConfig cfg, std::uint64_t seed);

  const AlphaState& shared_alpha() const { return shared_alpha_; }

 protected:
  StepResult DoStep(const StreamStep& step) override;

 private:
  AlphaState shared_alpha_;
};

// Single-model adaptive baseline: alpha += step * (target - err).
class AciPolicy : public Policy {
 public:
  AciPolicy(PolicyConfig cfg, std::uint64_t seed);

 protected:
  StepResult DoStep(const StreamStep& step) override;
};

// Voted set: labels whose normalized weight of member sets exceeds
// (1 + u) / 2.
PredictionSet MajorityVote(std::span<const PredictionSet> member_sets,
                           std::span<const double> weights, double u,
                           int n_labels);

}  // namespace gmocp

#endif  // GMOCP_POLICIES_H_
