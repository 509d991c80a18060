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

#ifndef GMOCP_STREAMS_H_
#define GMOCP_STREAMS_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmocp/rng.h"
#include "gmocp/scoring.h"

namespace gmocp {

enum class Schedule { kGradual, kSudden, kStationary };
enum class Quality { kHigh, kMedium, kLow };

Schedule ParseSchedule(std::string_view name);
std::string_view ScheduleName(Schedule schedule);
Quality ParseQuality(std::string_view name);
std::string_view QualityName(Quality quality);

struct ModelProfile {
  Quality quality = Quality::kHigh;
  double noise_scale = 1.0;
  double temperature = 1.0;
};

// Logit boost given to the true label, per quality tier.
struct SignalLevels {
  double high = 5.0;
  double medium = 3.0;
  double low = 0.2;

  double For(Quality q) const;
};

struct StreamConfig {
  int n_labels = 100;
  std::int64_t horizon = 6000;
  int batch_size = 500;
  Schedule schedule = Schedule::kSudden;
  std::vector<ModelProfile> profiles;
  SignalLevels signal;
  std::uint64_t master_seed = 0;

  void Validate() const;
};

struct StreamStep {
  std::int64_t t = 0;
  int true_label = 0;
  int severity = 0;
  std::vector<ProbVector> probs;  // one per model

  bool operator==(const StreamStep&) const = default;
};

// Severity at 1-based step t. Batches are numbered from 0; gradual cycles
// 0,1,2,3,4,5,4,3,2,1 and repeats, sudden alternates 0,5.
int SeverityAt(std::int64_t t, Schedule schedule, int batch_size);

// softmax((signal * onehot(label) + noise_scale * (1 + severity) * z) / T)
// with z drawn from `rng`.
ProbVector SynthesizeProbs(const ModelProfile& profile,
                           const SignalLevels& signal, int n_labels,
                           int true_label, int severity, Rng& rng);

// Pure function of (cfg, t): random and sequential access agree.
StreamStep GenerateStep(const StreamConfig& cfg, std::int64_t t);

// CSV stream files: header `t,true_label,severity,model_id,p_0,...,p_{K-1}`,
// one row per (t, model).
class StreamWriter {
 public:
  StreamWriter(const std::filesystem::path& path, int n_labels);
  void Write(const StreamStep& step);

 private:
  std::ofstream out_;
  int n_labels_;
};

class StreamReader {
 public:
  explicit StreamReader(const std::filesystem::path& path);

  // Next step in t order, or nullopt at end of file. Throws
  // std::runtime_error on malformed rows, non-simplex probabilities or an
  // inconsistent model count.
  std::optional<StreamStep> Next();

  int n_labels() const { return n_labels_; }

 private:
  struct Row {
    std::int64_t t;
    int true_label;
    int severity;
    int model_id;
    std::vector<double> probs;
  };
  std::optional<Row> ReadRow();

  std::ifstream in_;
  std::filesystem::path path_;
  int n_labels_ = 0;
  int n_models_ = -1;
  std::size_t line_no_ = 1;
  std::optional<Row> lookahead_;
};

void SaveStream(const std::filesystem::path& path, const StreamConfig& cfg);
std::vector<StreamStep> LoadStream(const std::filesystem::path& path);

// Default evaluation stream: 6 high, 1 medium and 1 low quality model.
StreamConfig DefaultStreamConfig(Schedule schedule, std::uint64_t seed);

}  // namespace gmocp

#endif  // GMOCP_STREAMS_H_
