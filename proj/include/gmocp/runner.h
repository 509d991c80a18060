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

#ifndef GMOCP_RUNNER_H_
#define GMOCP_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmocp/metrics.h"
#include "gmocp/policies.h"
#include "gmocp/streams.h"

namespace gmocp {

struct ExperimentConfig {
  PolicyKind policy = PolicyKind::kGmocp;
  PolicyConfig policy_params;
  // Exactly one of the two stream sources is used; a file wins.
  StreamConfig stream;
  std::optional<std::filesystem::path> stream_file;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output = "results";
  MetricsOptions metrics;
  bool trace = false;

  void Validate() const;
  // "<policy>_N<N>_J<J>".
  std::string Id() const;
};

// Parses the JSON config document. Missing keys take the defaults
// (epsilon 0.5, eta 0.05, beta 0.05, alpha 0.1, T 6000, batch 500).
ExperimentConfig ParseExperimentConfig(std::string_view json_text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Exploration coefficients used when a sweep changes J: {0.2, 0.8} for
// J = 2, {0.1, 0.2, 0.3, 0.4} for J = 4, otherwise `fallback` repeated.
std::vector<double> DefaultEtaE(int n_selective, double fallback);

struct ResultRow {
  std::string policy;
  int n = 0;
  int j = 0;
  std::uint64_t seed = 0;
  double coverage = 0.0;
  double avg_width = 0.0;
  double single_width = 0.0;
  double runtime = 0.0;
  double width_under_k = 0.0;
};

// The synthetic stream realization used by `seed`.
StreamConfig StreamForSeed(const StreamConfig& base, std::uint64_t seed);

// Runs one policy over a stream for one seed and returns its step records.
std::vector<StepRecord> RunPolicy(PolicyKind kind, const PolicyConfig& cfg,
                                  const std::vector<StreamStep>& stream,
                                  std::uint64_t seed);
std::vector<StepRecord> RunPolicy(PolicyKind kind, const PolicyConfig& cfg,
                                  const StreamConfig& stream,
                                  std::uint64_t seed);

struct RunOptions {
  bool resume = false;
};

// Runs every seed, appending one row per seed to <output>/results.csv as it
// finishes, then rewrites <output>/summary.json from all rows in the file.
// With --trace, per-step records go to <output>/trace_<id>_seed<s>.csv.
std::vector<ResultRow> RunExperiment(const ExperimentConfig& cfg,
                                     const RunOptions& options = {});

// Grid axes: "N", "J" and "policy". Runs the product of all values.
using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;
SweepGrid ParseGrid(const std::vector<std::string>& specs);
std::vector<ResultRow> RunSweep(const ExperimentConfig& base,
                                const SweepGrid& grid,
                                const RunOptions& options = {});

std::string ResultCsvHeader();
std::string FormatResultRow(const ResultRow& row);
std::vector<ResultRow> ReadResults(const std::filesystem::path& path);

// {config_id: {metric: {mean, std}}}, std is the sample deviation.
std::string SummaryJson(const std::vector<ResultRow>& rows);

void WriteTrace(const std::filesystem::path& path,
                const std::vector<StepRecord>& records);

}  // namespace gmocp

#endif  // GMOCP_RUNNER_H_
