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

#include "gmocp/streams.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "gmocp/rng.h"

namespace gmocp {
namespace {

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool ParseInt(std::string_view text, T* out) {
  std::string s(text);
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  *out = static_cast<T>(v);
  return true;
}

bool ParseDouble(std::string_view text, double* out) {
  std::string s(text);
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  *out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

Schedule ParseSchedule(std::string_view name) {
  if (name == "gradual") return Schedule::kGradual;
  if (name == "sudden") return Schedule::kSudden;
  if (name == "stationary") return Schedule::kStationary;
  throw std::invalid_argument("unknown schedule: " + std::string(name));
}

std::string_view ScheduleName(Schedule schedule) {
  switch (schedule) {
    case Schedule::kGradual: return "gradual";
    case Schedule::kSudden: return "sudden";
    case Schedule::kStationary: return "stationary";
  }
  return "stationary";
}

Quality ParseQuality(std::string_view name) {
  if (name == "high") return Quality::kHigh;
  if (name == "medium") return Quality::kMedium;
  if (name == "low") return Quality::kLow;
  throw std::invalid_argument("unknown quality: " + std::string(name));
}

std::string_view QualityName(Quality quality) {
  switch (quality) {
    case Quality::kHigh: return "high";
    case Quality::kMedium: return "medium";
    case Quality::kLow: return "low";
  }
  return "high";
}

double SignalLevels::For(Quality q) const {
  switch (q) {
    case Quality::kHigh: return high;
    case Quality::kMedium: return medium;
    case Quality::kLow: return low;
  }
  return low;
}

void StreamConfig::Validate() const {
  if (n_labels < 1) throw std::invalid_argument("StreamConfig: n_labels < 1");
  if (horizon < 1) throw std::invalid_argument("StreamConfig: horizon < 1");
  if (batch_size < 1) {
    throw std::invalid_argument("StreamConfig: batch_size < 1");
  }
  if (profiles.empty()) {
    throw std::invalid_argument("StreamConfig: no model profiles");
  }
  for (const ModelProfile& p : profiles) {
    if (!(p.noise_scale >= 0.0)) {
      throw std::invalid_argument("StreamConfig: noise_scale < 0");
    }
    if (!(p.temperature > 0.0)) {
      throw std::invalid_argument("StreamConfig: temperature <= 0");
    }
  }
}

int SeverityAt(std::int64_t t, Schedule schedule, int batch_size) {
  if (t < 1) throw std::invalid_argument("SeverityAt: t must be >= 1");
  const std::int64_t batch = (t - 1) / batch_size;
  switch (schedule) {
    case Schedule::kGradual: {
      const int phase = static_cast<int>(batch % 10);
      return phase <= 5 ? phase : 10 - phase;
    }
    case Schedule::kSudden:
      return batch % 2 == 0 ? 0 : 5;
    case Schedule::kStationary:
      return 0;
  }
  return 0;
}

ProbVector SynthesizeProbs(const ModelProfile& profile,
                           const SignalLevels& signal, int n_labels,
                           int true_label, int severity, Rng& rng) {
  const double sigma = profile.noise_scale * (1.0 + severity);
  std::vector<double> logits(static_cast<std::size_t>(n_labels));
  for (int y = 0; y < n_labels; ++y) {
    logits[y] = sigma * rng.Normal();
  }
  logits[true_label] += signal.For(profile.quality);
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp((z - top) / profile.temperature);
    total += z;
  }
  for (double& z : logits) z /= total;
  return ProbVector(std::move(logits));
}

StreamStep GenerateStep(const StreamConfig& cfg, std::int64_t t) {
  StreamStep step;
  step.t = t;
  step.severity = SeverityAt(t, cfg.schedule, cfg.batch_size);
  Rng label_rng(cfg.master_seed, StreamId::kLabel, static_cast<std::uint64_t>(t));
  step.true_label = static_cast<int>(label_rng.NextU64() %
                                     static_cast<std::uint64_t>(cfg.n_labels));
  step.probs.reserve(cfg.profiles.size());
  for (std::size_t m = 0; m < cfg.profiles.size(); ++m) {
    Rng noise(cfg.master_seed, StreamId::kNoise, static_cast<std::uint64_t>(t),
              m);
    step.probs.push_back(SynthesizeProbs(cfg.profiles[m], cfg.signal,
                                         cfg.n_labels, step.true_label,
                                         step.severity, noise));
  }
  return step;
}

StreamWriter::StreamWriter(const std::filesystem::path& path, int n_labels)
    : out_(path, std::ios::binary), n_labels_(n_labels) {
  if (!out_) {
    throw std::runtime_error("cannot open stream file for writing: " +
                             path.string());
  }
  out_ << "t,true_label,severity,model_id";
  for (int k = 0; k < n_labels_; ++k) out_ << ",p_" << k;
  out_ << '\n';
}

void StreamWriter::Write(const StreamStep& step) {
  char buf[32];
  for (std::size_t m = 0; m < step.probs.size(); ++m) {
    if (step.probs[m].size() != static_cast<std::size_t>(n_labels_)) {
      throw std::invalid_argument("StreamWriter: label count mismatch");
    }
    out_ << step.t << ',' << step.true_label << ',' << step.severity << ','
         << m;
    for (double v : step.probs[m].values()) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out_ << ',' << buf;
    }
    out_ << '\n';
  }
  if (!out_) throw std::runtime_error("StreamWriter: write failed");
}

StreamReader::StreamReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) {
    throw std::runtime_error("cannot open stream file: " + path.string());
  }
  std::string header;
  if (!std::getline(in_, header)) {
    throw std::runtime_error(path_.string() + ": empty stream file");
  }
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto fields = SplitCsv(header);
  static constexpr std::string_view kFixed[] = {"t", "true_label", "severity",
                                                "model_id"};
  if (fields.size() < 5) {
    throw std::runtime_error(path_.string() +
                             ": schema error: expected t,true_label,severity,"
                             "model_id,p_0,... header");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (fields[i] != kFixed[i]) {
      throw std::runtime_error(path_.string() + ": schema error: column " +
                               std::to_string(i) + " is '" +
                               std::string(fields[i]) + "', expected '" +
                               std::string(kFixed[i]) + "'");
    }
  }
  for (std::size_t i = 4; i < fields.size(); ++i) {
    if (fields[i] != "p_" + std::to_string(i - 4)) {
      throw std::runtime_error(path_.string() + ": schema error: column '" +
                               std::string(fields[i]) + "'");
    }
  }
  n_labels_ = static_cast<int>(fields.size() - 4);
}

std::optional<StreamReader::Row> StreamReader::ReadRow() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitCsv(line);
    auto fail = [&](const std::string& what) {
      return std::runtime_error(path_.string() + ":" +
                                std::to_string(line_no_) + ": " + what);
    };
    if (fields.size() != static_cast<std::size_t>(n_labels_) + 4) {
      throw fail("malformed row: " + std::to_string(fields.size()) +
                 " fields, expected " + std::to_string(n_labels_ + 4));
    }
    Row row;
    if (!ParseInt(fields[0], &row.t) || !ParseInt(fields[1], &row.true_label) ||
        !ParseInt(fields[2], &row.severity) ||
        !ParseInt(fields[3], &row.model_id)) {
      throw fail("malformed row: bad integer field");
    }
    if (row.true_label < 0 || row.true_label >= n_labels_) {
      throw fail("malformed row: true_label out of range");
    }
    row.probs.resize(static_cast<std::size_t>(n_labels_));
    double sum = 0.0;
    for (int k = 0; k < n_labels_; ++k) {
      if (!ParseDouble(fields[4 + k], &row.probs[k]) || row.probs[k] < 0.0) {
        throw fail("malformed row: bad probability p_" + std::to_string(k));
      }
      sum += row.probs[k];
    }
    if (std::abs(sum - 1.0) > 1e-4) {
      throw fail("simplex error: probabilities sum to " + std::to_string(sum));
    }
    return row;
  }
  return std::nullopt;
}

std::optional<StreamStep> StreamReader::Next() {
  std::optional<Row> first =
      lookahead_ ? std::exchange(lookahead_, std::nullopt) : ReadRow();
  if (!first) return std::nullopt;

  StreamStep step;
  step.t = first->t;
  step.true_label = first->true_label;
  step.severity = first->severity;
  int expected_model = 0;
  auto take = [&](Row& row) {
    if (row.model_id != expected_model) {
      throw std::runtime_error(path_.string() + ":" +
                               std::to_string(line_no_) +
                               ": model-count mismatch: expected model_id " +
                               std::to_string(expected_model));
    }
    if (row.true_label != step.true_label || row.severity != step.severity) {
      throw std::runtime_error(path_.string() + ":" +
                               std::to_string(line_no_) +
                               ": inconsistent true_label/severity within t");
    }
    step.probs.emplace_back(std::move(row.probs), 1e-4);
    ++expected_model;
  };
  take(*first);
  while (true) {
    std::optional<Row> row = ReadRow();
    if (!row) break;
    if (row->t != step.t) {
      if (row->t < step.t) {
        throw std::runtime_error(path_.string() + ":" +
                                 std::to_string(line_no_) +
                                 ": rows out of t order");
      }
      lookahead_ = std::move(row);
      break;
    }
    take(*row);
  }
  if (n_models_ < 0) n_models_ = expected_model;
  if (expected_model != n_models_) {
    throw std::runtime_error(path_.string() + ": model-count mismatch at t=" +
                             std::to_string(step.t) + ": " +
                             std::to_string(expected_model) + " models, " +
                             "expected " + std::to_string(n_models_));
  }
  return step;
}

void SaveStream(const std::filesystem::path& path, const StreamConfig& cfg) {
  cfg.Validate();
  StreamWriter writer(path, cfg.n_labels);
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    writer.Write(GenerateStep(cfg, t));
  }
}

std::vector<StreamStep> LoadStream(const std::filesystem::path& path) {
  StreamReader reader(path);
  std::vector<StreamStep> steps;
  while (auto step = reader.Next()) steps.push_back(std::move(*step));
  return steps;
}

StreamConfig DefaultStreamConfig(Schedule schedule, std::uint64_t seed) {
  StreamConfig cfg;
  cfg.schedule = schedule;
  cfg.master_seed = seed;
  for (int i = 0; i < 6; ++i) cfg.profiles.push_back({Quality::kHigh, 0.25, 1.0});
  cfg.profiles.push_back({Quality::kMedium, 0.25, 1.0});
  cfg.profiles.push_back({Quality::kLow, 0.25, 1.0});
  return cfg;
}

}  // namespace gmocp
