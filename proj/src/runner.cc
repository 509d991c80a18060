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

#include "gmocp/runner.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "gmocp/rng.h"

namespace gmocp {
namespace {

using nlohmann::json;

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

template <typename T>
void Get(const json& obj, const char* key, T* out) {
  if (obj.contains(key) && !obj.at(key).is_null()) *out = obj.at(key).get<T>();
}

PolicyConfig ParsePolicyParams(const json& j) {
  PolicyConfig p;
  Get(j, "target_alpha", &p.target_alpha);
  Get(j, "eta", &p.eta);
  Get(j, "epsilon", &p.epsilon);
  Get(j, "beta", &p.beta);
  Get(j, "xi", &p.score.xi);
  Get(j, "k_reg", &p.score.k_reg);
  Get(j, "coma_gamma", &p.coma_gamma);
  Get(j, "aci_step", &p.aci_step);
  Get(j, "shared_u", &p.shared_u);
  Get(j, "record_all_alpha_bar", &p.record_all_alpha_bar);
  if (j.contains("initial_alpha") && !j.at("initial_alpha").is_null()) {
    p.initial_alpha = j.at("initial_alpha").get<double>();
  }
  int n_selective = 1;
  int max_links = 3;
  Get(j, "n_selective", &n_selective);
  Get(j, "max_links", &max_links);
  p.graph.n_selective = n_selective;
  p.graph.max_links = max_links;
  if (j.contains("eta_e") && j.at("eta_e").is_array()) {
    p.graph.eta_e = j.at("eta_e").get<std::vector<double>>();
  } else {
    double eta_e = 0.2;
    Get(j, "eta_e", &eta_e);
    p.graph.eta_e = DefaultEtaE(n_selective, eta_e);
  }
  return p;
}

StreamConfig ParseStream(const json& j) {
  StreamConfig s;
  std::string schedule = "sudden";
  Get(j, "schedule", &schedule);
  s = DefaultStreamConfig(ParseSchedule(schedule), 0);
  Get(j, "n_labels", &s.n_labels);
  Get(j, "horizon", &s.horizon);
  Get(j, "batch_size", &s.batch_size);
  Get(j, "master_seed", &s.master_seed);
  if (j.contains("signal")) {
    const json& sig = j.at("signal");
    Get(sig, "high", &s.signal.high);
    Get(sig, "medium", &s.signal.medium);
    Get(sig, "low", &s.signal.low);
  }
  if (j.contains("profiles")) {
    s.profiles.clear();
    for (const json& pj : j.at("profiles")) {
      ModelProfile p;
      std::string quality = "high";
      Get(pj, "quality", &quality);
      p.quality = ParseQuality(quality);
      Get(pj, "noise_scale", &p.noise_scale);
      Get(pj, "temperature", &p.temperature);
      int count = 1;
      Get(pj, "count", &count);
      for (int i = 0; i < count; ++i) s.profiles.push_back(p);
    }
  }
  return s;
}

using RowKey = std::tuple<std::string, int, int, std::uint64_t>;

RowKey KeyOf(const ResultRow& r) { return {r.policy, r.n, r.j, r.seed}; }

struct Prepared {
  ExperimentConfig cfg;
  std::vector<StreamStep> file_steps;
};

Prepared Prepare(const ExperimentConfig& in) {
  Prepared p{in, {}};
  if (p.cfg.stream_file) {
    p.file_steps = LoadStream(*p.cfg.stream_file);
    if (p.file_steps.empty()) {
      throw std::runtime_error("stream file has no steps: " +
                               p.cfg.stream_file->string());
    }
    p.cfg.policy_params.n_models =
        static_cast<int>(p.file_steps.front().probs.size());
    p.cfg.policy_params.score.n_labels =
        static_cast<int>(p.file_steps.front().probs.front().size());
  } else {
    p.cfg.policy_params.n_models = static_cast<int>(p.cfg.stream.profiles.size());
    p.cfg.policy_params.score.n_labels = p.cfg.stream.n_labels;
  }
  p.cfg.Validate();
  return p;
}

std::vector<ResultRow> RunPrepared(const Prepared& p,
                                   const std::filesystem::path& results_path,
                                   const std::set<RowKey>& done) {
  const ExperimentConfig& cfg = p.cfg;
  std::vector<ResultRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    ResultRow row;
    row.policy = std::string(PolicyName(cfg.policy));
    row.n = cfg.policy_params.graph.max_links;
    row.j = cfg.policy_params.graph.n_selective;
    row.seed = seed;
    if (done.contains(KeyOf(row))) continue;

    const std::vector<StepRecord> records =
        cfg.stream_file
            ? RunPolicy(cfg.policy, cfg.policy_params, p.file_steps, seed)
            : RunPolicy(cfg.policy, cfg.policy_params, cfg.stream, seed);
    const RunMetrics m = ComputeMetrics(records, cfg.metrics);
    row.coverage = m.coverage_pct;
    row.avg_width = m.avg_width;
    row.single_width = m.single_width_pct;
    row.runtime = m.runtime_secs;
    row.width_under_k = m.width_under_k_pct;

    std::ofstream out(results_path, std::ios::app | std::ios::binary);
    out << FormatResultRow(row) << '\n';
    out.flush();
    if (!out) {
      throw std::runtime_error("failed to append to " + results_path.string());
    }
    if (cfg.trace) {
      WriteTrace(cfg.output / ("trace_" + cfg.Id() + "_seed" +
                               std::to_string(seed) + ".csv"),
                 records);
    }
    rows.push_back(row);
  }
  return rows;
}

std::set<RowKey> StartResults(const std::filesystem::path& dir, bool resume) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / "results.csv";
  std::set<RowKey> done;
  if (resume && std::filesystem::exists(path)) {
    for (const ResultRow& r : ReadResults(path)) done.insert(KeyOf(r));
    return done;
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << ResultCsvHeader() << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return done;
}

void FinishSummary(const std::filesystem::path& dir) {
  std::ofstream out(dir / "summary.json", std::ios::trunc | std::ios::binary);
  out << SummaryJson(ReadResults(dir / "results.csv")) << '\n';
}

}  // namespace

std::vector<double> DefaultEtaE(int n_selective, double fallback) {
  if (n_selective == 2) return {0.2, 0.8};
  if (n_selective == 4) return {0.1, 0.2, 0.3, 0.4};
  return std::vector<double>(static_cast<std::size_t>(std::max(n_selective, 0)),
                             fallback);
}

void ExperimentConfig::Validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: seeds is empty");
  if (!stream_file) {
    stream.Validate();
    if (policy_params.n_models != static_cast<int>(stream.profiles.size())) {
      throw std::invalid_argument("config: n_models does not match stream");
    }
  }
  policy_params.Validate();
}

std::string ExperimentConfig::Id() const {
  return std::string(PolicyName(policy)) + "_N" +
         std::to_string(policy_params.graph.max_links) + "_J" +
         std::to_string(policy_params.graph.n_selective);
}

ExperimentConfig ParseExperimentConfig(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    std::string policy = "gmocp";
    Get(j, "policy", &policy);
    cfg.policy = ParsePolicyKind(policy);
    cfg.policy_params =
        ParsePolicyParams(j.contains("policy_params") ? j.at("policy_params")
                                                      : json::object());
    cfg.stream = ParseStream(j.contains("stream") ? j.at("stream")
                                                  : json::object());
    if (j.contains("stream_file")) {
      cfg.stream_file = j.at("stream_file").get<std::string>();
    }
    Get(j, "seeds", &cfg.seeds);
    std::string output = cfg.output.string();
    Get(j, "output", &output);
    cfg.output = output;
    Get(j, "trace", &cfg.trace);
    if (j.contains("metrics")) {
      const json& mj = j.at("metrics");
      Get(mj, "window", &cfg.metrics.window);
      Get(mj, "width_cap", &cfg.metrics.width_cap);
      Get(mj, "overlapping_windows", &cfg.metrics.overlapping_windows);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.policy_params.n_models = static_cast<int>(cfg.stream.profiles.size());
  cfg.policy_params.score.n_labels = cfg.stream.n_labels;
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return ParseExperimentConfig(text);
}

StreamConfig StreamForSeed(const StreamConfig& base, std::uint64_t seed) {
  StreamConfig s = base;
  s.master_seed = Mix64(base.master_seed ^ Mix64(seed ^ 0x5eedULL));
  return s;
}

std::vector<StepRecord> RunPolicy(PolicyKind kind, const PolicyConfig& cfg,
                                  const std::vector<StreamStep>& stream,
                                  std::uint64_t seed) {
  auto policy = MakePolicy(kind, cfg, seed);
  std::vector<StepRecord> records;
  records.reserve(stream.size());
  for (const StreamStep& step : stream) {
    records.push_back(policy->Step(step).record);
  }
  return records;
}

std::vector<StepRecord> RunPolicy(PolicyKind kind, const PolicyConfig& cfg,
                                  const StreamConfig& stream,
                                  std::uint64_t seed) {
  const StreamConfig s = StreamForSeed(stream, seed);
  auto policy = MakePolicy(kind, cfg, seed);
  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(s.horizon));
  for (std::int64_t t = 1; t <= s.horizon; ++t) {
    records.push_back(policy->Step(GenerateStep(s, t)).record);
  }
  return records;
}

std::vector<ResultRow> RunExperiment(const ExperimentConfig& cfg,
                                     const RunOptions& options) {
  const Prepared prepared = Prepare(cfg);
  const std::set<RowKey> done = StartResults(cfg.output, options.resume);
  std::vector<ResultRow> rows =
      RunPrepared(prepared, cfg.output / "results.csv", done);
  FinishSummary(cfg.output);
  return rows;
}

SweepGrid ParseGrid(const std::vector<std::string>& specs) {
  SweepGrid grid;
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw std::invalid_argument("grid: expected KEY=v1,v2,... got '" + spec +
                                  "'");
    }
    std::string key = spec.substr(0, eq);
    if (key != "N" && key != "J" && key != "policy") {
      throw std::invalid_argument("grid: unknown axis '" + key + "'");
    }
    std::vector<std::string> values;
    std::stringstream ss(spec.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');) {
      if (!v.empty()) values.push_back(v);
    }
    grid.emplace_back(std::move(key), std::move(values));
  }
  return grid;
}

std::vector<ResultRow> RunSweep(const ExperimentConfig& base,
                                const SweepGrid& grid,
                                const RunOptions& options) {
  std::vector<ExperimentConfig> configs{base};
  for (const auto& [key, values] : grid) {
    std::vector<ExperimentConfig> next;
    for (const ExperimentConfig& c : configs) {
      for (const std::string& v : values) {
        ExperimentConfig e = c;
        if (key == "policy") {
          e.policy = ParsePolicyKind(v);
        } else {
          const int value = std::stoi(v);
          if (key == "N") {
            e.policy_params.graph.max_links = value;
          } else {
            GraphParams& g = e.policy_params.graph;
            if (static_cast<int>(g.eta_e.size()) != value) {
              g.eta_e = DefaultEtaE(value, g.eta_e.empty() ? 0.2 : g.eta_e[0]);
            }
            g.n_selective = value;
          }
        }
        next.push_back(std::move(e));
      }
    }
    configs = std::move(next);
  }

  const std::set<RowKey> done = StartResults(base.output, options.resume);
  std::vector<ResultRow> rows;
  for (const ExperimentConfig& c : configs) {
    const Prepared prepared = Prepare(c);
    std::vector<ResultRow> r =
        RunPrepared(prepared, base.output / "results.csv", done);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  FinishSummary(base.output);
  return rows;
}

std::string ResultCsvHeader() {
  return "policy,N,J,seed,coverage,avg_width,single_width,runtime,"
         "width_under_k";
}

std::string FormatResultRow(const ResultRow& r) {
  return r.policy + ',' + std::to_string(r.n) + ',' + std::to_string(r.j) +
         ',' + std::to_string(r.seed) + ',' + Fmt(r.coverage) + ',' +
         Fmt(r.avg_width) + ',' + Fmt(r.single_width) + ',' + Fmt(r.runtime) +
         ',' + Fmt(r.width_under_k);
}

std::vector<ResultRow> ReadResults(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != ResultCsvHeader()) {
    throw std::runtime_error(path.string() + ": unexpected results header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    for (std::string v; std::getline(ss, v, ',');) f.push_back(v);
    if (f.size() != 9) {
      throw std::runtime_error(path.string() + ": malformed results row");
    }
    ResultRow r;
    r.policy = f[0];
    r.n = std::stoi(f[1]);
    r.j = std::stoi(f[2]);
    r.seed = std::stoull(f[3]);
    r.coverage = std::stod(f[4]);
    r.avg_width = std::stod(f[5]);
    r.single_width = std::stod(f[6]);
    r.runtime = std::stod(f[7]);
    r.width_under_k = std::stod(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string SummaryJson(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    groups[r.policy + "_N" + std::to_string(r.n) + "_J" + std::to_string(r.j)]
        .push_back(&r);
  }
  json out = json::object();
  for (const auto& [id, members] : groups) {
    auto stat = [&](double ResultRow::*field) {
      double mean = 0.0;
      for (const ResultRow* r : members) mean += r->*field;
      mean /= static_cast<double>(members.size());
      double var = 0.0;
      for (const ResultRow* r : members) {
        var += (r->*field - mean) * (r->*field - mean);
      }
      const double sd =
          members.size() > 1
              ? std::sqrt(var / static_cast<double>(members.size() - 1))
              : 0.0;
      return json{{"mean", mean}, {"std", sd}};
    };
    out[id] = {{"coverage", stat(&ResultRow::coverage)},
               {"avg_width", stat(&ResultRow::avg_width)},
               {"single_width", stat(&ResultRow::single_width)},
               {"runtime", stat(&ResultRow::runtime)},
               {"width_under_k", stat(&ResultRow::width_under_k)},
               {"seeds", members.size()}};
  }
  return out.dump(2);
}

void WriteTrace(const std::filesystem::path& path,
                const std::vector<StepRecord>& records) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,node,chosen_model,subset,set_size,err,chosen_loss,"
         "chosen_alpha_bar\n";
  for (const StepRecord& r : records) {
    out << r.t << ',' << r.node << ',' << r.chosen_model << ',';
    for (std::size_t i = 0; i < r.subset.size(); ++i) {
      if (i) out << ';';
      out << r.subset[i];
    }
    out << ',' << r.set_size << ',' << r.err << ',' << Fmt(r.chosen_loss)
        << ',' << Fmt(r.chosen_alpha_bar) << '\n';
  }
}

}  // namespace gmocp
