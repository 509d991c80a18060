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

// Command-line driver: experiments, sweeps, oracle checks and stream export.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmocp/oracles.h"
#include "gmocp/runner.h"
#include "gmocp/streams.h"

namespace {

void PrintRows(const std::vector<gmocp::ResultRow>& rows) {
  std::cout << gmocp::ResultCsvHeader() << '\n';
  for (const auto& r : rows) std::cout << gmocp::FormatResultRow(r) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-structured multi-model online conformal prediction"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", config_path, "JSON config")->required();
  run->add_flag("--resume", resume, "Skip (config, seed) rows already saved");
  bool run_trace = false;
  run->add_flag("--trace", run_trace, "Write per-step trace CSVs");

  auto* sweep = app.add_subcommand("sweep", "Run a grid of configs");
  std::vector<std::string> grid;
  sweep->add_option("--config", config_path, "JSON config")->required();
  sweep->add_option("--grid", grid, "Axes, e.g. N=1,3,5 J=1,2,4 policy=gmocp")
      ->required();
  sweep->add_flag("--resume", resume, "Skip (config, seed) rows already saved");
  bool sweep_trace = false;
  sweep->add_flag("--trace", sweep_trace, "Write per-step trace CSVs");

  auto* oracle = app.add_subcommand("oracle", "Cross-check against an oracle");
  std::string oracle_name;
  std::size_t instances = 1000;
  std::uint64_t oracle_seed = 7;
  oracle->add_option("name", oracle_name,
                     "quantile | alpha_bar | inclusion_prob | "
                     "loss_unbiasedness | regret_grid")
      ->required();
  oracle->add_option("--instances", instances, "Randomized instances");
  oracle->add_option("--seed", oracle_seed, "Instance seed");

  auto* gen = app.add_subcommand("gen-stream", "Write a synthetic stream CSV");
  std::string out_path;
  std::uint64_t gen_seed = 1;
  gen->add_option("--config", config_path, "JSON config")->required();
  gen->add_option("--out", out_path, "Output CSV")->required();
  gen->add_option("--seed", gen_seed, "Run seed selecting the realization");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = gmocp::LoadExperimentConfig(config_path);
      cfg.trace = cfg.trace || run_trace;
      PrintRows(gmocp::RunExperiment(cfg, {resume}));
    } else if (*sweep) {
      auto cfg = gmocp::LoadExperimentConfig(config_path);
      cfg.trace = cfg.trace || sweep_trace;
      PrintRows(gmocp::RunSweep(cfg, gmocp::ParseGrid(grid), {resume}));
    } else if (*oracle) {
      const auto r = gmocp::oracle::Run(oracle_name, oracle_seed, instances);
      std::printf("%s instances=%zu max_deviation=%.6g tolerance=%.6g "
                  "seconds=%.2f %s\n",
                  r.name.c_str(), r.instances, r.max_deviation, r.tolerance,
                  r.seconds, r.passed ? "PASS" : "FAIL");
      return r.passed ? 0 : 1;
    } else if (*gen) {
      const auto cfg = gmocp::LoadExperimentConfig(config_path);
      gmocp::SaveStream(out_path, gmocp::StreamForSeed(cfg.stream, gen_seed));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
