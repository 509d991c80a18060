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

#include "gmocp/graph.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gmocp {

GraphParams GraphParams::Uniform(int n_selective, int max_links,
                                 double eta_e) {
  GraphParams p;
  p.n_selective = n_selective;
  p.max_links = max_links;
  p.eta_e.assign(static_cast<std::size_t>(std::max(n_selective, 0)), eta_e);
  return p;
}

void GraphParams::Validate() const {
  if (n_selective < 1) throw std::invalid_argument("GraphParams: J < 1");
  if (max_links < 1) throw std::invalid_argument("GraphParams: N < 1");
  if (eta_e.size() != static_cast<std::size_t>(n_selective)) {
    throw std::invalid_argument("GraphParams: eta_e has " +
                                std::to_string(eta_e.size()) +
                                " entries, expected J = " +
                                std::to_string(n_selective));
  }
  for (double e : eta_e) {
    if (!(e > 0.0 && e <= 1.0)) {
      throw std::invalid_argument("GraphParams: eta_e outside (0, 1]");
    }
  }
}

std::vector<double> ConnectionPmf(std::span<const double> weights,
                                  double eta_e) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw std::invalid_argument("ConnectionPmf: weights sum to zero");
  }
  const double m = static_cast<double>(weights.size());
  std::vector<double> pmf(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    pmf[i] = (1.0 - eta_e) * weights[i] / total + eta_e / m;
  }
  return pmf;
}

FeedbackGraph GenerateGraph(std::span<const double> weights,
                            const GraphParams& params, Rng& rng) {
  const int n_models = static_cast<int>(weights.size());
  FeedbackGraph g;
  g.n_nodes = params.n_selective;
  g.n_models = n_models;
  g.adjacency.assign(static_cast<std::size_t>(g.n_nodes) * n_models, 0);
  g.connect_pmf.reserve(static_cast<std::size_t>(g.n_nodes));

  // Nodes sharing an exploration coefficient share the PMF.
  for (int j = 0; j < g.n_nodes; ++j) {
    if (j > 0 && params.eta_e[j] == params.eta_e[j - 1]) {
      g.connect_pmf.push_back(g.connect_pmf.back());
    } else {
      g.connect_pmf.push_back(ConnectionPmf(weights, params.eta_e[j]));
    }
  }

  g.node_weights.assign(static_cast<std::size_t>(g.n_nodes), 0.0);
  double node_total = 0.0;
  for (int j = 0; j < g.n_nodes; ++j) {
    std::uint8_t* row = &g.adjacency[static_cast<std::size_t>(j) * n_models];
    for (int n = 0; n < params.max_links; ++n) {
      row[rng.Categorical(g.connect_pmf[j])] = 1;
    }
    for (int m = 0; m < n_models; ++m) {
      if (row[m]) g.node_weights[j] += weights[m];
    }
    node_total += g.node_weights[j];
  }

  g.node_pmf.resize(g.node_weights.size());
  for (int j = 0; j < g.n_nodes; ++j) {
    g.node_pmf[j] = g.node_weights[j] / node_total;
  }

  g.inclusion_prob.assign(static_cast<std::size_t>(n_models), 0.0);
  for (int j = 0; j < g.n_nodes; ++j) {
    for (int m = 0; m < n_models; ++m) {
      const double miss = std::pow(1.0 - g.connect_pmf[j][m], params.max_links);
      g.inclusion_prob[m] += g.node_pmf[j] * (1.0 - miss);
    }
  }
  return g;
}

int SelectNode(const FeedbackGraph& graph, Rng& rng) {
  if (graph.n_nodes == 1) return 0;
  return static_cast<int>(rng.Categorical(graph.node_pmf));
}

std::vector<int> EffectiveSubset(const FeedbackGraph& graph, int node) {
  std::vector<int> subset;
  for (int m = 0; m < graph.n_models; ++m) {
    if (graph.Connected(node, m)) subset.push_back(m);
  }
  return subset;
}

}  // namespace gmocp
