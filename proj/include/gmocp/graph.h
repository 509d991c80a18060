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

#ifndef GMOCP_GRAPH_H_
#define GMOCP_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmocp/rng.h"

namespace gmocp {

struct GraphParams {
  int n_selective = 1;          // J
  int max_links = 1;            // N
  std::vector<double> eta_e{1.0};  // one exploration coefficient per node

  // J copies of a scalar exploration coefficient.
  static GraphParams Uniform(int n_selective, int max_links, double eta_e);

  void Validate() const;
};

// Bipartite graph between J selective nodes and M model nodes for one step.
struct FeedbackGraph {
  int n_nodes = 0;
  int n_models = 0;
  std::vector<std::uint8_t> adjacency;           // J x M, row-major
  std::vector<std::vector<double>> connect_pmf;  // per node, length M
  std::vector<double> node_weights;              // u^j
  std::vector<double> node_pmf;                  // p'^j
  std::vector<double> inclusion_prob;            // q^m

  bool Connected(int node, int model) const {
    return adjacency[static_cast<std::size_t>(node) * n_models + model] != 0;
  }
};

// (1 - eta_e) * w / sum(w) + eta_e / M.
std::vector<double> ConnectionPmf(std::span<const double> weights,
                                  double eta_e);

// Each node draws N model indices i.i.d. from its connection PMF; repeated
// draws collapse into one edge. Node weights are the summed weights of the
// connected models, and q^m = sum_j p'^j (1 - (1 - p^{m,j})^N) with the
// node-specific connection PMF.
FeedbackGraph GenerateGraph(std::span<const double> weights,
                            const GraphParams& params, Rng& rng);

int SelectNode(const FeedbackGraph& graph, Rng& rng);

// Models connected to `node`, ascending.
std::vector<int> EffectiveSubset(const FeedbackGraph& graph, int node);

}  // namespace gmocp

#endif  // GMOCP_GRAPH_H_
