/* Copyright 2026 The augnas Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "augnas/arch.hpp"
#include "augnas/ops.hpp"
#include "augnas/rng.hpp"

namespace augnas {

struct NetworkConfig {
  int n_cells = 4;
  int n_nodes = 6;
  int init_channels = 16;
  int in_channels = 3;
  int n_classes = 10;
  int stem_multiplier = 3;
  std::vector<int> reduction_positions = {2};

  // Throws ValueError on inconsistent values.
  void validate() const;
};

// Named parameter buffers of an assembled network, in construction order.
struct NetworkWeights {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  std::size_t add(std::string name, Tensor value);
  std::size_t size() const { return values.size(); }
  std::vector<Tensor*> parameters();
  friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;
};

// Named tensors in a versioned binary file. load_weights throws ParseError on
// corrupt files.
void save_weights(const std::filesystem::path& path, const NetworkWeights& weights);
NetworkWeights load_weights(const std::filesystem::path& path);

// One leaf per tensor, in order.
std::vector<Var> bind_tensors(Tape& tape, std::span<const Tensor> values, bool requires_grad);

// An instantiated candidate operation with the indices of its parameters.
struct ArchOp {
  ArchOpId id;
  int stride = 1;
  std::vector<std::size_t> params;
};

// Creates the parameters of `id` at `channels` channels. Convolutions use
// uniform(+-sqrt(3 / fan_in)) initialization, batch-norm gamma 1 and beta 0.
ArchOp make_arch_op(ArchOpId id, int channels, int stride, const std::string& prefix,
                    NetworkWeights& weights, Rng& rng);
Var arch_op_forward(const ArchOp& op, Var x, std::span<const Var> w);

// sum_f softmax(alpha)_f * op_f(x).
Var mixed_op_forward(Var x, Var alpha, std::span<const ArchOp> ops, std::span<const Var> w);

// Evaluates a cell DAG over already preprocessed inputs: every intermediate
// node is the sum of `edge(e, state[src])` over its incoming edges; the result
// concatenates the intermediate nodes along channels.
Var cell_dag_forward(Var s0, Var s1, int n_intermediate, std::span<const Edge> edges,
                     const std::function<Var(std::size_t, Var)>& edge);

// Stem, stacked cells, global average pooling and a linear classifier.
// A search network mixes every candidate op on every edge; a discrete
// network runs the genotype's chosen ops only.
class Network {
 public:
  // Builds weights and zero-mean alpha (1e-3 * N(0, 1)) for [normal, reduction] cells.
  static Network search(const NetworkConfig& config, const std::vector<ArchOpId>& op_set,
                        Rng& rng);
  // Genotype must hold [normal, reduction] cells matching config.n_nodes.
  static Network discrete(const NetworkConfig& config, const Genotype& genotype, Rng& rng);

  const NetworkConfig& config() const { return config_; }
  bool is_search() const { return search_; }
  NetworkWeights& weights() { return weights_; }
  const NetworkWeights& weights() const { return weights_; }
  std::vector<CellSpec>& cells() { return cells_; }
  const std::vector<CellSpec>& cells() const { return cells_; }
  // Alpha tensors in (cell spec, edge) order.
  std::vector<Tensor*> alpha_parameters();
  std::vector<const Tensor*> alpha_parameters() const;

  // w: one Var per weight; alpha: one Var per alpha row (empty for a
  // discrete network). Throws NumericalError on non-finite logits.
  Var forward(Var x, std::span<const Var> w, std::span<const Var> alpha) const;

 private:
  struct Cell {
    bool reduction = false;
    ArchOp pre0;
    ArchOp pre1;
    std::vector<Edge> edges;
    std::vector<std::vector<ArchOp>> ops;  // per edge
  };

  Network() = default;
  void build(const NetworkConfig& config, const std::vector<ArchOpId>* op_set,
             const Genotype* genotype, Rng& rng);

  NetworkConfig config_;
  bool search_ = false;
  NetworkWeights weights_;
  std::vector<CellSpec> cells_;
  std::size_t stem_w_ = 0, stem_gamma_ = 0, stem_beta_ = 0;
  std::size_t fc_w_ = 0, fc_b_ = 0;
  std::vector<Cell> stack_;
};

}  // namespace augnas
