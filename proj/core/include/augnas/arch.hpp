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

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "augnas/tensor.hpp"

namespace augnas {

// Candidate operations on a cell edge.
enum class ArchOpId {
  kZero,
  kSkip,
  kSepConv3,
  kSepConv5,
  kDilConv3,
  kDilConv5,
  kMaxPool3,
  kAvgPool3,
};

std::string_view arch_op_name(ArchOpId id);
// Throws ValueError naming the token.
ArchOpId arch_op_by_name(std::string_view name);
// {zero, skip_connect, sep_conv_3x3, max_pool_3x3, avg_pool_3x3}
const std::vector<ArchOpId>& reduced_arch_op_set();
// All eight operations.
const std::vector<ArchOpId>& full_arch_op_set();

// Directed edge of a cell DAG. Nodes 0 and 1 are the cell inputs,
// intermediate node j is numbered j + 2.
struct Edge {
  int src;
  int dst;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Number of intermediate nodes of a cell with n_nodes total nodes
// (2 inputs + intermediates + 1 output).
int intermediate_nodes(int n_nodes);
// Dense edge list: every intermediate node reads every earlier node. Ordered
// by destination, then source.
std::vector<Edge> dense_edges(int n_nodes);

// Searchable cell: one alpha logit vector per dense edge.
struct CellSpec {
  int n_nodes = 6;
  std::vector<ArchOpId> op_set;
  std::vector<Tensor> alpha;
  bool is_reduction = false;

  CellSpec() = default;
  // Alpha initialized to zero.
  CellSpec(int n_nodes, std::vector<ArchOpId> op_set, bool is_reduction);
  std::vector<Edge> edges() const { return dense_edges(n_nodes); }
  friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

struct DiscreteEdge {
  ArchOpId op;
  int input;
  friend bool operator==(const DiscreteEdge&, const DiscreteEdge&) = default;
};

struct DiscreteCell {
  bool reduction = false;
  std::vector<std::array<DiscreteEdge, 2>> nodes;  // one entry per intermediate node
  friend bool operator==(const DiscreteCell&, const DiscreteCell&) = default;
};

// Cells of the searched network in order [normal, reduction].
using Genotype = std::vector<DiscreteCell>;

// Per edge the op with the largest softmax weight other than zero; per node
// the two edges whose chosen op weighs most. Ties go to the lower op index
// and the lower source node. Throws ValueError when every candidate is zero.
DiscreteCell discretize(const CellSpec& cell);
Genotype discretize(const std::vector<CellSpec>& cells);

std::string genotype_to_json(const Genotype& genotype);
// Throws ParseError with the byte offset, or naming an unknown op token.
Genotype genotype_from_json(std::string_view text);

// One row per edge: cell, src, dst, softmax(alpha) per op.
std::string alpha_csv(const std::vector<CellSpec>& cells);

// |F|^2 * prod_{k=1}^{N-3} k (k + 1) / 2. Throws ValueError for N < 4 or
// |F| < 1.
boost::multiprecision::cpp_int search_space_size(int n_nodes, int n_ops);

}  // namespace augnas
