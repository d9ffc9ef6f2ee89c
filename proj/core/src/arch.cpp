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

#include "augnas/arch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "augnas/error.hpp"

namespace augnas {

namespace {

constexpr std::array<std::string_view, 8> kNames = {
    "zero",         "skip_connect", "sep_conv_3x3", "sep_conv_5x5",
    "dil_conv_3x3", "dil_conv_5x5", "max_pool_3x3", "avg_pool_3x3",
};

std::vector<double> softmax_of(const Tensor& logits) {
  const auto v = logits.values();
  double hi = -INFINITY;
  for (float x : v) hi = std::max(hi, static_cast<double>(x));
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(static_cast<double>(v[i]) - hi);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace

std::string_view arch_op_name(ArchOpId id) { return kNames.at(static_cast<std::size_t>(id)); }

ArchOpId arch_op_by_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ArchOpId>(i);
  }
  throw ValueError("unknown architecture op '" + std::string(name) + "'");
}

const std::vector<ArchOpId>& reduced_arch_op_set() {
  static const std::vector<ArchOpId> ops = {ArchOpId::kZero, ArchOpId::kSkip, ArchOpId::kSepConv3,
                                            ArchOpId::kMaxPool3, ArchOpId::kAvgPool3};
  return ops;
}

const std::vector<ArchOpId>& full_arch_op_set() {
  static const std::vector<ArchOpId> ops = [] {
    std::vector<ArchOpId> all;
    for (std::size_t i = 0; i < kNames.size(); ++i) all.push_back(static_cast<ArchOpId>(i));
    return all;
  }();
  return ops;
}

int intermediate_nodes(int n_nodes) {
  if (n_nodes < 4) {
    throw ValueError("cell needs at least 4 nodes, got " + std::to_string(n_nodes));
  }
  return n_nodes - 3;
}

std::vector<Edge> dense_edges(int n_nodes) {
  std::vector<Edge> edges;
  const int inner = intermediate_nodes(n_nodes);
  for (int j = 0; j < inner; ++j) {
    for (int i = 0; i < j + 2; ++i) edges.push_back({i, j + 2});
  }
  return edges;
}

CellSpec::CellSpec(int n, std::vector<ArchOpId> ops, bool reduction)
    : n_nodes(n), op_set(std::move(ops)), is_reduction(reduction) {
  if (op_set.empty()) throw ValueError("cell op set is empty");
  const auto n_edges = dense_edges(n_nodes).size();
  alpha.assign(n_edges, Tensor(Shape{static_cast<std::int64_t>(op_set.size())}, 0.0f));
}

DiscreteCell discretize(const CellSpec& cell) {
  const auto edges = cell.edges();
  if (cell.alpha.size() != edges.size()) {
    throw ShapeError("discretize: " + std::to_string(cell.alpha.size()) + " alpha rows for " +
                     std::to_string(edges.size()) + " edges");
  }
  struct Choice {
    ArchOpId op;
    double weight;
  };
  std::vector<Choice> best(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (cell.alpha[e].numel() != cell.op_set.size()) {
      throw ShapeError("discretize: alpha row " + std::to_string(e) + " has shape " +
                       shape_to_string(cell.alpha[e].shape()));
    }
    const auto w = softmax_of(cell.alpha[e]);
    int arg = -1;
    for (std::size_t f = 0; f < w.size(); ++f) {
      if (cell.op_set[f] == ArchOpId::kZero) continue;
      if (arg < 0 || w[f] > w[static_cast<std::size_t>(arg)]) arg = static_cast<int>(f);
    }
    if (arg < 0) throw ValueError("discretize: op set has no non-zero operation");
    best[e] = {cell.op_set[static_cast<std::size_t>(arg)], w[static_cast<std::size_t>(arg)]};
  }
  DiscreteCell out;
  out.reduction = cell.is_reduction;
  std::size_t first = 0;
  for (int j = 0; j < intermediate_nodes(cell.n_nodes); ++j) {
    const std::size_t count = static_cast<std::size_t>(j + 2);
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = first + i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return best[a].weight > best[b].weight;
    });
    std::array<std::size_t, 2> keep = {std::min(order[0], order[1]), std::max(order[0], order[1])};
    out.nodes.push_back({DiscreteEdge{best[keep[0]].op, edges[keep[0]].src},
                         DiscreteEdge{best[keep[1]].op, edges[keep[1]].src}});
    first += count;
  }
  return out;
}

Genotype discretize(const std::vector<CellSpec>& cells) {
  Genotype out;
  for (const auto& c : cells) out.push_back(discretize(c));
  return out;
}

std::string genotype_to_json(const Genotype& genotype) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& cell : genotype) {
    json nodes = json::array();
    for (const auto& node : cell.nodes) {
      json pair = json::array();
      for (const auto& e : node) {
        pair.push_back({{"op", std::string(arch_op_name(e.op))}, {"input", e.input}});
      }
      nodes.push_back(pair);
    }
    cells.push_back({{"reduction", cell.reduction}, {"nodes", nodes}});
  }
  return json{{"cells", cells}}.dump(1) + "\n";
}

Genotype genotype_from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("genotype: malformed JSON at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
  if (!doc.is_object() || !doc.contains("cells") || !doc["cells"].is_array()) {
    throw ParseError("genotype: expected an object with a 'cells' array");
  }
  Genotype out;
  for (std::size_t c = 0; c < doc["cells"].size(); ++c) {
    const json& cell = doc["cells"][c];
    const std::string where = "genotype: cells[" + std::to_string(c) + "]";
    if (!cell.is_object() || !cell.contains("reduction") || !cell["reduction"].is_boolean() ||
        !cell.contains("nodes") || !cell["nodes"].is_array()) {
      throw ParseError(where + ": expected {reduction: bool, nodes: [...]}");
    }
    DiscreteCell dc;
    dc.reduction = cell["reduction"].get<bool>();
    for (std::size_t j = 0; j < cell["nodes"].size(); ++j) {
      const json& node = cell["nodes"][j];
      const std::string nwhere = where + ".nodes[" + std::to_string(j) + "]";
      if (!node.is_array() || node.size() != 2) {
        throw ParseError(nwhere + ": expected exactly 2 edges");
      }
      std::array<DiscreteEdge, 2> pair{};
      for (std::size_t k = 0; k < 2; ++k) {
        const json& e = node[k];
        if (!e.is_object() || !e.contains("op") || !e["op"].is_string() ||
            !e.contains("input") || !e["input"].is_number_integer()) {
          throw ParseError(nwhere + ": edge needs string 'op' and integer 'input'");
        }
        const auto name = e["op"].get<std::string>();
        try {
          pair[k].op = arch_op_by_name(name);
        } catch (const ValueError&) {
          throw ParseError(nwhere + ": unknown op '" + name + "'");
        }
        pair[k].input = e["input"].get<int>();
        if (pair[k].input < 0 || pair[k].input >= static_cast<int>(j) + 2) {
          throw ParseError(nwhere + ": input " + std::to_string(pair[k].input) +
                           " is not an earlier node");
        }
      }
      dc.nodes.push_back(pair);
    }
    out.push_back(std::move(dc));
  }
  return out;
}

std::string alpha_csv(const std::vector<CellSpec>& cells) {
  std::ostringstream out;
  out << "cell,src,dst";
  if (!cells.empty()) {
    for (auto id : cells.front().op_set) out << ',' << arch_op_name(id);
  }
  out << '\n';
  char buf[32];
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto edges = cells[c].edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out << c << ',' << edges[e].src << ',' << edges[e].dst;
      for (double w : softmax_of(cells[c].alpha.at(e))) {
        std::snprintf(buf, sizeof buf, "%.9g", w);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

boost::multiprecision::cpp_int search_space_size(int n_nodes, int n_ops) {
  if (n_nodes < 4) {
    throw ValueError("search_space_size: N must be >= 4, got " + std::to_string(n_nodes));
  }
  if (n_ops < 1) {
    throw ValueError("search_space_size: |F| must be >= 1, got " + std::to_string(n_ops));
  }
  boost::multiprecision::cpp_int count = n_ops;
  count *= n_ops;
  for (int k = 1; k <= n_nodes - 3; ++k) count *= k * (k + 1) / 2;
  return count;
}

}  // namespace augnas
