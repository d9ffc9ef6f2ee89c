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

#include "augnas/network.hpp"

#include <algorithm>
#include <cmath>

#include "augnas/error.hpp"

namespace augnas {

namespace {

Tensor uniform_fan_in(Shape shape, std::int64_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (float& v : t.values()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
  return t;
}

std::size_t add_conv(NetworkWeights& w, const std::string& name, std::int64_t cout,
                     std::int64_t cin, std::int64_t k, Rng& rng) {
  return w.add(name, uniform_fan_in({cout, cin, k, k}, cin * k * k, rng));
}

std::size_t add_depthwise(NetworkWeights& w, const std::string& name, std::int64_t c,
                          std::int64_t k, Rng& rng) {
  return w.add(name, uniform_fan_in({c, 1, k, k}, k * k, rng));
}

void add_bn(NetworkWeights& w, const std::string& name, std::int64_t c,
            std::vector<std::size_t>& params) {
  params.push_back(w.add(name + ".gamma", Tensor(Shape{c}, 1.0f)));
  params.push_back(w.add(name + ".beta", Tensor(Shape{c}, 0.0f)));
}

// ReLU, 1x1 convolution, batch norm. Represented as a skip op with
// parameters; a parameterless skip is the identity.
ArchOp make_relu_conv_bn(std::int64_t cin, std::int64_t cout, int stride,
                         const std::string& prefix, NetworkWeights& w, Rng& rng) {
  ArchOp op{ArchOpId::kSkip, stride, {}};
  op.params.push_back(add_conv(w, prefix + ".conv", cout, cin, 1, rng));
  add_bn(w, prefix + ".bn", cout, op.params);
  return op;
}

Var bn(Var x, std::span<const Var> w, const std::vector<std::size_t>& p, std::size_t at) {
  return batch_norm(x, w[p[at]], w[p[at + 1]]);
}

int kernel_of(ArchOpId id) {
  return id == ArchOpId::kSepConv5 || id == ArchOpId::kDilConv5 ? 5 : 3;
}

}  // namespace

void NetworkConfig::validate() const {
  if (n_cells < 1) throw ValueError("n_cells must be >= 1");
  if (n_nodes < 4) throw ValueError("n_nodes must be >= 4");
  if (init_channels < 1) throw ValueError("init_channels must be >= 1");
  if (in_channels < 1) throw ValueError("in_channels must be >= 1");
  if (n_classes < 2) throw ValueError("n_classes must be >= 2");
  if (stem_multiplier < 1) throw ValueError("stem_multiplier must be >= 1");
  for (int r : reduction_positions) {
    if (r < 0 || r >= n_cells) {
      throw ValueError("reduction position " + std::to_string(r) + " outside [0, " +
                       std::to_string(n_cells) + ")");
    }
  }
}

std::size_t NetworkWeights::add(std::string name, Tensor value) {
  names.push_back(std::move(name));
  values.push_back(std::move(value));
  return values.size() - 1;
}

std::vector<Tensor*> NetworkWeights::parameters() {
  std::vector<Tensor*> out;
  for (auto& v : values) out.push_back(&v);
  return out;
}

std::vector<Var> bind_tensors(Tape& tape, std::span<const Tensor> values, bool requires_grad) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(tape.leaf(v, requires_grad));
  return out;
}

ArchOp make_arch_op(ArchOpId id, int channels, int stride, const std::string& prefix,
                    NetworkWeights& w, Rng& rng) {
  const std::int64_t c = channels;
  ArchOp op{id, stride, {}};
  switch (id) {
    case ArchOpId::kZero:
      break;
    case ArchOpId::kSkip:
      if (stride != 1) return make_relu_conv_bn(c, c, stride, prefix, w, rng);
      break;
    case ArchOpId::kSepConv3:
    case ArchOpId::kSepConv5: {
      const int k = kernel_of(id);
      for (int half = 1; half <= 2; ++half) {
        const std::string p = prefix + "." + std::to_string(half);
        op.params.push_back(add_depthwise(w, p + ".dw", c, k, rng));
        op.params.push_back(add_conv(w, p + ".pw", c, c, 1, rng));
        add_bn(w, p + ".bn", c, op.params);
      }
      break;
    }
    case ArchOpId::kDilConv3:
    case ArchOpId::kDilConv5: {
      const int k = kernel_of(id);
      op.params.push_back(add_depthwise(w, prefix + ".dw", c, k, rng));
      op.params.push_back(add_conv(w, prefix + ".pw", c, c, 1, rng));
      add_bn(w, prefix + ".bn", c, op.params);
      break;
    }
    case ArchOpId::kMaxPool3:
    case ArchOpId::kAvgPool3:
      add_bn(w, prefix + ".bn", c, op.params);
      break;
  }
  return op;
}

Var arch_op_forward(const ArchOp& op, Var x, std::span<const Var> w) {
  const auto& p = op.params;
  switch (op.id) {
    case ArchOpId::kZero: {
      Shape shape = x.shape();
      if (op.stride != 1) {
        shape[2] = (shape[2] - 1) / op.stride + 1;
        shape[3] = (shape[3] - 1) / op.stride + 1;
      }
      return x.tape().constant(Tensor(std::move(shape), 0.0f));
    }
    case ArchOpId::kSkip:
      if (p.empty()) return x;
      return bn(conv2d(relu(x), w[p[0]], {op.stride, 0, 1}), w, p, 1);
    case ArchOpId::kSepConv3:
    case ArchOpId::kSepConv5: {
      const int k = kernel_of(op.id);
      Var y = depthwise_conv2d(relu(x), w[p[0]], {op.stride, k / 2, 1});
      y = bn(conv2d(y, w[p[1]]), w, p, 2);
      y = depthwise_conv2d(relu(y), w[p[4]], {1, k / 2, 1});
      return bn(conv2d(y, w[p[5]]), w, p, 6);
    }
    case ArchOpId::kDilConv3:
    case ArchOpId::kDilConv5: {
      const int k = kernel_of(op.id);
      Var y = depthwise_conv2d(relu(x), w[p[0]], {op.stride, k - 1, 2});
      return bn(conv2d(y, w[p[1]]), w, p, 2);
    }
    case ArchOpId::kMaxPool3:
      return bn(max_pool2d(x, {3, op.stride, 1}), w, p, 0);
    case ArchOpId::kAvgPool3:
      return bn(avg_pool2d(x, {3, op.stride, 1}), w, p, 0);
  }
  throw ValueError("arch_op_forward: unknown op");
}

Var mixed_op_forward(Var x, Var alpha, std::span<const ArchOp> ops, std::span<const Var> w) {
  if (alpha.value().numel() != ops.size()) {
    throw ShapeError("mixed_op_forward: alpha of shape " + shape_to_string(alpha.shape()) +
                     " for " + std::to_string(ops.size()) + " ops");
  }
  std::vector<Var> outs;
  outs.reserve(ops.size());
  for (const auto& op : ops) outs.push_back(arch_op_forward(op, x, w));
  return weighted_sum(outs, softmax(alpha));
}

Var cell_dag_forward(Var s0, Var s1, int n_intermediate, std::span<const Edge> edges,
                     const std::function<Var(std::size_t, Var)>& edge) {
  std::vector<Var> states = {s0, s1};
  for (int j = 0; j < n_intermediate; ++j) {
    Var node;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].dst != j + 2) continue;
      if (edges[e].src < 0 || edges[e].src >= j + 2) {
        throw ValueError("cell edge from node " + std::to_string(edges[e].src) + " to " +
                         std::to_string(edges[e].dst) + " is not forward");
      }
      Var out = edge(e, states[static_cast<std::size_t>(edges[e].src)]);
      node = node.valid() ? add(node, out) : out;
    }
    if (!node.valid()) throw ValueError("cell node " + std::to_string(j + 2) + " has no inputs");
    states.push_back(node);
  }
  return concat(std::span<const Var>(states).subspan(2), 1);
}

Network Network::search(const NetworkConfig& config, const std::vector<ArchOpId>& op_set,
                        Rng& rng) {
  Network net;
  net.build(config, &op_set, nullptr, rng);
  return net;
}

Network Network::discrete(const NetworkConfig& config, const Genotype& genotype, Rng& rng) {
  Network net;
  net.build(config, nullptr, &genotype, rng);
  return net;
}

void Network::build(const NetworkConfig& config, const std::vector<ArchOpId>* op_set,
                    const Genotype* genotype, Rng& rng) {
  config.validate();
  config_ = config;
  search_ = op_set != nullptr;
  const int inner = intermediate_nodes(config.n_nodes);
  if (genotype != nullptr) {
    if (genotype->size() != 2 || (*genotype)[0].reduction || !(*genotype)[1].reduction) {
      throw ValueError("genotype must hold a normal and a reduction cell");
    }
    for (const auto& cell : *genotype) {
      if (static_cast<int>(cell.nodes.size()) != inner) {
        throw ValueError("genotype cell has " + std::to_string(cell.nodes.size()) +
                         " nodes, network expects " + std::to_string(inner));
      }
    }
  }

  std::int64_t c_curr = config.init_channels;
  const std::int64_t c_stem = c_curr * config.stem_multiplier;
  stem_w_ = add_conv(weights_, "stem.conv", c_stem, config.in_channels, 3, rng);
  stem_gamma_ = weights_.add("stem.bn.gamma", Tensor(Shape{c_stem}, 1.0f));
  stem_beta_ = weights_.add("stem.bn.beta", Tensor(Shape{c_stem}, 0.0f));

  std::int64_t c_pp = c_stem, c_p = c_stem;
  bool reduction_prev = false;
  for (int i = 0; i < config.n_cells; ++i) {
    const std::string prefix = "cell" + std::to_string(i);
    Cell cell;
    cell.reduction = std::find(config.reduction_positions.begin(),
                               config.reduction_positions.end(),
                               i) != config.reduction_positions.end();
    if (cell.reduction) c_curr *= 2;
    cell.pre0 = make_relu_conv_bn(c_pp, c_curr, reduction_prev ? 2 : 1, prefix + ".pre0",
                                  weights_, rng);
    cell.pre1 = make_relu_conv_bn(c_p, c_curr, 1, prefix + ".pre1", weights_, rng);
    const int c = static_cast<int>(c_curr);
    if (search_) {
      cell.edges = dense_edges(config.n_nodes);
      for (const auto& e : cell.edges) {
        const int stride = cell.reduction && e.src < 2 ? 2 : 1;
        std::vector<ArchOp> ops;
        for (auto id : *op_set) {
          ops.push_back(make_arch_op(id, c, stride,
                                     prefix + ".e" + std::to_string(e.src) + std::to_string(e.dst) +
                                         "." + std::string(arch_op_name(id)),
                                     weights_, rng));
        }
        cell.ops.push_back(std::move(ops));
      }
    } else {
      const auto& dc = (*genotype)[cell.reduction ? 1 : 0];
      for (int j = 0; j < inner; ++j) {
        for (const auto& de : dc.nodes[static_cast<std::size_t>(j)]) {
          const Edge e{de.input, j + 2};
          const int stride = cell.reduction && e.src < 2 ? 2 : 1;
          cell.edges.push_back(e);
          cell.ops.push_back({make_arch_op(
              de.op, c, stride,
              prefix + ".e" + std::to_string(e.src) + std::to_string(e.dst) + "." +
                  std::string(arch_op_name(de.op)),
              weights_, rng)});
        }
      }
    }
    stack_.push_back(std::move(cell));
    c_pp = c_p;
    c_p = c_curr * inner;
    reduction_prev = stack_.back().reduction;
  }
  fc_w_ = weights_.add("fc.weight", uniform_fan_in({c_p, config.n_classes}, c_p, rng));
  fc_b_ = weights_.add("fc.bias", Tensor(Shape{config.n_classes}, 0.0f));

  if (search_) {
    cells_ = {CellSpec(config.n_nodes, *op_set, false), CellSpec(config.n_nodes, *op_set, true)};
    for (auto& spec : cells_) {
      for (auto& row : spec.alpha) {
        for (float& v : row.values()) v = static_cast<float>(1e-3 * rng.normal());
      }
    }
  }
}

std::vector<Tensor*> Network::alpha_parameters() {
  std::vector<Tensor*> out;
  for (auto& spec : cells_) {
    for (auto& row : spec.alpha) out.push_back(&row);
  }
  return out;
}

std::vector<const Tensor*> Network::alpha_parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& spec : cells_) {
    for (const auto& row : spec.alpha) out.push_back(&row);
  }
  return out;
}

Var Network::forward(Var x, std::span<const Var> w, std::span<const Var> alpha) const {
  if (w.size() != weights_.size()) {
    throw ShapeError("network forward: " + std::to_string(w.size()) + " weights bound, " +
                     std::to_string(weights_.size()) + " expected");
  }
  const std::size_t n_edges = search_ ? cells_.front().alpha.size() : 0;
  if (alpha.size() != 2 * n_edges) {
    throw ShapeError("network forward: " + std::to_string(alpha.size()) +
                     " alpha rows bound, " + std::to_string(2 * n_edges) + " expected");
  }
  const Shape& in = x.shape();
  if (in.size() != 4 || in[1] != config_.in_channels) {
    throw ShapeError("network forward: input " + shape_to_string(in) + " needs " +
                     std::to_string(config_.in_channels) + " channels");
  }
  const int inner = intermediate_nodes(config_.n_nodes);
  Var s = batch_norm(conv2d(x, w[stem_w_], {1, 1, 1}), w[stem_gamma_], w[stem_beta_]);
  Var s0 = s, s1 = s;
  for (const auto& cell : stack_) {
    const Var p0 = arch_op_forward(cell.pre0, s0, w);
    const Var p1 = arch_op_forward(cell.pre1, s1, w);
    const std::size_t offset = cell.reduction ? n_edges : 0;
    const Var out = cell_dag_forward(p0, p1, inner, cell.edges, [&](std::size_t e, Var input) {
      if (search_) return mixed_op_forward(input, alpha[offset + e], cell.ops[e], w);
      return arch_op_forward(cell.ops[e].front(), input, w);
    });
    s0 = s1;
    s1 = out;
  }
  Var logits = bias_add(matmul(global_avg_pool(s1), w[fc_w_]), w[fc_b_]);
  if (!logits.value().all_finite()) {
    throw NumericalError("network forward produced non-finite logits");
  }
  return logits;
}

}  // namespace augnas
