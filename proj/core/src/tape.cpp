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

#include "augnas/tape.hpp"

#include <array>
#include <string>

#include "augnas/error.hpp"

namespace augnas {

namespace {

struct KindName {
  OpKind kind;
  std::string_view name;
};

constexpr std::array kKindNames{
    KindName{OpKind::kLeaf, "leaf"},
    KindName{OpKind::kAdd, "add"},
    KindName{OpKind::kSub, "sub"},
    KindName{OpKind::kMul, "mul"},
    KindName{OpKind::kScalarMul, "scalar_mul"},
    KindName{OpKind::kScale, "scale"},
    KindName{OpKind::kMatmul, "matmul"},
    KindName{OpKind::kConv2d, "conv2d"},
    KindName{OpKind::kDepthwiseConv2d, "depthwise_conv2d"},
    KindName{OpKind::kAvgPool, "avg_pool"},
    KindName{OpKind::kMaxPool, "max_pool"},
    KindName{OpKind::kRelu, "relu"},
    KindName{OpKind::kSigmoid, "sigmoid"},
    KindName{OpKind::kClamp, "clamp"},
    KindName{OpKind::kConcat, "concat"},
    KindName{OpKind::kGlobalAvgPool, "global_avg_pool"},
    KindName{OpKind::kAffineGridSample, "affine_grid_sample"},
    KindName{OpKind::kLinearBlend, "linear_blend"},
    KindName{OpKind::kLog, "log"},
    KindName{OpKind::kExp, "exp"},
    KindName{OpKind::kSin, "sin"},
    KindName{OpKind::kCos, "cos"},
    KindName{OpKind::kSumReduce, "sum"},
    KindName{OpKind::kMeanReduce, "mean"},
    KindName{OpKind::kSoftmax, "softmax"},
    KindName{OpKind::kCrossEntropy, "cross_entropy"},
    KindName{OpKind::kBatchNorm, "batch_norm"},
    KindName{OpKind::kBiasAdd, "bias_add"},
    KindName{OpKind::kWeightedSum, "weighted_sum"},
    KindName{OpKind::kSelect, "select"},
    KindName{OpKind::kReshape, "reshape"},
    KindName{OpKind::kCustom, "custom"},
};

}  // namespace

std::string_view op_kind_name(OpKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

OpKind op_kind_from_name(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw ValueError("unknown op-kind '" + std::string(name) + "'");
}

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::needs_grad() const { return tape_->needs_grad(id_); }

const Tensor& BackwardContext::output() const { return tape_->nodes_[node_].value; }

const Tensor& BackwardContext::input(std::size_t i) const {
  return tape_->nodes_[(*parents_)[i]].value;
}

bool BackwardContext::needs(std::size_t i) const {
  return tape_->nodes_[(*parents_)[i]].needs_grad;
}

Tensor& BackwardContext::grad_input(std::size_t i) {
  const NodeId parent = (*parents_)[i];
  Tensor& g = tape_->grads_[parent];
  if (g.empty() && tape_->nodes_[parent].value.numel() != 0) {
    g = Tensor(tape_->nodes_[parent].value.shape(), 0.0f);
  }
  return g;
}

const Tensor& Gradients::of(Var v) const {
  auto it = grads_.find(v.id());
  if (it == grads_.end()) {
    throw TapeError("node " + std::to_string(v.id()) +
                    " is not a grad-required leaf of this backward pass");
  }
  return it->second;
}

void Tape::check_open() const {
  if (frozen_) throw TapeError("cannot record on a frozen tape");
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  check_open();
  Node node;
  node.kind = OpKind::kLeaf;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.needs_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Var Tape::record(OpKind kind, std::vector<Var> inputs, Tensor output,
                 BackwardFn backward) {
  check_open();
  Node node;
  node.kind = kind;
  node.value = std::move(output);
  node.parents.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw TapeError("input recorded on a different tape");
    node.parents.push_back(in.id());
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Gradients Tape::backward(Var loss) {
  if (frozen_) throw TapeError("backward called twice on the same tape");
  if (&loss.tape() != this) throw TapeError("loss recorded on a different tape");
  const Tensor& loss_value = nodes_[loss.id()].value;
  if (loss_value.numel() != 1) {
    throw TapeError("backward requires a scalar loss, got shape " +
                    shape_to_string(loss_value.shape()));
  }
  ++backward_calls_;
  frozen_ = true;
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss.id()] = Tensor(loss_value.shape(), 1.0f);

  std::vector<bool> visited(nodes_.size(), false);
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    const auto nid = static_cast<NodeId>(id);
    if (visited[nid]) throw TapeError("node visited twice during backward");
    visited[nid] = true;
    ++visits_;
    Node& node = nodes_[nid];
    if (!node.needs_grad || node.kind == OpKind::kLeaf || grads_[nid].empty()) continue;
    BackwardContext ctx(this, nid, &node.parents, &grads_[nid]);
    node.backward(ctx);
    grads_[nid] = Tensor();
    node.backward = nullptr;
  }

  Gradients out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (node.kind != OpKind::kLeaf || !node.requires_grad) continue;
    Tensor g = std::move(grads_[id]);
    if (g.empty()) g = Tensor(node.value.shape(), 0.0f);
    out.grads_.emplace(static_cast<NodeId>(id), std::move(g));
  }
  grads_.clear();
  return out;
}

}  // namespace augnas
