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

#include <cstdint>
#include <deque>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augnas/tensor.hpp"

namespace augnas {

using NodeId = std::uint32_t;

// Every primitive recorded on a tape. `kCustom` covers composite kernels
// defined outside the core (image operations).
enum class OpKind : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kScalarMul,
  kScale,
  kMatmul,
  kConv2d,
  kDepthwiseConv2d,
  kAvgPool,
  kMaxPool,
  kRelu,
  kSigmoid,
  kClamp,
  kConcat,
  kGlobalAvgPool,
  kAffineGridSample,
  kLinearBlend,
  kLog,
  kExp,
  kSin,
  kCos,
  kSumReduce,
  kMeanReduce,
  kSoftmax,
  kCrossEntropy,
  kBatchNorm,
  kBiasAdd,
  kWeightedSum,
  kSelect,
  kReshape,
  kCustom,
};

std::string_view op_kind_name(OpKind kind);
// Throws ValueError naming the token for unknown names.
OpKind op_kind_from_name(std::string_view name);

class Tape;

// Handle to a node recorded on a tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  NodeId id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool needs_grad() const;

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

// View handed to a node's backward function.
class BackwardContext {
 public:
  const Tensor& grad_output() const { return *grad_output_; }
  const Tensor& output() const;
  std::size_t num_inputs() const { return parents_->size(); }
  const Tensor& input(std::size_t i) const;
  bool needs(std::size_t i) const;
  // Gradient accumulator of input i, zero-initialized on first access.
  Tensor& grad_input(std::size_t i);

 private:
  friend class Tape;
  BackwardContext(Tape* tape, NodeId node, const std::vector<NodeId>* parents,
                  const Tensor* grad_output)
      : tape_(tape), node_(node), parents_(parents), grad_output_(grad_output) {}

  Tape* tape_;
  NodeId node_;
  const std::vector<NodeId>* parents_;
  const Tensor* grad_output_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

// Gradients of every grad-required leaf, keyed by node id.
class Gradients {
 public:
  bool contains(Var v) const { return grads_.count(v.id()) != 0; }
  // Throws TapeError for vars that are not grad-required leaves.
  const Tensor& of(Var v) const;
  std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape;
  std::unordered_map<NodeId, Tensor> grads_;
};

// Append-only, define-by-run record of a forward computation. Append order
// is a topological order; backward walks it once in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Appends an operation node. `backward` is dropped when no input needs a
  // gradient.
  Var record(OpKind kind, std::vector<Var> inputs, Tensor output,
             BackwardFn backward);

  // Reverse sweep from a scalar loss. Freezes the tape.
  Gradients backward(Var loss);

  bool frozen() const { return frozen_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t backward_visits() const { return visits_; }
  std::size_t backward_calls() const { return backward_calls_; }

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  bool needs_grad(NodeId id) const { return nodes_.at(id).needs_grad; }
  OpKind kind(NodeId id) const { return nodes_.at(id).kind; }

 private:
  friend class BackwardContext;

  struct Node {
    OpKind kind = OpKind::kLeaf;
    Tensor value;
    std::vector<NodeId> parents;
    BackwardFn backward;
    bool requires_grad = false;
    bool needs_grad = false;
  };

  void check_open() const;

  std::deque<Node> nodes_;
  std::vector<Tensor> grads_;
  bool frozen_ = false;
  std::size_t visits_ = 0;
  std::size_t backward_calls_ = 0;
};

}  // namespace augnas
