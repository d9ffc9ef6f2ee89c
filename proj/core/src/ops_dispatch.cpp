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

#include <cmath>

#include "augnas/ops.hpp"
#include "ops_internal.hpp"

namespace augnas {

namespace {

double attr(const Attrs& attrs, OpKind kind, const std::string& key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) {
    throw ValueError(std::string(op_kind_name(kind)) + ": missing attribute '" + key + "'");
  }
  return it->second;
}

double attr_or(const Attrs& attrs, const std::string& key, double fallback) {
  auto it = attrs.find(key);
  return it == attrs.end() ? fallback : it->second;
}

int int_attr(const Attrs& attrs, OpKind kind, const std::string& key) {
  const double v = attr(attrs, kind, key);
  if (v != std::floor(v)) {
    throw ValueError(std::string(op_kind_name(kind)) + ": attribute '" + key +
                     "' must be an integer");
  }
  return static_cast<int>(v);
}

void arity(OpKind kind, std::span<const Var> inputs, std::size_t n) {
  if (inputs.size() != n) {
    throw ValueError(std::string(op_kind_name(kind)) + ": expected " + std::to_string(n) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
}

}  // namespace

Var primitive_forward(OpKind kind, std::span<const Var> in, const Attrs& attrs) {
  switch (kind) {
    case OpKind::kAdd: arity(kind, in, 2); return add(in[0], in[1]);
    case OpKind::kSub: arity(kind, in, 2); return sub(in[0], in[1]);
    case OpKind::kMul: arity(kind, in, 2); return mul(in[0], in[1]);
    case OpKind::kScalarMul:
      arity(kind, in, 1);
      return scale_shift(in[0], static_cast<float>(attr(attrs, kind, "scale")),
                         static_cast<float>(attr_or(attrs, "shift", 0.0)));
    case OpKind::kScale: arity(kind, in, 2); return scale(in[0], in[1]);
    case OpKind::kMatmul: arity(kind, in, 2); return matmul(in[0], in[1]);
    case OpKind::kConv2d:
    case OpKind::kDepthwiseConv2d: {
      arity(kind, in, 2);
      ConvParams p{int_attr(attrs, kind, "stride"), int_attr(attrs, kind, "padding"),
                   static_cast<int>(attr_or(attrs, "dilation", 1.0))};
      return kind == OpKind::kConv2d ? conv2d(in[0], in[1], p) : depthwise_conv2d(in[0], in[1], p);
    }
    case OpKind::kAvgPool:
    case OpKind::kMaxPool: {
      arity(kind, in, 1);
      PoolParams p{int_attr(attrs, kind, "kernel"), int_attr(attrs, kind, "stride"),
                   int_attr(attrs, kind, "padding")};
      return kind == OpKind::kAvgPool ? avg_pool2d(in[0], p) : max_pool2d(in[0], p);
    }
    case OpKind::kRelu: arity(kind, in, 1); return relu(in[0]);
    case OpKind::kSigmoid: arity(kind, in, 1); return sigmoid(in[0]);
    case OpKind::kClamp:
      arity(kind, in, 1);
      return clamp(in[0], static_cast<float>(attr(attrs, kind, "lo")),
                   static_cast<float>(attr(attrs, kind, "hi")));
    case OpKind::kConcat: return concat(in, int_attr(attrs, kind, "axis"));
    case OpKind::kGlobalAvgPool: arity(kind, in, 1); return global_avg_pool(in[0]);
    case OpKind::kAffineGridSample: arity(kind, in, 2); return affine_grid_sample(in[0], in[1]);
    case OpKind::kLinearBlend: arity(kind, in, 3); return lerp(in[0], in[1], in[2]);
    case OpKind::kLog: arity(kind, in, 1); return log(in[0]);
    case OpKind::kExp: arity(kind, in, 1); return exp(in[0]);
    case OpKind::kSin: arity(kind, in, 1); return sin(in[0]);
    case OpKind::kCos: arity(kind, in, 1); return cos(in[0]);
    case OpKind::kSumReduce: arity(kind, in, 1); return sum(in[0]);
    case OpKind::kMeanReduce: arity(kind, in, 1); return mean(in[0]);
    case OpKind::kSoftmax:
      arity(kind, in, 1);
      return softmax(in[0], static_cast<float>(attr_or(attrs, "eta", 1.0)));
    case OpKind::kBatchNorm: arity(kind, in, 3); return batch_norm(in[0], in[1], in[2]);
    case OpKind::kBiasAdd: arity(kind, in, 2); return bias_add(in[0], in[1]);
    case OpKind::kWeightedSum: {
      if (in.size() < 2) throw ValueError("weighted_sum: needs inputs and weights");
      return weighted_sum(in.first(in.size() - 1), in.back());
    }
    case OpKind::kSelect:
      arity(kind, in, 1);
      return select(in[0], static_cast<std::int64_t>(attr(attrs, kind, "index")));
    case OpKind::kLeaf:
    case OpKind::kCrossEntropy:
    case OpKind::kReshape:
    case OpKind::kCustom:
      break;
  }
  throw ValueError("primitive_forward: op-kind '" + std::string(op_kind_name(kind)) +
                   "' has no generic entry point");
}

}  // namespace augnas
