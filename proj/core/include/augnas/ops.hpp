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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "augnas/tape.hpp"

namespace augnas {

// Differentiable primitives. Every function records one node on the tape of
// its first argument and throws ShapeError naming the offending dimensions
// when inputs are incompatible.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// scale * x + shift with constant scale and shift.
Var scale_shift(Var x, float scale, float shift = 0.0f);
// x * s where s holds one value, or one value per leading-axis entry.
Var scale(Var x, Var s);
Var matmul(Var a, Var b);

struct ConvParams {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
};

// x: B x Cin x H x W, w: Cout x Cin x kH x kW. No bias.
Var conv2d(Var x, Var w, ConvParams params = {});
// x: B x C x H x W, w: C x 1 x kH x kW.
Var depthwise_conv2d(Var x, Var w, ConvParams params = {});

struct PoolParams {
  int kernel = 3;
  int stride = 1;
  int padding = 1;
};

// Padding cells are excluded from the average.
Var avg_pool2d(Var x, PoolParams params = {});
// Ties route the gradient to the lowest linear index in the window.
Var max_pool2d(Var x, PoolParams params = {});
Var global_avg_pool(Var x);

Var relu(Var x);
Var sigmoid(Var x);
Var log(Var x);
Var exp(Var x);
Var sin(Var x);
Var cos(Var x);

enum class ClampGrad {
  kClosed,  // gradient passes on lo <= x <= hi
  kOpen,    // gradient passes on lo < x < hi only
};
Var clamp(Var x, float lo, float hi, ClampGrad grad = ClampGrad::kClosed);

Var concat(std::span<const Var> xs, int axis);
Var reshape(Var x, Shape shape);

// Bilinear resampling of a B x C x H x W batch through the pixel-space affine
// map  src = [t0 t1; t3 t4] (dst - c) + c + [t2; t5],  c = ((W-1)/2, (H-1)/2).
// theta holds 6 values shared by the batch or B x 6. Out-of-range taps read 0.
Var affine_grid_sample(Var x, Var theta);

// t * a + (1 - t) * b, t holding one value or one per leading-axis entry.
Var lerp(Var a, Var b, Var t);

Var sum(Var x);
Var mean(Var x);

// softmax(z / eta) along the last axis.
Var softmax(Var z, float eta = 1.0f);
// Mean negative log-likelihood of `labels` under softmax(logits), logits B x C.
Var cross_entropy(Var logits, std::span<const int> labels);

// Per-channel batch statistics over (B, H, W); gamma and beta have C entries.
Var batch_norm(Var x, Var gamma, Var beta, float eps = 1e-5f);
// Adds b (C entries) along axis 1.
Var bias_add(Var x, Var b);

// sum_i weights[i] * xs[i]; weights is {n} or {B, n}.
Var weighted_sum(std::span<const Var> xs, Var weights);
// Element `index` of the last axis: {n} -> {1}, {B, n} -> {B}.
Var select(Var v, std::int64_t index);

// Per-channel (x - mean) / std with constant statistics.
Var normalize_channels(Var x, std::span<const float> mean,
                       std::span<const float> std);

using Attrs = std::map<std::string, double>;

// Generic entry point dispatching on op kind. Attributes:
//   scale_shift: scale, shift     conv2d / depthwise_conv2d: stride, padding,
//   [dilation]                    avg_pool / max_pool: kernel, stride, padding
//   clamp: lo, hi                 concat: axis
//   softmax: eta                  select: index
Var primitive_forward(OpKind kind, std::span<const Var> inputs,
                      const Attrs& attrs = {});

}  // namespace augnas
