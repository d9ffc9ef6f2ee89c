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

#include <optional>
#include <string_view>
#include <vector>

#include "augnas/ops.hpp"
#include "augnas/rng.hpp"

namespace augnas {

enum class ImageOpId {
  kShearX,
  kShearY,
  kTranslateX,
  kTranslateY,
  kRotate,
  kAutoContrast,
  kHorizontalFlip,
  kInvert,
  kEqualize,
  kSolarize,
  kPosterize,
  kContrast,
  kColor,
  kBrightness,
  kSharpness,
  kSamplePairing,
};

// Static description of an image operation. The magnitude mu in [0, 1] maps
// affinely onto [range_lo, range_hi] in the op's native unit: shear factor,
// fraction of the image extent (translate), degrees (rotate), threshold
// (solarize), bits (posterize), enhancement factor, or blend weight.
struct ImageOp {
  ImageOpId id;
  std::string_view name;
  float range_lo = 0.0f;
  float range_hi = 0.0f;
  bool uses_magnitude = true;
  bool differentiable_in_mu = true;
  // Magnitude at which the op reproduces its input (geometric and enhancement
  // ops; posterize only on inputs quantized to 1/255).
  std::optional<float> identity_magnitude;

  float native(float mu) const { return range_lo + (range_hi - range_lo) * mu; }
};

const ImageOp& image_op(ImageOpId id);
// Throws ValueError naming the unknown identifier.
const ImageOp& image_op_by_name(std::string_view name);
// The 16 searchable operations in canonical order. Cutout is not among them.
const std::vector<ImageOpId>& default_op_set();

// Applies `op` to a B x C x H x W batch with pixels in [0, 1]. `mu` holds a
// single magnitude. Output is clamped to [0, 1]. The rng is consumed only by
// sample pairing (partner permutation).
Var apply_image_op(const ImageOp& op, Var x, Var mu, Rng& rng);

// Kernels used by the ops above, exposed for testing.
Var flip_horizontal(Var x);
// Luma (0.299, 0.587, 0.114) replicated over three channels; identity for C != 3.
Var grayscale(Var x);
// Per-image mean luma broadcast over the image.
Var gray_mean(Var x);
// 3x3 smoothing (center weight 5, others 1, sum 13); border pixels copied.
Var smooth3x3(Var x);
// Per-image, per-channel min/max rescale to [0, 1].
Var auto_contrast(Var x);
// Per-image, per-channel histogram equalization over 256 bins.
// Straight-through gradient w.r.t. x.
Var equalize(Var x);
// Pixels >= threshold are inverted. Straight-through gradient w.r.t. threshold.
Var solarize(Var x, Var threshold);
// Keeps round(1 + 7 mu) bits of the 8-bit value. Straight-through gradients.
Var posterize(Var x, Var mu);
// out[b] = x[perm[b]].
Var batch_permute(Var x, std::vector<std::int64_t> perm);

// Throws ValueError when any pixel lies outside [0, 1].
void check_pixel_range(const Tensor& x, const char* who);

}  // namespace augnas
