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

#include "augnas/image_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "augnas/error.hpp"
#include "ops_internal.hpp"

namespace augnas {

namespace {

using Id = ImageOpId;

const std::array<ImageOp, 16> kOps{{
    {Id::kShearX, "shear_x", -0.3f, 0.3f, true, true, 0.5f},
    {Id::kShearY, "shear_y", -0.3f, 0.3f, true, true, 0.5f},
    {Id::kTranslateX, "translate_x", -0.45f, 0.45f, true, true, 0.5f},
    {Id::kTranslateY, "translate_y", -0.45f, 0.45f, true, true, 0.5f},
    {Id::kRotate, "rotate", -30.0f, 30.0f, true, true, 0.5f},
    {Id::kAutoContrast, "auto_contrast", 0.0f, 0.0f, false, false, std::nullopt},
    {Id::kHorizontalFlip, "horizontal_flip", 0.0f, 0.0f, false, false, std::nullopt},
    {Id::kInvert, "invert", 0.0f, 0.0f, false, false, std::nullopt},
    {Id::kEqualize, "equalize", 0.0f, 0.0f, false, false, std::nullopt},
    {Id::kSolarize, "solarize", 0.0f, 1.0f, true, false, std::nullopt},
    {Id::kPosterize, "posterize", 1.0f, 8.0f, true, false, 1.0f},
    {Id::kContrast, "contrast", 0.1f, 1.9f, true, true, 0.5f},
    {Id::kColor, "color", 0.1f, 1.9f, true, true, 0.5f},
    {Id::kBrightness, "brightness", 0.1f, 1.9f, true, true, 0.5f},
    {Id::kSharpness, "sharpness", 0.1f, 1.9f, true, true, 0.5f},
    {Id::kSamplePairing, "sample_pairing", 0.0f, 0.4f, true, true, 0.0f},
}};

struct Dims {
  std::int64_t b, c, h, w;
  std::int64_t plane() const { return h * w; }
};

Dims dims_of(const Var& x, const char* who) {
  detail::require_rank(who, x, 4);
  const Tensor& t = x.value();
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
}

void identity_grad(BackwardContext& ctx, std::size_t input) {
  if (!ctx.needs(input)) return;
  const Tensor& g = ctx.grad_output();
  Tensor& gx = ctx.grad_input(input);
  for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
}

void sum_grad_to_scalar(BackwardContext& ctx, std::size_t input) {
  if (!ctx.needs(input)) return;
  double acc = 0.0;
  for (float v : ctx.grad_output().values()) acc += v;
  ctx.grad_input(input)[0] += static_cast<float>(acc);
}

Var constant_scalar(Tape& tape, float v) { return tape.constant(Tensor(Shape{1}, v)); }

Var affine_theta(std::array<Var, 6> entries) {
  return concat(entries, 0);
}

float luma_weight(std::int64_t c) {
  constexpr std::array<float, 3> kLuma{0.299f, 0.587f, 0.114f};
  return kLuma[static_cast<std::size_t>(c)];
}

}  // namespace

const ImageOp& image_op(ImageOpId id) {
  for (const auto& op : kOps) {
    if (op.id == id) return op;
  }
  throw ValueError("unknown image op id");
}

const ImageOp& image_op_by_name(std::string_view name) {
  for (const auto& op : kOps) {
    if (op.name == name) return op;
  }
  throw ValueError("unknown image op '" + std::string(name) + "'");
}

const std::vector<ImageOpId>& default_op_set() {
  static const std::vector<ImageOpId> ops = [] {
    std::vector<ImageOpId> out;
    for (const auto& op : kOps) out.push_back(op.id);
    return out;
  }();
  return ops;
}

void check_pixel_range(const Tensor& x, const char* who) {
  constexpr float kSlack = 1e-6f;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const float v = x[i];
    if (!(v >= -kSlack && v <= 1.0f + kSlack)) {
      throw ValueError(std::string(who) + ": pixel " + std::to_string(i) + " = " +
                       std::to_string(v) + " outside [0, 1]");
    }
  }
}

Var flip_horizontal(Var x) {
  const Dims d = dims_of(x, "flip_horizontal");
  const Tensor& in = x.value();
  Tensor out(in.shape());
  const std::int64_t rows = d.b * d.c * d.h;
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t j = 0; j < d.w; ++j) out[r * d.w + j] = in[r * d.w + (d.w - 1 - j)];
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out), [d, rows](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t j = 0; j < d.w; ++j) gx[r * d.w + (d.w - 1 - j)] += g[r * d.w + j];
    }
  });
}

Var grayscale(Var x) {
  const Dims d = dims_of(x, "grayscale");
  if (d.c != 3) return x;
  const Tensor& in = x.value();
  Tensor out(in.shape());
  const std::int64_t plane = d.plane();
  for (std::int64_t b = 0; b < d.b; ++b) {
    const float* src = in.data() + b * 3 * plane;
    float* dst = out.data() + b * 3 * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      const float l = luma_weight(0) * src[i] + luma_weight(1) * src[plane + i] +
                      luma_weight(2) * src[2 * plane + i];
      dst[i] = dst[plane + i] = dst[2 * plane + i] = l;
    }
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out), [d, plane](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::int64_t b = 0; b < d.b; ++b) {
      const float* gp = g.data() + b * 3 * plane;
      float* gxp = gx.data() + b * 3 * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const float s = gp[i] + gp[plane + i] + gp[2 * plane + i];
        for (std::int64_t c = 0; c < 3; ++c) gxp[c * plane + i] += luma_weight(c) * s;
      }
    }
  });
}

Var gray_mean(Var x) {
  const Dims d = dims_of(x, "gray_mean");
  const Tensor& in = x.value();
  const std::int64_t plane = d.plane();
  const std::int64_t per_image = d.c * plane;
  // Channel weights of the luma average; uniform when the image is not RGB.
  std::vector<float> cw(static_cast<std::size_t>(d.c));
  for (std::int64_t c = 0; c < d.c; ++c) cw[c] = d.c == 3 ? luma_weight(c) : 1.0f / d.c;
  Tensor out(in.shape());
  for (std::int64_t b = 0; b < d.b; ++b) {
    double acc = 0.0;
    for (std::int64_t c = 0; c < d.c; ++c) {
      const float* p = in.data() + b * per_image + c * plane;
      double s = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) s += p[i];
      acc += cw[c] * s;
    }
    const auto m = static_cast<float>(acc / static_cast<double>(plane));
    std::fill_n(out.data() + b * per_image, per_image, m);
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out),
                         [d, plane, per_image, cw](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           for (std::int64_t b = 0; b < d.b; ++b) {
                             double s = 0.0;
                             for (std::int64_t i = 0; i < per_image; ++i) s += g[b * per_image + i];
                             const double k = s / static_cast<double>(plane);
                             for (std::int64_t c = 0; c < d.c; ++c) {
                               const auto v = static_cast<float>(k * cw[c]);
                               float* p = gx.data() + b * per_image + c * plane;
                               for (std::int64_t i = 0; i < plane; ++i) p[i] += v;
                             }
                           }
                         });
}

Var smooth3x3(Var x) {
  const Dims d = dims_of(x, "smooth3x3");
  const Tensor& in = x.value();
  Tensor out = in;
  const std::int64_t planes = d.b * d.c;
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = in.data() + p * d.plane();
    float* dst = out.data() + p * d.plane();
    for (std::int64_t y = 1; y + 1 < d.h; ++y) {
      for (std::int64_t xx = 1; xx + 1 < d.w; ++xx) {
        float acc = 4.0f * src[y * d.w + xx];
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dx = -1; dx <= 1; ++dx) acc += src[(y + dy) * d.w + xx + dx];
        }
        dst[y * d.w + xx] = acc / 13.0f;
      }
    }
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out), [d, planes](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::int64_t p = 0; p < planes; ++p) {
      const float* gp = g.data() + p * d.plane();
      float* gxp = gx.data() + p * d.plane();
      for (std::int64_t y = 0; y < d.h; ++y) {
        for (std::int64_t xx = 0; xx < d.w; ++xx) {
          const float v = gp[y * d.w + xx];
          const bool border = y == 0 || xx == 0 || y + 1 == d.h || xx + 1 == d.w;
          if (border) {
            gxp[y * d.w + xx] += v;
            continue;
          }
          const float k = v / 13.0f;
          gxp[y * d.w + xx] += 4.0f * k;
          for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) gxp[(y + dy) * d.w + xx + dx] += k;
          }
        }
      }
    }
  });
}

Var auto_contrast(Var x) {
  const Dims d = dims_of(x, "auto_contrast");
  const Tensor& in = x.value();
  const std::int64_t planes = d.b * d.c;
  const std::int64_t plane = d.plane();
  struct Extent {
    std::int64_t lo, hi;
    float range;
  };
  std::vector<Extent> extents(static_cast<std::size_t>(planes));
  Tensor out(in.shape());
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = in.data() + p * plane;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    for (std::int64_t i = 1; i < plane; ++i) {
      if (src[i] < src[lo]) lo = i;
      if (src[i] > src[hi]) hi = i;
    }
    const float range = src[hi] - src[lo];
    extents[p] = {lo, hi, range};
    float* dst = out.data() + p * plane;
    if (range > 0.0f) {
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = (src[i] - src[lo]) / range;
    } else {
      std::copy_n(src, plane, dst);
    }
  }
  return x.tape().record(
      OpKind::kCustom, {x}, std::move(out),
      [planes, plane, extents = std::move(extents)](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& y = ctx.output();
        Tensor& gx = ctx.grad_input(0);
        for (std::int64_t p = 0; p < planes; ++p) {
          const float* gp = g.data() + p * plane;
          const float* yp = y.data() + p * plane;
          float* gxp = gx.data() + p * plane;
          const Extent& e = extents[p];
          if (!(e.range > 0.0f)) {
            for (std::int64_t i = 0; i < plane; ++i) gxp[i] += gp[i];
            continue;
          }
          const double inv = 1.0 / e.range;
          double to_lo = 0.0;
          double to_hi = 0.0;
          for (std::int64_t i = 0; i < plane; ++i) {
            gxp[i] += static_cast<float>(gp[i] * inv);
            to_lo += gp[i] * (yp[i] - 1.0) * inv;
            to_hi -= gp[i] * yp[i] * inv;
          }
          gxp[e.lo] += static_cast<float>(to_lo);
          gxp[e.hi] += static_cast<float>(to_hi);
        }
      });
}

Var equalize(Var x) {
  const Dims d = dims_of(x, "equalize");
  const Tensor& in = x.value();
  const std::int64_t planes = d.b * d.c;
  const std::int64_t plane = d.plane();
  Tensor out(in.shape());
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = in.data() + p * plane;
    float* dst = out.data() + p * plane;
    std::array<std::int64_t, 256> hist{};
    std::vector<int> level(static_cast<std::size_t>(plane));
    for (std::int64_t i = 0; i < plane; ++i) {
      level[i] = static_cast<int>(std::lround(std::clamp(src[i], 0.0f, 1.0f) * 255.0f));
      ++hist[level[i]];
    }
    // Same lookup table construction as PIL's ImageOps.equalize.
    std::int64_t last = 0;
    for (int v = 255; v >= 0; --v) {
      if (hist[v] != 0) {
        last = hist[v];
        break;
      }
    }
    const std::int64_t step = (plane - last) / 255;
    if (step == 0) {
      std::copy_n(src, plane, dst);
      continue;
    }
    std::array<float, 256> lut{};
    std::int64_t n = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[v] = static_cast<float>(std::min<std::int64_t>(n / step, 255)) / 255.0f;
      n += hist[v];
    }
    for (std::int64_t i = 0; i < plane; ++i) dst[i] = lut[level[i]];
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out),
                         [](BackwardContext& ctx) { identity_grad(ctx, 0); });
}

Var solarize(Var x, Var threshold) {
  dims_of(x, "solarize");
  detail::require_shape(threshold.value().numel() == 1, "solarize", "threshold must be scalar");
  const Tensor& in = x.value();
  const float t = threshold.value()[0];
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) out[i] = in[i] >= t ? 1.0f - in[i] : in[i];
  return x.tape().record(OpKind::kCustom, {x, threshold}, std::move(out),
                         [t](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& in = ctx.input(0);
                           if (ctx.needs(0)) {
                             Tensor& gx = ctx.grad_input(0);
                             for (std::size_t i = 0; i < g.numel(); ++i) {
                               gx[i] += in[i] >= t ? -g[i] : g[i];
                             }
                           }
                           sum_grad_to_scalar(ctx, 1);
                         });
}

Var posterize(Var x, Var mu) {
  dims_of(x, "posterize");
  detail::require_shape(mu.value().numel() == 1, "posterize", "magnitude must be scalar");
  const ImageOp& op = image_op(ImageOpId::kPosterize);
  const int bits = std::clamp(static_cast<int>(std::lround(op.native(mu.value()[0]))), 1, 8);
  const int mask = (0xFF << (8 - bits)) & 0xFF;
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) {
    const int level = static_cast<int>(std::lround(std::clamp(in[i], 0.0f, 1.0f) * 255.0f));
    out[i] = static_cast<float>(level & mask) / 255.0f;
  }
  return x.tape().record(OpKind::kCustom, {x, mu}, std::move(out), [](BackwardContext& ctx) {
    identity_grad(ctx, 0);
    sum_grad_to_scalar(ctx, 1);
  });
}

Var batch_permute(Var x, std::vector<std::int64_t> perm) {
  detail::require_shape(x.value().rank() >= 1, "batch_permute", "needs a batch axis");
  const Tensor& in = x.value();
  const auto batch = in.dim(0);
  detail::require_shape(static_cast<std::int64_t>(perm.size()) == batch, "batch_permute",
                        "permutation length differs from batch size");
  const auto per = static_cast<std::int64_t>(in.numel()) / std::max<std::int64_t>(batch, 1);
  Tensor out(in.shape());
  for (std::int64_t b = 0; b < batch; ++b) {
    std::copy_n(in.data() + perm[b] * per, per, out.data() + b * per);
  }
  return x.tape().record(OpKind::kCustom, {x}, std::move(out),
                         [perm = std::move(perm), per](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           for (std::size_t b = 0; b < perm.size(); ++b) {
                             for (std::int64_t i = 0; i < per; ++i) {
                               gx[perm[b] * per + i] += g[b * per + i];
                             }
                           }
                         });
}

Var apply_image_op(const ImageOp& op, Var x, Var mu, Rng& rng) {
  const Dims d = dims_of(x, "apply_image_op");
  if (d.h < 2 || d.w < 2) throw ShapeError("apply_image_op: H and W must be >= 2");
  detail::require_shape(mu.value().numel() == 1, "apply_image_op",
                        "magnitude must hold one value, got " + shape_to_string(mu.shape()));
  check_pixel_range(x.value(), "apply_image_op");
  Tape& tape = x.tape();
  mu = reshape(mu, Shape{1});
  const float span = op.range_hi - op.range_lo;
  auto native = [&](float unit) { return scale_shift(mu, span * unit, op.range_lo * unit); };
  auto one = [&] { return constant_scalar(tape, 1.0f); };
  auto zero = [&] { return constant_scalar(tape, 0.0f); };
  auto factor_blend = [&](Var degenerate) { return lerp(x, degenerate, native(1.0f)); };

  Var out;
  switch (op.id) {
    case Id::kShearX:
      out = affine_grid_sample(x, affine_theta({one(), native(1.0f), zero(), zero(), one(), zero()}));
      break;
    case Id::kShearY:
      out = affine_grid_sample(x, affine_theta({one(), zero(), zero(), native(1.0f), one(), zero()}));
      break;
    case Id::kTranslateX:
      // Content moves by +shift pixels, so the source coordinate is dst - shift.
      out = affine_grid_sample(
          x, affine_theta({one(), zero(), native(-static_cast<float>(d.w)), zero(), one(), zero()}));
      break;
    case Id::kTranslateY:
      out = affine_grid_sample(
          x, affine_theta({one(), zero(), zero(), zero(), one(), native(-static_cast<float>(d.h))}));
      break;
    case Id::kRotate: {
      Var angle = native(std::numbers::pi_v<float> / 180.0f);
      Var c = cos(angle);
      Var s = sin(angle);
      out = affine_grid_sample(
          x, affine_theta({c, s, zero(), scale_shift(s, -1.0f), c, zero()}));
      break;
    }
    case Id::kAutoContrast: out = auto_contrast(x); break;
    case Id::kHorizontalFlip: out = flip_horizontal(x); break;
    case Id::kInvert: out = scale_shift(x, -1.0f, 1.0f); break;
    case Id::kEqualize: out = equalize(x); break;
    case Id::kSolarize: out = solarize(x, native(1.0f)); break;
    case Id::kPosterize: out = posterize(x, mu); break;
    case Id::kContrast: out = factor_blend(gray_mean(x)); break;
    case Id::kColor: out = factor_blend(grayscale(x)); break;
    case Id::kBrightness: out = scale(x, native(1.0f)); break;
    case Id::kSharpness: out = factor_blend(smooth3x3(x)); break;
    case Id::kSamplePairing: {
      std::vector<std::int64_t> perm;
      for (auto i : rng.permutation(static_cast<std::size_t>(d.b))) {
        perm.push_back(static_cast<std::int64_t>(i));
      }
      out = lerp(batch_permute(x, std::move(perm)), x, native(1.0f));
      break;
    }
  }
  return clamp(out, 0.0f, 1.0f);
}

}  // namespace augnas
