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

#include <algorithm>
#include <cmath>
#include <limits>

#include "augnas/ops.hpp"
#include "ops_internal.hpp"

namespace augnas {

using detail::require_rank;
using detail::require_shape;

namespace {

struct Geometry {
  std::int64_t batch, channels, height, width;
};

Geometry geometry_of(const Tensor& t) { return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)}; }

std::int64_t out_extent(std::int64_t in, int kernel, int stride, int pad, int dilation) {
  return (in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
}

// Output indices o with 0 <= o*stride - pad + offset < in, as [lo, hi).
std::pair<std::int64_t, std::int64_t> valid_range(std::int64_t in, std::int64_t out,
                                                  int stride, int pad, std::int64_t offset) {
  // o*stride >= pad - offset
  const std::int64_t a = pad - offset;
  std::int64_t lo = a <= 0 ? 0 : (a + stride - 1) / stride;
  // o*stride <= in - 1 + pad - offset
  const std::int64_t b = in - 1 + pad - offset;
  std::int64_t hi = b < 0 ? 0 : b / stride + 1;
  lo = std::min(lo, out);
  hi = std::clamp(hi, lo, out);
  return {lo, hi};
}

void check_conv_params(const char* op, const ConvParams& p) {
  if (p.stride < 1 || p.padding < 0 || p.dilation < 1) {
    throw ValueError(std::string(op) + ": stride and dilation must be >= 1, padding >= 0");
  }
}

// Shared loop nest for dense (groups == 1) and depthwise (groups == C) conv.
struct ConvPlan {
  Geometry in;
  std::int64_t out_channels, kh, kw, oh, ow;
  ConvParams p;
  bool depthwise;

  std::int64_t in_per_out() const { return depthwise ? 1 : in.channels; }
  std::int64_t input_channel(std::int64_t co, std::int64_t ci) const {
    return depthwise ? co : ci;
  }
};

void conv_forward(const ConvPlan& plan, const float* x, const float* w, float* y) {
  const auto& g = plan.in;
  const std::int64_t in_plane = g.height * g.width;
  const std::int64_t out_plane = plan.oh * plan.ow;
  for (std::int64_t b = 0; b < g.batch; ++b) {
    for (std::int64_t co = 0; co < plan.out_channels; ++co) {
      float* yp = y + (b * plan.out_channels + co) * out_plane;
      for (std::int64_t cj = 0; cj < plan.in_per_out(); ++cj) {
        const std::int64_t ci = plan.input_channel(co, cj);
        const float* xp = x + (b * g.channels + ci) * in_plane;
        const float* wp = w + (co * plan.in_per_out() + cj) * plan.kh * plan.kw;
        for (std::int64_t ky = 0; ky < plan.kh; ++ky) {
          const auto [oy_lo, oy_hi] = valid_range(g.height, plan.oh, plan.p.stride,
                                                  plan.p.padding, ky * plan.p.dilation);
          for (std::int64_t kx = 0; kx < plan.kw; ++kx) {
            const float wv = wp[ky * plan.kw + kx];
            const auto [ox_lo, ox_hi] = valid_range(g.width, plan.ow, plan.p.stride,
                                                    plan.p.padding, kx * plan.p.dilation);
            for (std::int64_t oy = oy_lo; oy < oy_hi; ++oy) {
              const std::int64_t iy = oy * plan.p.stride - plan.p.padding + ky * plan.p.dilation;
              const float* xrow = xp + iy * g.width;
              float* yrow = yp + oy * plan.ow;
              const std::int64_t shift = kx * plan.p.dilation - plan.p.padding;
              if (plan.p.stride == 1) {
                for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox) yrow[ox] += wv * xrow[ox + shift];
              } else {
                for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox) {
                  yrow[ox] += wv * xrow[ox * plan.p.stride + shift];
                }
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward(const ConvPlan& plan, const float* x, const float* w, const float* gy,
                   float* gx, float* gw) {
  const auto& g = plan.in;
  const std::int64_t in_plane = g.height * g.width;
  const std::int64_t out_plane = plan.oh * plan.ow;
  for (std::int64_t b = 0; b < g.batch; ++b) {
    for (std::int64_t co = 0; co < plan.out_channels; ++co) {
      const float* gp = gy + (b * plan.out_channels + co) * out_plane;
      for (std::int64_t cj = 0; cj < plan.in_per_out(); ++cj) {
        const std::int64_t ci = plan.input_channel(co, cj);
        const float* xp = x + (b * g.channels + ci) * in_plane;
        float* gxp = gx ? gx + (b * g.channels + ci) * in_plane : nullptr;
        const std::int64_t widx = (co * plan.in_per_out() + cj) * plan.kh * plan.kw;
        for (std::int64_t ky = 0; ky < plan.kh; ++ky) {
          const auto [oy_lo, oy_hi] = valid_range(g.height, plan.oh, plan.p.stride,
                                                  plan.p.padding, ky * plan.p.dilation);
          for (std::int64_t kx = 0; kx < plan.kw; ++kx) {
            const float wv = w[widx + ky * plan.kw + kx];
            const auto [ox_lo, ox_hi] = valid_range(g.width, plan.ow, plan.p.stride,
                                                    plan.p.padding, kx * plan.p.dilation);
            const std::int64_t shift = kx * plan.p.dilation - plan.p.padding;
            float acc = 0.0f;
            for (std::int64_t oy = oy_lo; oy < oy_hi; ++oy) {
              const std::int64_t iy = oy * plan.p.stride - plan.p.padding + ky * plan.p.dilation;
              const float* grow = gp + oy * plan.ow;
              const float* xrow = xp + iy * g.width;
              float* gxrow = gxp ? gxp + iy * g.width : nullptr;
              for (std::int64_t ox = ox_lo; ox < ox_hi; ++ox) {
                const std::int64_t ix = ox * plan.p.stride + shift;
                acc += grow[ox] * xrow[ix];
                if (gxrow) gxrow[ix] += wv * grow[ox];
              }
            }
            if (gw) gw[widx + ky * plan.kw + kx] += acc;
          }
        }
      }
    }
  }
}

Var conv_impl(const char* op, OpKind kind, Var x, Var w, ConvParams p, bool depthwise) {
  check_conv_params(op, p);
  require_rank(op, x, 4);
  require_rank(op, w, 4);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  ConvPlan plan{geometry_of(xv), wv.dim(0), wv.dim(2), wv.dim(3), 0, 0, p, depthwise};
  if (depthwise) {
    require_shape(wv.dim(0) == xv.dim(1) && wv.dim(1) == 1, op,
                  "weight " + shape_to_string(wv.shape()) + " incompatible with input " +
                      shape_to_string(xv.shape()) + " (expected C x 1 x kH x kW)");
  } else {
    require_shape(wv.dim(1) == xv.dim(1), op,
                  "weight in-channels " + std::to_string(wv.dim(1)) +
                      " differ from input channels " + std::to_string(xv.dim(1)));
  }
  plan.oh = out_extent(xv.dim(2), static_cast<int>(plan.kh), p.stride, p.padding, p.dilation);
  plan.ow = out_extent(xv.dim(3), static_cast<int>(plan.kw), p.stride, p.padding, p.dilation);
  require_shape(plan.oh > 0 && plan.ow > 0, op,
                "kernel larger than padded input " + shape_to_string(xv.shape()));
  Tensor out(Shape{xv.dim(0), plan.out_channels, plan.oh, plan.ow});
  conv_forward(plan, xv.data(), wv.data(), out.data());
  return x.tape().record(kind, {x, w}, std::move(out), [plan](BackwardContext& ctx) {
    float* gx = ctx.needs(0) ? ctx.grad_input(0).data() : nullptr;
    float* gw = ctx.needs(1) ? ctx.grad_input(1).data() : nullptr;
    conv_backward(plan, ctx.input(0).data(), ctx.input(1).data(), ctx.grad_output().data(), gx,
                  gw);
  });
}

void check_pool(const char* op, const PoolParams& p) {
  if (p.kernel < 1 || p.stride < 1 || p.padding < 0 || 2 * p.padding > p.kernel) {
    throw ValueError(std::string(op) +
                     ": need kernel >= 1, stride >= 1, 0 <= padding <= kernel / 2");
  }
}

}  // namespace

Var conv2d(Var x, Var w, ConvParams params) {
  return conv_impl("conv2d", OpKind::kConv2d, x, w, params, false);
}

Var depthwise_conv2d(Var x, Var w, ConvParams params) {
  return conv_impl("depthwise_conv2d", OpKind::kDepthwiseConv2d, x, w, params, true);
}

Var avg_pool2d(Var x, PoolParams p) {
  check_pool("avg_pool2d", p);
  require_rank("avg_pool2d", x, 4);
  const Tensor& in = x.value();
  const Geometry g = geometry_of(in);
  const std::int64_t oh = out_extent(g.height, p.kernel, p.stride, p.padding, 1);
  const std::int64_t ow = out_extent(g.width, p.kernel, p.stride, p.padding, 1);
  Tensor out(Shape{g.batch, g.channels, oh, ow});
  std::vector<float> inv_count(static_cast<std::size_t>(oh * ow));
  for (std::int64_t oy = 0; oy < oh; ++oy) {
    for (std::int64_t ox = 0; ox < ow; ++ox) {
      const std::int64_t y0 = std::max<std::int64_t>(oy * p.stride - p.padding, 0);
      const std::int64_t y1 = std::min<std::int64_t>(oy * p.stride - p.padding + p.kernel, g.height);
      const std::int64_t x0 = std::max<std::int64_t>(ox * p.stride - p.padding, 0);
      const std::int64_t x1 = std::min<std::int64_t>(ox * p.stride - p.padding + p.kernel, g.width);
      inv_count[oy * ow + ox] = 1.0f / static_cast<float>((y1 - y0) * (x1 - x0));
    }
  }
  const std::int64_t planes = g.batch * g.channels;
  for (std::int64_t pl = 0; pl < planes; ++pl) {
    const float* src = in.data() + pl * g.height * g.width;
    float* dst = out.data() + pl * oh * ow;
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      const std::int64_t y0 = std::max<std::int64_t>(oy * p.stride - p.padding, 0);
      const std::int64_t y1 = std::min<std::int64_t>(oy * p.stride - p.padding + p.kernel, g.height);
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        const std::int64_t x0 = std::max<std::int64_t>(ox * p.stride - p.padding, 0);
        const std::int64_t x1 = std::min<std::int64_t>(ox * p.stride - p.padding + p.kernel, g.width);
        float acc = 0.0f;
        for (std::int64_t iy = y0; iy < y1; ++iy) {
          for (std::int64_t ix = x0; ix < x1; ++ix) acc += src[iy * g.width + ix];
        }
        dst[oy * ow + ox] = acc * inv_count[oy * ow + ox];
      }
    }
  }
  return x.tape().record(
      OpKind::kAvgPool, {x}, std::move(out),
      [p, g, oh, ow, inv_count = std::move(inv_count)](BackwardContext& ctx) {
        const Tensor& gy = ctx.grad_output();
        Tensor& gx = ctx.grad_input(0);
        const std::int64_t planes = g.batch * g.channels;
        for (std::int64_t pl = 0; pl < planes; ++pl) {
          const float* gp = gy.data() + pl * oh * ow;
          float* dst = gx.data() + pl * g.height * g.width;
          for (std::int64_t oy = 0; oy < oh; ++oy) {
            const std::int64_t y0 = std::max<std::int64_t>(oy * p.stride - p.padding, 0);
            const std::int64_t y1 =
                std::min<std::int64_t>(oy * p.stride - p.padding + p.kernel, g.height);
            for (std::int64_t ox = 0; ox < ow; ++ox) {
              const std::int64_t x0 = std::max<std::int64_t>(ox * p.stride - p.padding, 0);
              const std::int64_t x1 =
                  std::min<std::int64_t>(ox * p.stride - p.padding + p.kernel, g.width);
              const float v = gp[oy * ow + ox] * inv_count[oy * ow + ox];
              for (std::int64_t iy = y0; iy < y1; ++iy) {
                for (std::int64_t ix = x0; ix < x1; ++ix) dst[iy * g.width + ix] += v;
              }
            }
          }
        }
      });
}

Var max_pool2d(Var x, PoolParams p) {
  check_pool("max_pool2d", p);
  require_rank("max_pool2d", x, 4);
  const Tensor& in = x.value();
  const Geometry g = geometry_of(in);
  const std::int64_t oh = out_extent(g.height, p.kernel, p.stride, p.padding, 1);
  const std::int64_t ow = out_extent(g.width, p.kernel, p.stride, p.padding, 1);
  Tensor out(Shape{g.batch, g.channels, oh, ow});
  std::vector<std::int32_t> argmax(out.numel());
  const std::int64_t planes = g.batch * g.channels;
  for (std::int64_t pl = 0; pl < planes; ++pl) {
    const float* src = in.data() + pl * g.height * g.width;
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      const std::int64_t y0 = std::max<std::int64_t>(oy * p.stride - p.padding, 0);
      const std::int64_t y1 = std::min<std::int64_t>(oy * p.stride - p.padding + p.kernel, g.height);
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        const std::int64_t x0 = std::max<std::int64_t>(ox * p.stride - p.padding, 0);
        const std::int64_t x1 = std::min<std::int64_t>(ox * p.stride - p.padding + p.kernel, g.width);
        std::int64_t best = y0 * g.width + x0;
        // Row-major scan with strict comparison keeps the lowest index on ties.
        for (std::int64_t iy = y0; iy < y1; ++iy) {
          for (std::int64_t ix = x0; ix < x1; ++ix) {
            if (src[iy * g.width + ix] > src[best]) best = iy * g.width + ix;
          }
        }
        const std::size_t o = static_cast<std::size_t>((pl * oh + oy) * ow + ox);
        out[o] = src[best];
        argmax[o] = static_cast<std::int32_t>(best);
      }
    }
  }
  return x.tape().record(OpKind::kMaxPool, {x}, std::move(out),
                         [g, oh, ow, argmax = std::move(argmax)](BackwardContext& ctx) {
                           const Tensor& gy = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           const std::int64_t plane = g.height * g.width;
                           for (std::size_t o = 0; o < argmax.size(); ++o) {
                             const auto pl = static_cast<std::int64_t>(o) / (oh * ow);
                             gx[static_cast<std::size_t>(pl * plane + argmax[o])] += gy[o];
                           }
                         });
}

Var global_avg_pool(Var x) {
  require_rank("global_avg_pool", x, 4);
  const Tensor& in = x.value();
  const Geometry g = geometry_of(in);
  const std::int64_t plane = g.height * g.width;
  Tensor out(Shape{g.batch, g.channels});
  for (std::int64_t pl = 0; pl < g.batch * g.channels; ++pl) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < plane; ++i) acc += in[pl * plane + i];
    out[pl] = static_cast<float>(acc / static_cast<double>(plane));
  }
  return x.tape().record(OpKind::kGlobalAvgPool, {x}, std::move(out),
                         [plane](BackwardContext& ctx) {
                           const Tensor& gy = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           const float inv = 1.0f / static_cast<float>(plane);
                           for (std::size_t pl = 0; pl < gy.numel(); ++pl) {
                             const float v = gy[pl] * inv;
                             for (std::int64_t i = 0; i < plane; ++i) gx[pl * plane + i] += v;
                           }
                         });
}

Var batch_norm(Var x, Var gamma, Var beta, float eps) {
  const Tensor& in = x.value();
  require_shape(in.rank() == 2 || in.rank() == 4, "batch_norm",
                "expected rank 2 or 4 input, got " + shape_to_string(in.shape()));
  const auto batch = static_cast<std::size_t>(in.dim(0));
  const auto channels = static_cast<std::size_t>(in.dim(1));
  const std::size_t inner = in.numel() / (batch * channels);
  require_shape(gamma.value().numel() == channels && beta.value().numel() == channels,
                "batch_norm",
                "affine parameters " + shape_to_string(gamma.shape()) + ", " +
                    shape_to_string(beta.shape()) + " for " + std::to_string(channels) +
                    " channels");
  const double count = static_cast<double>(batch * inner);
  Tensor xhat(in.shape());
  Tensor out(in.shape());
  std::vector<float> inv_std(channels);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t c = 0; c < channels; ++c) {
    double s = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const float* p = in.data() + (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) s += p[i];
    }
    const double mu = s / count;
    double v = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const float* p = in.data() + (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) v += (p[i] - mu) * (p[i] - mu);
    }
    const double istd = 1.0 / std::sqrt(v / count + eps);
    inv_std[c] = static_cast<float>(istd);
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const auto h = static_cast<float>((in[base + i] - mu) * istd);
        xhat[base + i] = h;
        out[base + i] = gv[c] * h + bv[c];
      }
    }
  }
  return x.tape().record(
      OpKind::kBatchNorm, {x, gamma, beta}, std::move(out),
      [xhat = std::move(xhat), inv_std = std::move(inv_std), batch, channels,
       inner](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& gamma = ctx.input(1);
        const double count = static_cast<double>(batch * inner);
        for (std::size_t c = 0; c < channels; ++c) {
          double sum_g = 0.0;
          double sum_gh = 0.0;
          for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
              sum_g += g[base + i];
              sum_gh += static_cast<double>(g[base + i]) * xhat[base + i];
            }
          }
          if (ctx.needs(1)) ctx.grad_input(1)[c] += static_cast<float>(sum_gh);
          if (ctx.needs(2)) ctx.grad_input(2)[c] += static_cast<float>(sum_g);
          if (ctx.needs(0)) {
            Tensor& gx = ctx.grad_input(0);
            const double k = gamma[c] * inv_std[c] / count;
            for (std::size_t n = 0; n < batch; ++n) {
              const std::size_t base = (n * channels + c) * inner;
              for (std::size_t i = 0; i < inner; ++i) {
                gx[base + i] += static_cast<float>(
                    k * (count * g[base + i] - sum_g - xhat[base + i] * sum_gh));
              }
            }
          }
        }
      });
}

Var affine_grid_sample(Var x, Var theta) {
  require_rank("affine_grid_sample", x, 4);
  const Tensor& in = x.value();
  const Geometry g = geometry_of(in);
  const Tensor& th = theta.value();
  const bool per_sample = th.numel() == static_cast<std::size_t>(6 * g.batch) && th.numel() != 6;
  require_shape(th.numel() == 6 || per_sample, "affine_grid_sample",
                "theta of shape " + shape_to_string(th.shape()) + " for batch " +
                    std::to_string(g.batch) + " (expected 6 or B x 6 values)");
  const double cx = (static_cast<double>(g.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(g.height) - 1.0) / 2.0;
  const std::int64_t plane = g.height * g.width;

  // Per-sample source coordinates are identical across channels.
  struct Tap {
    std::int64_t x0, y0;
    double fx, fy;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(g.batch * plane));
  for (std::int64_t b = 0; b < g.batch; ++b) {
    const float* t = th.data() + (per_sample ? 6 * b : 0);
    for (std::int64_t y = 0; y < g.height; ++y) {
      for (std::int64_t xx = 0; xx < g.width; ++xx) {
        const double dx = static_cast<double>(xx) - cx;
        const double dy = static_cast<double>(y) - cy;
        const double sx = t[0] * dx + t[1] * dy + t[2] + cx;
        const double sy = t[3] * dx + t[4] * dy + t[5] + cy;
        const double fx0 = std::floor(sx);
        const double fy0 = std::floor(sy);
        taps[b * plane + y * g.width + xx] = {static_cast<std::int64_t>(fx0),
                                              static_cast<std::int64_t>(fy0), sx - fx0, sy - fy0};
      }
    }
  }
  auto fetch = [g](const float* p, std::int64_t yy, std::int64_t xx) -> double {
    if (yy < 0 || yy >= g.height || xx < 0 || xx >= g.width) return 0.0;
    return p[yy * g.width + xx];
  };
  Tensor out(in.shape());
  for (std::int64_t b = 0; b < g.batch; ++b) {
    for (std::int64_t c = 0; c < g.channels; ++c) {
      const float* src = in.data() + (b * g.channels + c) * plane;
      float* dst = out.data() + (b * g.channels + c) * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const Tap& tp = taps[b * plane + i];
        const double v = (1 - tp.fy) * ((1 - tp.fx) * fetch(src, tp.y0, tp.x0) +
                                        tp.fx * fetch(src, tp.y0, tp.x0 + 1)) +
                         tp.fy * ((1 - tp.fx) * fetch(src, tp.y0 + 1, tp.x0) +
                                  tp.fx * fetch(src, tp.y0 + 1, tp.x0 + 1));
        dst[i] = static_cast<float>(v);
      }
    }
  }
  return x.tape().record(
      OpKind::kAffineGridSample, {x, theta}, std::move(out),
      [g, taps = std::move(taps), per_sample, cx, cy, plane, fetch](BackwardContext& ctx) {
        const Tensor& gy = ctx.grad_output();
        const Tensor& in = ctx.input(0);
        float* gx = ctx.needs(0) ? ctx.grad_input(0).data() : nullptr;
        float* gt = ctx.needs(1) ? ctx.grad_input(1).data() : nullptr;
        auto scatter = [&g](float* p, std::int64_t yy, std::int64_t xx, double v) {
          if (yy < 0 || yy >= g.height || xx < 0 || xx >= g.width) return;
          p[yy * g.width + xx] += static_cast<float>(v);
        };
        std::vector<double> acc(per_sample ? 6 * g.batch : 6, 0.0);
        for (std::int64_t b = 0; b < g.batch; ++b) {
          double* a = acc.data() + (per_sample ? 6 * b : 0);
          for (std::int64_t i = 0; i < plane; ++i) {
            const Tap& tp = taps[b * plane + i];
            double dsx = 0.0;
            double dsy = 0.0;
            for (std::int64_t c = 0; c < g.channels; ++c) {
              const std::int64_t off = (b * g.channels + c) * plane;
              const double go = gy[off + i];
              if (go == 0.0) continue;
              if (gx) {
                float* p = gx + off;
                scatter(p, tp.y0, tp.x0, go * (1 - tp.fy) * (1 - tp.fx));
                scatter(p, tp.y0, tp.x0 + 1, go * (1 - tp.fy) * tp.fx);
                scatter(p, tp.y0 + 1, tp.x0, go * tp.fy * (1 - tp.fx));
                scatter(p, tp.y0 + 1, tp.x0 + 1, go * tp.fy * tp.fx);
              }
              if (gt) {
                const float* p = in.data() + off;
                const double v00 = fetch(p, tp.y0, tp.x0);
                const double v01 = fetch(p, tp.y0, tp.x0 + 1);
                const double v10 = fetch(p, tp.y0 + 1, tp.x0);
                const double v11 = fetch(p, tp.y0 + 1, tp.x0 + 1);
                dsx += go * ((1 - tp.fy) * (v01 - v00) + tp.fy * (v11 - v10));
                dsy += go * ((1 - tp.fx) * (v10 - v00) + tp.fx * (v11 - v01));
              }
            }
            if (gt) {
              const double dx = static_cast<double>(i % g.width) - cx;
              const double dy = static_cast<double>(i / g.width) - cy;
              a[0] += dsx * dx;
              a[1] += dsx * dy;
              a[2] += dsx;
              a[3] += dsy * dx;
              a[4] += dsy * dy;
              a[5] += dsy;
            }
          }
        }
        if (gt) {
          for (std::size_t k = 0; k < acc.size(); ++k) gt[k] += static_cast<float>(acc[k]);
        }
      });
}

}  // namespace augnas
