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
#include <numeric>

#include "augnas/ops.hpp"
#include "ops_internal.hpp"

namespace augnas {

using detail::require_same_shape;
using detail::require_shape;

namespace {

// Elementwise unary op with derivative expressed through input and output.
template <typename Fwd, typename Deriv>
Var unary(OpKind kind, Var x, Fwd fwd, Deriv deriv) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) out[i] = fwd(in[i]);
  return x.tape().record(kind, {x}, std::move(out), [deriv](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& in = ctx.input(0);
    const Tensor& y = ctx.output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * deriv(in[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x[i] + y[i];
  return a.tape().record(OpKind::kAdd, {a, b}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!ctx.needs(k)) continue;
      Tensor& gk = ctx.grad_input(k);
      for (std::size_t i = 0; i < g.numel(); ++i) gk[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out(a.shape());
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x[i] - y[i];
  return a.tape().record(OpKind::kSub, {a, b}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad_input(0);
      for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad_input(1);
      for (std::size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x[i] * y[i];
  return a.tape().record(OpKind::kMul, {a, b}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& x = ctx.input(0);
    const Tensor& y = ctx.input(1);
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad_input(0);
      for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad_input(1);
      for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * x[i];
    }
  });
}

Var scale_shift(Var x, float scale, float shift) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) out[i] = scale * in[i] + shift;
  return x.tape().record(OpKind::kScalarMul, {x}, std::move(out),
                         [scale](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += scale * g[i];
                         });
}

Var scale(Var x, Var s) {
  const std::size_t groups = detail::scalar_groups("scale", x, s);
  const Tensor& in = x.value();
  const Tensor& sv = s.value();
  const std::size_t per = in.numel() / groups;
  Tensor out(in.shape());
  for (std::size_t gi = 0; gi < groups; ++gi) {
    for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) out[i] = in[i] * sv[gi];
  }
  return x.tape().record(OpKind::kScale, {x, s}, std::move(out),
                         [groups, per](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& in = ctx.input(0);
                           const Tensor& sv = ctx.input(1);
                           if (ctx.needs(0)) {
                             Tensor& gx = ctx.grad_input(0);
                             for (std::size_t gi = 0; gi < groups; ++gi) {
                               for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) {
                                 gx[i] += g[i] * sv[gi];
                               }
                             }
                           }
                           if (ctx.needs(1)) {
                             Tensor& gs = ctx.grad_input(1);
                             for (std::size_t gi = 0; gi < groups; ++gi) {
                               double acc = 0.0;
                               for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) {
                                 acc += static_cast<double>(g[i]) * in[i];
                               }
                               gs[gi] += static_cast<float>(acc);
                             }
                           }
                         });
}

Var lerp(Var a, Var b, Var t) {
  require_same_shape("lerp", a, b);
  const std::size_t groups = detail::scalar_groups("lerp", a, t);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const Tensor& tv = t.value();
  const std::size_t per = x.numel() / groups;
  Tensor out(x.shape());
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const float w = tv[gi];
    for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) {
      out[i] = w * x[i] + (1.0f - w) * y[i];
    }
  }
  return a.tape().record(
      OpKind::kLinearBlend, {a, b, t}, std::move(out), [groups, per](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& x = ctx.input(0);
        const Tensor& y = ctx.input(1);
        const Tensor& tv = ctx.input(2);
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const float w = tv[gi];
          if (ctx.needs(0)) {
            Tensor& ga = ctx.grad_input(0);
            for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) ga[i] += w * g[i];
          }
          if (ctx.needs(1)) {
            Tensor& gb = ctx.grad_input(1);
            for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) gb[i] += (1.0f - w) * g[i];
          }
          if (ctx.needs(2)) {
            double acc = 0.0;
            for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) {
              acc += static_cast<double>(g[i]) * (x[i] - y[i]);
            }
            ctx.grad_input(2)[gi] += static_cast<float>(acc);
          }
        }
      });
}

Var matmul(Var a, Var b) {
  detail::require_rank("matmul", a, 2);
  detail::require_rank("matmul", b, 2);
  const auto m = a.value().dim(0);
  const auto k = a.value().dim(1);
  const auto n = b.value().dim(1);
  require_shape(b.value().dim(0) == k, "matmul",
                "inner dimensions differ: " + shape_to_string(a.shape()) + " x " +
                    shape_to_string(b.shape()));
  const float* A = a.value().data();
  const float* B = b.value().data();
  Tensor out(Shape{m, n});
  float* C = out.data();
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t p = 0; p < k; ++p) {
      const float av = A[i * k + p];
      for (std::int64_t j = 0; j < n; ++j) C[i * n + j] += av * B[p * n + j];
    }
  }
  return a.tape().record(OpKind::kMatmul, {a, b}, std::move(out), [m, k, n](BackwardContext& ctx) {
    const float* G = ctx.grad_output().data();
    const float* A = ctx.input(0).data();
    const float* B = ctx.input(1).data();
    if (ctx.needs(0)) {
      float* GA = ctx.grad_input(0).data();
      for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t p = 0; p < k; ++p) {
          float acc = 0.0f;
          for (std::int64_t j = 0; j < n; ++j) acc += G[i * n + j] * B[p * n + j];
          GA[i * k + p] += acc;
        }
      }
    }
    if (ctx.needs(1)) {
      float* GB = ctx.grad_input(1).data();
      for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t p = 0; p < k; ++p) {
          const float av = A[i * k + p];
          for (std::int64_t j = 0; j < n; ++j) GB[p * n + j] += av * G[i * n + j];
        }
      }
    }
  });
}

Var relu(Var x) {
  return unary(
      OpKind::kRelu, x, [](float v) { return v > 0.0f ? v : 0.0f; },
      [](float in, float) { return in > 0.0f ? 1.0f : 0.0f; });
}

Var sigmoid(Var x) {
  return unary(
      OpKind::kSigmoid, x,
      [](float v) {
        return v >= 0.0f ? 1.0f / (1.0f + std::exp(-v))
                         : std::exp(v) / (1.0f + std::exp(v));
      },
      [](float, float y) { return y * (1.0f - y); });
}

Var log(Var x) {
  return unary(
      OpKind::kLog, x, [](float v) { return std::log(v); },
      [](float in, float) { return 1.0f / in; });
}

Var exp(Var x) {
  return unary(
      OpKind::kExp, x, [](float v) { return std::exp(v); }, [](float, float y) { return y; });
}

Var sin(Var x) {
  return unary(
      OpKind::kSin, x, [](float v) { return std::sin(v); },
      [](float in, float) { return std::cos(in); });
}

Var cos(Var x) {
  return unary(
      OpKind::kCos, x, [](float v) { return std::cos(v); },
      [](float in, float) { return -std::sin(in); });
}

Var clamp(Var x, float lo, float hi, ClampGrad grad) {
  if (!(lo <= hi)) throw ValueError("clamp: lo must not exceed hi");
  const bool open = grad == ClampGrad::kOpen;
  return unary(
      OpKind::kClamp, x, [lo, hi](float v) { return std::clamp(v, lo, hi); },
      [lo, hi, open](float in, float) {
        const bool pass = open ? (in > lo && in < hi) : (in >= lo && in <= hi);
        return pass ? 1.0f : 0.0f;
      });
}

Var sum(Var x) {
  const Tensor& in = x.value();
  double acc = 0.0;
  for (float v : in.values()) acc += v;
  return x.tape().record(OpKind::kSumReduce, {x}, Tensor::scalar(static_cast<float>(acc)),
                         [](BackwardContext& ctx) {
                           const float g = ctx.grad_output()[0];
                           Tensor& gx = ctx.grad_input(0);
                           for (auto& v : gx.values()) v += g;
                         });
}

Var mean(Var x) {
  const Tensor& in = x.value();
  require_shape(in.numel() > 0, "mean", "empty input");
  double acc = 0.0;
  for (float v : in.values()) acc += v;
  const auto n = static_cast<double>(in.numel());
  return x.tape().record(OpKind::kMeanReduce, {x}, Tensor::scalar(static_cast<float>(acc / n)),
                         [n](BackwardContext& ctx) {
                           const auto g = static_cast<float>(ctx.grad_output()[0] / n);
                           Tensor& gx = ctx.grad_input(0);
                           for (auto& v : gx.values()) v += g;
                         });
}

Var softmax(Var z, float eta) {
  if (!(eta > 0.0f)) throw ValueError("softmax: temperature must be positive");
  const Tensor& in = z.value();
  require_shape(in.rank() >= 1 && in.numel() > 0, "softmax", "needs a non-empty input");
  const auto n = static_cast<std::size_t>(in.dim(-1));
  const std::size_t rows = in.numel() / n;
  Tensor out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* x = in.data() + r * n;
    float* y = out.data() + r * n;
    float mx = x[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::exp((x[i] - mx) / eta);
      total += y[i];
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<float>(y[i] / total);
  }
  return z.tape().record(OpKind::kSoftmax, {z}, std::move(out),
                         [n, rows, eta](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           const Tensor& y = ctx.output();
                           Tensor& gz = ctx.grad_input(0);
                           for (std::size_t r = 0; r < rows; ++r) {
                             double dot = 0.0;
                             for (std::size_t i = 0; i < n; ++i) {
                               dot += static_cast<double>(g[r * n + i]) * y[r * n + i];
                             }
                             for (std::size_t i = 0; i < n; ++i) {
                               const std::size_t k = r * n + i;
                               gz[k] += static_cast<float>(y[k] * (g[k] - dot) / eta);
                             }
                           }
                         });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  detail::require_rank("cross_entropy", logits, 2);
  const Tensor& in = logits.value();
  const auto batch = static_cast<std::size_t>(in.dim(0));
  const auto classes = static_cast<std::size_t>(in.dim(1));
  require_shape(labels.size() == batch, "cross_entropy",
                "got " + std::to_string(labels.size()) + " labels for batch of " +
                    std::to_string(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= classes) {
      throw ValueError("cross_entropy: label " + std::to_string(labels[b]) + " at row " +
                       std::to_string(b) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
  Tensor probs(in.shape());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const float* x = in.data() + b * classes;
    float mx = x[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, x[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += std::exp(static_cast<double>(x[c] - mx));
    const double lse = mx + std::log(total);
    loss += lse - x[labels[b]];
    for (std::size_t c = 0; c < classes; ++c) {
      probs[b * classes + c] = static_cast<float>(std::exp(x[c] - lse));
    }
  }
  loss /= static_cast<double>(batch);
  std::vector<int> saved(labels.begin(), labels.end());
  return logits.tape().record(
      OpKind::kCrossEntropy, {logits}, Tensor::scalar(static_cast<float>(loss)),
      [probs = std::move(probs), saved = std::move(saved), batch, classes](BackwardContext& ctx) {
        const float g = ctx.grad_output()[0] / static_cast<float>(batch);
        Tensor& gx = ctx.grad_input(0);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < classes; ++c) {
            const float onehot = static_cast<int>(c) == saved[b] ? 1.0f : 0.0f;
            gx[b * classes + c] += g * (probs[b * classes + c] - onehot);
          }
        }
      });
}

Var weighted_sum(std::span<const Var> xs, Var weights) {
  require_shape(!xs.empty(), "weighted_sum", "no inputs");
  const Tensor& w = weights.value();
  const std::size_t n = xs.size();
  const Shape& shape = xs[0].shape();
  for (const Var& x : xs) {
    if (x.shape() != shape) {
      throw ShapeError("weighted_sum: shape mismatch " + shape_to_string(x.shape()) + " vs " +
                       shape_to_string(shape));
    }
  }
  std::size_t groups = 1;
  if (w.rank() == 1 && static_cast<std::size_t>(w.dim(0)) == n) {
    groups = 1;
  } else if (w.rank() == 2 && static_cast<std::size_t>(w.dim(1)) == n && !shape.empty() &&
             w.dim(0) == shape[0]) {
    groups = static_cast<std::size_t>(w.dim(0));
  } else {
    throw ShapeError("weighted_sum: weights of shape " + shape_to_string(w.shape()) +
                     " do not match " + std::to_string(n) + " inputs of shape " +
                     shape_to_string(shape));
  }
  const std::size_t numel = shape_numel(shape);
  const std::size_t per = numel / groups;
  Tensor out(shape);
  for (std::size_t k = 0; k < n; ++k) {
    const Tensor& xk = xs[k].value();
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const float wk = w[gi * n + k];
      for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) out[i] += wk * xk[i];
    }
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  inputs.push_back(weights);
  return weights.tape().record(
      OpKind::kWeightedSum, std::move(inputs), std::move(out),
      [n, groups, per](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        const Tensor& w = ctx.input(n);
        for (std::size_t k = 0; k < n; ++k) {
          if (ctx.needs(k)) {
            Tensor& gk = ctx.grad_input(k);
            for (std::size_t gi = 0; gi < groups; ++gi) {
              const float wk = w[gi * n + k];
              for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) gk[i] += wk * g[i];
            }
          }
        }
        if (ctx.needs(n)) {
          for (std::size_t k = 0; k < n; ++k) {
            const Tensor& xk = ctx.input(k);
            for (std::size_t gi = 0; gi < groups; ++gi) {
              double acc = 0.0;
              for (std::size_t i = gi * per; i < (gi + 1) * per; ++i) {
                acc += static_cast<double>(g[i]) * xk[i];
              }
              ctx.grad_input(n)[gi * n + k] += static_cast<float>(acc);
            }
          }
        }
      });
}

Var select(Var v, std::int64_t index) {
  const Tensor& in = v.value();
  require_shape(in.rank() == 1 || in.rank() == 2, "select",
                "expected rank 1 or 2 input, got " + shape_to_string(in.shape()));
  const auto n = in.dim(-1);
  if (index < 0 || index >= n) {
    throw ShapeError("select: index " + std::to_string(index) + " out of range for last dim " +
                     std::to_string(n));
  }
  const std::int64_t rows = in.rank() == 1 ? 1 : in.dim(0);
  Tensor out(Shape{rows});
  for (std::int64_t r = 0; r < rows; ++r) out[r] = in[r * n + index];
  return v.tape().record(OpKind::kSelect, {v}, std::move(out),
                         [rows, n, index](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gv = ctx.grad_input(0);
                           for (std::int64_t r = 0; r < rows; ++r) gv[r * n + index] += g[r];
                         });
}

Var concat(std::span<const Var> xs, int axis) {
  require_shape(!xs.empty(), "concat", "no inputs");
  const Shape& first = xs[0].shape();
  const int rank = static_cast<int>(first.size());
  if (axis < 0) axis += rank;
  require_shape(axis >= 0 && axis < rank, "concat", "axis out of range");
  std::int64_t total = 0;
  for (const Var& x : xs) {
    const Shape& s = x.shape();
    bool ok = static_cast<int>(s.size()) == rank;
    for (int d = 0; ok && d < rank; ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw ShapeError("concat: " + shape_to_string(s) + " incompatible with " +
                       shape_to_string(first) + " along axis " + std::to_string(axis));
    }
    total += s[axis];
  }
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(first[d]);
  for (int d = axis + 1; d < rank; ++d) inner *= static_cast<std::size_t>(first[d]);
  Shape out_shape = first;
  out_shape[axis] = total;
  Tensor out(out_shape);
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  const std::size_t out_row = static_cast<std::size_t>(total) * inner;
  for (const Var& x : xs) {
    const std::size_t width = static_cast<std::size_t>(x.shape()[axis]) * inner;
    const float* src = x.value().data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src + o * width, width, out.data() + o * out_row + offset);
    }
    widths.push_back(width);
    offset += width;
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return xs[0].tape().record(
      OpKind::kConcat, std::move(inputs), std::move(out),
      [widths = std::move(widths), outer, out_row](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        std::size_t offset = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          if (ctx.needs(k)) {
            float* gk = ctx.grad_input(k).data();
            for (std::size_t o = 0; o < outer; ++o) {
              const float* src = g.data() + o * out_row + offset;
              for (std::size_t i = 0; i < widths[k]; ++i) gk[o * widths[k] + i] += src[i];
            }
          }
          offset += widths[k];
        }
      });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(OpKind::kReshape, {x}, std::move(out), [](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
  });
}

Var bias_add(Var x, Var b) {
  const Tensor& in = x.value();
  require_shape(in.rank() >= 2, "bias_add", "input needs rank >= 2");
  const auto channels = static_cast<std::size_t>(in.dim(1));
  require_shape(b.value().numel() == channels, "bias_add",
                "bias of shape " + shape_to_string(b.shape()) + " for " +
                    std::to_string(channels) + " channels");
  const auto batch = static_cast<std::size_t>(in.dim(0));
  const std::size_t inner = in.numel() / (batch * channels);
  Tensor out(in.shape());
  const Tensor& bv = b.value();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) out[base + i] = in[base + i] + bv[c];
    }
  }
  return x.tape().record(OpKind::kBiasAdd, {x, b}, std::move(out),
                         [batch, channels, inner](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           if (ctx.needs(0)) {
                             Tensor& gx = ctx.grad_input(0);
                             for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
                           }
                           if (ctx.needs(1)) {
                             Tensor& gb = ctx.grad_input(1);
                             for (std::size_t n = 0; n < batch; ++n) {
                               for (std::size_t c = 0; c < channels; ++c) {
                                 const std::size_t base = (n * channels + c) * inner;
                                 for (std::size_t i = 0; i < inner; ++i) gb[c] += g[base + i];
                               }
                             }
                           }
                         });
}

Var normalize_channels(Var x, std::span<const float> mean_values,
                       std::span<const float> std_values) {
  detail::require_rank("normalize_channels", x, 4);
  const Tensor& in = x.value();
  const auto channels = static_cast<std::size_t>(in.dim(1));
  auto at = [channels](std::span<const float> v, std::size_t c, const char* what) {
    if (v.size() == 1) return v[0];
    if (v.size() != channels) {
      throw ShapeError(std::string("normalize_channels: ") + what + " has " +
                       std::to_string(v.size()) + " entries for " +
                       std::to_string(channels) + " channels");
    }
    return v[c];
  };
  std::vector<float> inv_std(channels);
  std::vector<float> mu(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    mu[c] = at(mean_values, c, "mean");
    const float s = at(std_values, c, "std");
    if (!(s > 0.0f)) throw ValueError("normalize_channels: std must be positive");
    inv_std[c] = 1.0f / s;
  }
  const auto batch = static_cast<std::size_t>(in.dim(0));
  const std::size_t inner = in.numel() / (batch * channels);
  Tensor out(in.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) out[base + i] = (in[base + i] - mu[c]) * inv_std[c];
    }
  }
  return x.tape().record(OpKind::kScalarMul, {x}, std::move(out),
                         [inv_std, batch, channels, inner](BackwardContext& ctx) {
                           const Tensor& g = ctx.grad_output();
                           Tensor& gx = ctx.grad_input(0);
                           for (std::size_t n = 0; n < batch; ++n) {
                             for (std::size_t c = 0; c < channels; ++c) {
                               const std::size_t base = (n * channels + c) * inner;
                               for (std::size_t i = 0; i < inner; ++i) {
                                 gx[base + i] += g[base + i] * inv_std[c];
                               }
                             }
                           }
                         });
}

}  // namespace augnas
