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

#include "augnas/optim.hpp"

#include <cmath>
#include <numbers>

#include "augnas/error.hpp"

namespace augnas {

namespace {

void check_pairs(std::span<Tensor* const> params, std::span<const Tensor> grads,
                 const char* who) {
  if (params.size() != grads.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape()) {
      throw ShapeError(std::string(who) + ": parameter " + std::to_string(i) + " is " +
                       shape_to_string(params[i]->shape()) + ", gradient is " +
                       shape_to_string(grads[i].shape()));
    }
  }
}

void init_like(std::vector<Tensor>& state, std::span<Tensor* const> params) {
  if (!state.empty()) return;
  for (const Tensor* p : params) state.emplace_back(p->shape(), 0.0f);
}

}  // namespace

double global_norm(std::span<const Tensor> grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (float v : g.values()) sq += static_cast<double>(v) * v;
  }
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Tensor> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const auto s = static_cast<float>(max_norm / (norm + 1e-6));
    for (auto& g : grads) {
      for (float& v : g.values()) v *= s;
    }
  }
  return norm;
}

void Sgd::step(std::span<Tensor* const> params, std::span<const Tensor> grads, float lr) {
  check_pairs(params, grads, "sgd");
  init_like(velocity_, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    auto v = velocity_[i].values();
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j] + weight_decay_ * w[j];
      w[j] -= lr * v[j];
    }
  }
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  check_pairs(params, grads, "adam");
  init_like(m_, params);
  init_like(v_, params);
  ++t_;
  const double c1 = 1.0 - std::pow(static_cast<double>(beta1_), static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(static_cast<double>(beta2_), static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const float gj = g[j] + weight_decay_ * w[j];
      m[j] = beta1_ * m[j] + (1.0f - beta1_) * gj;
      v[j] = beta2_ * v[j] + (1.0f - beta2_) * gj * gj;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

float cosine_lr(float lr_max, float lr_min, int epoch, int epochs) {
  if (epochs <= 0) return lr_max;
  const double phase = std::numbers::pi * static_cast<double>(epoch) / epochs;
  return static_cast<float>(lr_min + (lr_max - lr_min) * 0.5 * (1.0 + std::cos(phase)));
}

}  // namespace augnas
