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
#include <span>
#include <vector>

#include "augnas/tensor.hpp"

namespace augnas {

// Scales `grads` in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Tensor> grads, double max_norm);
double global_norm(std::span<const Tensor> grads);

// Momentum SGD with decoupled-from-clipping weight decay:
//   g' = g + wd * w;  v = momentum * v + g';  w -= lr * v
class Sgd {
 public:
  Sgd() = default;
  Sgd(float momentum, float weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}
  void step(std::span<Tensor* const> params, std::span<const Tensor> grads, float lr);
  std::vector<Tensor>& velocity() { return velocity_; }
  const std::vector<Tensor>& velocity() const { return velocity_; }
  friend bool operator==(const Sgd&, const Sgd&) = default;

 private:
  float momentum_ = 0.9f;
  float weight_decay_ = 0.0f;
  std::vector<Tensor> velocity_;
};

// Adam with L2 weight decay added to the gradient.
class Adam {
 public:
  Adam() = default;
  Adam(float lr, float beta1, float beta2, float weight_decay, float eps = 1e-8f)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}
  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);
  std::vector<Tensor>& m() { return m_; }
  std::vector<Tensor>& v() { return v_; }
  const std::vector<Tensor>& m() const { return m_; }
  const std::vector<Tensor>& v() const { return v_; }
  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }
  friend bool operator==(const Adam&, const Adam&) = default;

 private:
  float lr_ = 3e-4f;
  float beta1_ = 0.5f;
  float beta2_ = 0.999f;
  float eps_ = 1e-8f;
  float weight_decay_ = 0.0f;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t t_ = 0;
};

// lr_min + (lr_max - lr_min) (1 + cos(pi epoch / epochs)) / 2
float cosine_lr(float lr_max, float lr_min, int epoch, int epochs);

}  // namespace augnas
