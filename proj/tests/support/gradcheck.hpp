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

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "augnas/ops.hpp"
#include "augnas/rng.hpp"

namespace augnas::testing {

// Builds the function under test on `tape` from leaves holding the inputs.
// Must be deterministic: stochastic ops derive their rng from a fixed seed.
using Builder = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheck {
  double max_error = 0.0;  // max over inputs of ||a - n||_inf / max(||n||_inf, floor)
  std::string worst;
};

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (float& v : t.values()) v = static_cast<float>(lo + (hi - lo) * rng.uniform());
  return t;
}

// Central differences of L = sum(f(inputs) * R) with a fixed random R,
// compared against the reverse-mode gradient of every input in `wrt`.
inline GradCheck gradcheck(const Builder& f, std::vector<Tensor> inputs, std::vector<bool> wrt,
                           std::uint64_t seed, double step = 1e-3, double floor = 1e-6) {
  Tensor weights;
  auto loss_of = [&](const std::vector<Tensor>& xs) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& x : xs) vars.push_back(tape.constant(x));
    const Tensor out = f(tape, vars).value();
    if (weights.empty()) {
      Rng r(seed ^ 0x5eedull);
      weights = random_tensor(out.shape(), r);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < out.numel(); ++i) acc += static_cast<double>(out[i]) * weights[i];
    return acc;
  };
  loss_of(inputs);

  Tape tape;
  std::vector<Var> vars;
  for (std::size_t i = 0; i < inputs.size(); ++i) vars.push_back(tape.leaf(inputs[i], wrt[i]));
  const Var out = f(tape, vars);
  const Var loss = sum(mul(out, tape.constant(weights)));
  const Gradients grads = tape.backward(loss);

  GradCheck result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!wrt[i]) continue;
    const Tensor& analytic = grads.of(vars[i]);
    double diff = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < inputs[i].numel(); ++j) {
      std::vector<Tensor> plus = inputs, minus = inputs;
      plus[i][j] += static_cast<float>(step);
      minus[i][j] -= static_cast<float>(step);
      const double h = (static_cast<double>(plus[i][j]) - minus[i][j]) / 2.0;
      const double numeric = (loss_of(plus) - loss_of(minus)) / (2.0 * h);
      diff = std::max(diff, std::abs(numeric - analytic[j]));
      scale = std::max(scale, std::abs(numeric));
    }
    const double err = diff / std::max(scale, floor);
    if (err >= result.max_error) {
      result.max_error = err;
      result.worst = "input " + std::to_string(i);
    }
  }
  return result;
}

}  // namespace augnas::testing
