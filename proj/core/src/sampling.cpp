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

#include "augnas/sampling.hpp"

#include "augnas/error.hpp"

namespace augnas {

Var softmax_temperature(Var z, float eta) {
  if (!(eta > 0.0f)) throw ValueError("temperature eta must be positive");
  return softmax(z, eta);
}

Var gumbel_softmax_sample(Var z, float eta, Rng& rng) {
  if (!(eta > 0.0f)) throw ValueError("temperature eta must be positive");
  Tensor noise(z.shape());
  for (auto& v : noise.values()) v = static_cast<float>(rng.gumbel());
  Var g = z.tape().constant(std::move(noise));
  return softmax(add(z, g), eta);
}

Var relaxed_bernoulli(Var p, float eta, Rng& rng, std::int64_t count) {
  if (!(eta > 0.0f)) throw ValueError("temperature eta must be positive");
  if (p.value().numel() != 1) {
    throw ShapeError("relaxed_bernoulli: expects a single probability, got shape " +
                     shape_to_string(p.shape()));
  }
  if (count < 1) throw ValueError("relaxed_bernoulli: count must be positive");
  Tape& tape = p.tape();
  Var pc = clamp(reshape(p, Shape{1}), kProbabilityFloor, 1.0f - kProbabilityFloor);
  // logit(p) = log(p) - log(1 - p)
  Var logit = sub(log(pc), log(scale_shift(pc, -1.0f, 1.0f)));
  if (count > 1) {
    std::vector<Var> copies(static_cast<std::size_t>(count), logit);
    logit = concat(copies, 0);
  }
  Tensor noise(Shape{count});
  for (auto& v : noise.values()) {
    const double g1 = rng.gumbel();
    const double g2 = rng.gumbel();
    v = static_cast<float>(g1 - g2);
  }
  return sigmoid(scale_shift(add(logit, tape.constant(std::move(noise))), 1.0f / eta));
}

}  // namespace augnas
