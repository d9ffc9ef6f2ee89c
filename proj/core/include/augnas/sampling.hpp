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

#include "augnas/ops.hpp"
#include "augnas/rng.hpp"

namespace augnas {

// softmax(z / eta) along the last axis; rejects eta <= 0.
Var softmax_temperature(Var z, float eta);

// softmax((z + g) / eta) with i.i.d. standard Gumbel noise g drawn from rng.
// The noise is a constant on the tape, so gradients reach z only.
Var gumbel_softmax_sample(Var z, float eta, Rng& rng);

// Relaxed Bernoulli gate sigmoid((logit(p) + g1 - g2) / eta), p clamped to
// [1e-6, 1 - 1e-6]. `p` holds one probability; `count` independent samples
// are returned as a {count} vector.
Var relaxed_bernoulli(Var p, float eta, Rng& rng, std::int64_t count = 1);

inline constexpr float kProbabilityFloor = 1e-6f;

}  // namespace augnas
