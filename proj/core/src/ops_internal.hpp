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

#include <string>

#include "augnas/error.hpp"
#include "augnas/ops.hpp"

namespace augnas::detail {

inline void require_shape(bool ok, const std::string& op, const std::string& what) {
  if (!ok) throw ShapeError(op + ": " + what);
}

inline void require_same_shape(const std::string& op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(op + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

inline void require_rank(const std::string& op, const Var& x, int rank) {
  if (x.value().rank() != rank) {
    throw ShapeError(op + ": expected rank " + std::to_string(rank) + " input, got " +
                     shape_to_string(x.shape()));
  }
}

// Number of groups a per-group scalar splits `x` into: 1 for a single value,
// x.dim(0) for one value per leading-axis entry.
inline std::size_t scalar_groups(const std::string& op, const Var& x, const Var& s) {
  const std::size_t n = s.value().numel();
  if (n == 1) return 1;
  if (x.value().rank() >= 1 && n == static_cast<std::size_t>(x.value().dim(0))) return n;
  throw ShapeError(op + ": scalar operand of shape " + shape_to_string(s.shape()) +
                   " does not broadcast over " + shape_to_string(x.shape()));
}

}  // namespace augnas::detail
