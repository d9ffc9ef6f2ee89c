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
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace augnas {

// Seeded pseudo-random stream backed by std::mt19937_64. All conversions to
// floating point and integer ranges are implemented here so the stream is
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent stream keyed by (seed, path...). Children never alias the
  // parent stream or each other for distinct paths.
  Rng derive(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in the open interval (0, 1).
  double uniform_open();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  // Standard Gumbel draw: -log(-log(u)).
  double gumbel();
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

  // Textual engine state, round-trips through restore().
  std::string state() const;
  void restore(std::uint64_t seed, const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.seed_ == b.seed_ && a.engine_ == b.engine_;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Fixed stream offsets used to derive per-stage generators from a master seed.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kTrainOrder = 3;
inline constexpr std::uint64_t kValOrder = 4;
inline constexpr std::uint64_t kTrainPreprocess = 5;
inline constexpr std::uint64_t kValPreprocess = 6;
inline constexpr std::uint64_t kTrainPolicy = 7;
inline constexpr std::uint64_t kValPolicy = 8;
inline constexpr std::uint64_t kCutout = 9;
inline constexpr std::uint64_t kDataset = 10;
inline constexpr std::uint64_t kEval = 11;
}  // namespace streams

}  // namespace augnas
