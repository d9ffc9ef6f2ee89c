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

#include <gtest/gtest.h>

#include "augnas/error.hpp"
#include "augnas/ops.hpp"
#include "augnas/sampling.hpp"
#include "support/grad_cases.hpp"

namespace augnas {
namespace {

using testing::random_tensor;

TEST(Tensor, RejectsMismatchedBuffer) {
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<float>(5)), ShapeError);
  Tensor t(Shape{2, 3}, 1.5f);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.dim(-1), 3);
  EXPECT_THROW(t.item(), ShapeError);
  EXPECT_EQ(Tensor::scalar(2.0f).item(), 2.0f);
}

TEST(Primitive, AddIsElementwise) {
  Tape tape;
  const Var out = add(tape.constant(Tensor::vector({1, 2})), tape.constant(Tensor::vector({3, 4})));
  EXPECT_EQ(out.value(), Tensor::vector({4, 6}));
}

TEST(Primitive, ShapeMismatchNamesDims) {
  Tape tape;
  try {
    add(tape.constant(Tensor(Shape{2, 3})), tape.constant(Tensor(Shape{3, 2})));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3]"), std::string::npos) << e.what();
  }
}

TEST(Primitive, IdentityConvolutionReturnsInput) {
  Rng rng(1);
  Tape tape;
  const Tensor x = random_tensor({2, 3, 4, 5}, rng);
  Tensor k(Shape{3, 3, 1, 1});
  for (int c = 0; c < 3; ++c) k[static_cast<std::size_t>(c * 3 + c)] = 1.0f;
  EXPECT_EQ(conv2d(tape.constant(x), tape.constant(k)).value(), x);
}

TEST(Primitive, MatmulMatchesTripleLoop) {
  Rng rng(2);
  const Tensor a = random_tensor({2, 3}, rng), b = random_tensor({3, 2}, rng);
  Tape tape;
  const Tensor got = matmul(tape.constant(a), tape.constant(b)).value();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += static_cast<double>(a[i * 3 + k]) * b[k * 2 + j];
      EXPECT_NEAR(got[static_cast<std::size_t>(i * 2 + j)], acc, 1e-6);
    }
  }
}

TEST(Primitive, ConvolutionMatchesDirectSum) {
  Rng rng(3);
  const Tensor x = random_tensor({1, 2, 5, 5}, rng), w = random_tensor({3, 2, 3, 3}, rng);
  Tape tape;
  const Tensor got = conv2d(tape.constant(x), tape.constant(w), {2, 1, 1}).value();
  ASSERT_EQ(got.shape(), (Shape{1, 3, 3, 3}));
  for (int o = 0; o < 3; ++o) {
    for (int oy = 0; oy < 3; ++oy) {
      for (int ox = 0; ox < 3; ++ox) {
        double acc = 0.0;
        for (int c = 0; c < 2; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int y = oy * 2 - 1 + ky, xx = ox * 2 - 1 + kx;
              if (y < 0 || y >= 5 || xx < 0 || xx >= 5) continue;
              acc += static_cast<double>(x[static_cast<std::size_t>((c * 5 + y) * 5 + xx)]) *
                     w[static_cast<std::size_t>(((o * 2 + c) * 3 + ky) * 3 + kx)];
            }
          }
        }
        EXPECT_NEAR(got[static_cast<std::size_t>((o * 3 + oy) * 3 + ox)], acc, 1e-5);
      }
    }
  }
}

TEST(Primitive, AveragePoolExcludesPadding) {
  Tape tape;
  const Var out = avg_pool2d(tape.constant(Tensor(Shape{1, 1, 2, 2}, 1.0f)));
  for (float v : out.value().values()) EXPECT_FLOAT_EQ(v, 1.0f);
}

TEST(Primitive, MaxPoolTieRoutesToLowestIndex) {
  Tape tape;
  const Var x = tape.leaf(Tensor(Shape{1, 1, 2, 2}, 0.5f), true);
  const Var out = max_pool2d(x, {2, 2, 0});
  const Gradients g = tape.backward(sum(out));
  EXPECT_EQ(g.of(x), Tensor(Shape{1, 1, 2, 2}, std::vector<float>{1, 0, 0, 0}));
}

TEST(Primitive, DispatchCoversGenericEntryPoint) {
  Tape tape;
  const Var a = tape.constant(Tensor::vector({1, 2}));
  const Var b = tape.constant(Tensor::vector({3, 4}));
  const std::vector<Var> ab = {a, b};
  EXPECT_EQ(primitive_forward(OpKind::kAdd, ab).value(), Tensor::vector({4, 6}));
  const std::vector<Var> only_a = {a};
  EXPECT_EQ(primitive_forward(OpKind::kClamp, only_a, {{"lo", 0.0}, {"hi", 1.5}}).value(),
            Tensor::vector({1, 1.5}));
  EXPECT_THROW(primitive_forward(OpKind::kClamp, only_a, {{"lo", 0.0}}), ValueError);
  EXPECT_THROW(op_kind_from_name("fft"), ValueError);
  EXPECT_EQ(op_kind_from_name(op_kind_name(OpKind::kConv2d)), OpKind::kConv2d);
}

TEST(Softmax, UniformForZeroLogits) {
  Tape tape;
  const Tensor out = softmax_temperature(tape.constant(Tensor(Shape{4}, 0.0f)), 1.0f).value();
  for (float v : out.values()) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Softmax, ClosedFormTwoClass) {
  Tape tape;
  const Tensor out = softmax_temperature(tape.constant(Tensor::vector({1, 0})), 1.0f).value();
  const double e = std::exp(1.0);
  EXPECT_NEAR(out[0], e / (e + 1), 1e-6);
  EXPECT_NEAR(out[1], 1 / (e + 1), 1e-6);
}

TEST(Softmax, SumsToOneAcrossTemperatures) {
  Rng rng(4);
  for (float eta : {0.01f, 0.1f, 1.0f, 10.0f, 100.0f}) {
    for (int trial = 0; trial < 20; ++trial) {
      Tape tape;
      const Tensor out = softmax_temperature(tape.constant(random_tensor({7}, rng, -20, 20)), eta).value();
      double s = 0.0;
      for (float v : out.values()) {
        EXPECT_GE(v, 0.0f);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(Softmax, RejectsNonPositiveTemperature) {
  Tape tape;
  const Var z = tape.constant(Tensor(Shape{3}, 0.0f));
  EXPECT_THROW(softmax_temperature(z, 0.0f), ValueError);
  EXPECT_THROW(softmax_temperature(z, -1.0f), ValueError);
  Rng rng(0);
  EXPECT_THROW(gumbel_softmax_sample(z, 0.0f, rng), ValueError);
}

TEST(GumbelSoftmax, DeterministicUnderSeed) {
  Tape tape;
  const Var z = tape.constant(Tensor(Shape{3}, 0.0f));
  Rng a(9), b(9);
  EXPECT_EQ(gumbel_softmax_sample(z, 1.0f, a).value(), gumbel_softmax_sample(z, 1.0f, b).value());
}

TEST(GumbelSoftmax, LowTemperatureIsNearlyOneHot) {
  Rng rng(5);
  int peaked = 0;
  for (int i = 0; i < 1000; ++i) {
    Tape tape;
    const Tensor out = gumbel_softmax_sample(tape.constant(Tensor(Shape{3}, 0.0f)), 0.01f, rng).value();
    if (*std::max_element(out.values().begin(), out.values().end()) > 0.99f) ++peaked;
  }
  EXPECT_GE(peaked, 950);
}

TEST(GumbelSoftmax, HighTemperatureIsNearlyUniform) {
  Rng rng(6);
  std::vector<double> mean(3, 0.0);
  for (int i = 0; i < 1000; ++i) {
    Tape tape;
    const Tensor out = gumbel_softmax_sample(tape.constant(Tensor(Shape{3}, 0.0f)), 100.0f, rng).value();
    for (int k = 0; k < 3; ++k) mean[static_cast<std::size_t>(k)] += out[static_cast<std::size_t>(k)] / 1000.0;
  }
  for (double m : mean) EXPECT_NEAR(m, 1.0 / 3.0, 0.02);
}

TEST(RelaxedBernoulli, SymmetricMeanAtHalf) {
  Rng rng(7);
  Tape tape;
  const Tensor s = relaxed_bernoulli(tape.constant(Tensor::vector({0.5f})), 0.5f, rng, 10000).value();
  const double m = std::accumulate(s.values().begin(), s.values().end(), 0.0) / 10000.0;
  EXPECT_GE(m, 0.48);
  EXPECT_LE(m, 0.52);
}

// The relaxed sample exceeds one half exactly when logit(p) + g1 - g2 > 0,
// which happens with probability p at any temperature.
TEST(RelaxedBernoulli, ExceedsHalfWithProbabilityP) {
  Rng rng(17);
  for (float p : {0.2f, 0.5f, 0.8f}) {
    for (float eta : {0.1f, 1.0f, 5.0f}) {
      Tape tape;
      const Tensor s = relaxed_bernoulli(tape.constant(Tensor::vector({p})), eta, rng, 10000).value();
      const auto above = std::count_if(s.values().begin(), s.values().end(), [](float v) { return v > 0.5f; });
      EXPECT_NEAR(above / 10000.0, p, 0.02) << "p=" << p << " eta=" << eta;
    }
  }
}

TEST(RelaxedBernoulli, SaturatesAtClampedOne) {
  Rng rng(8);
  Tape tape;
  const Tensor s = relaxed_bernoulli(tape.constant(Tensor::vector({2.0f})), 1.0f, rng, 10000).value();
  const auto high = std::count_if(s.values().begin(), s.values().end(), [](float v) { return v > 0.99f; });
  EXPECT_GE(high, 9900);
  for (float v : s.values()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(RelaxedBernoulli, DeterministicUnderSeed) {
  Tape tape;
  const Var p = tape.constant(Tensor::vector({0.3f}));
  Rng a(3), b(3);
  EXPECT_EQ(relaxed_bernoulli(p, 1.0f, a).value(), relaxed_bernoulli(p, 1.0f, b).value());
}

TEST(CrossEntropy, UniformLogits) {
  Tape tape;
  const std::vector<int> labels = {3, 7};
  const Var l = cross_entropy(tape.constant(Tensor(Shape{2, 10}, 0.0f)), labels);
  EXPECT_NEAR(l.value().item(), std::log(10.0), 1e-6);
}

TEST(CrossEntropy, SaturatedCorrectPrediction) {
  Tensor logits(Shape{3, 4}, 0.0f);
  const std::vector<int> labels = {0, 3, 2};
  for (int i = 0; i < 3; ++i) logits[static_cast<std::size_t>(i * 4 + labels[static_cast<std::size_t>(i)])] = 1000.0f;
  Tape tape;
  EXPECT_LT(cross_entropy(tape.constant(logits), labels).value().item(), 1e-4);
}

TEST(CrossEntropy, MatchesLogSumExp) {
  Rng rng(9);
  const Tensor logits = random_tensor({4, 3}, rng, -3, 3);
  const std::vector<int> labels = {2, 0, 1, 1};
  double expect = 0.0;
  for (int i = 0; i < 4; ++i) {
    double z = 0.0;
    for (int c = 0; c < 3; ++c) z += std::exp(static_cast<double>(logits[static_cast<std::size_t>(i * 3 + c)]));
    expect += std::log(z) - logits[static_cast<std::size_t>(i * 3 + labels[static_cast<std::size_t>(i)])];
  }
  Tape tape;
  EXPECT_NEAR(cross_entropy(tape.constant(logits), labels).value().item(), expect / 4, 1e-5);
}

TEST(CrossEntropy, RejectsOutOfRangeLabel) {
  Tape tape;
  const std::vector<int> labels = {3};
  EXPECT_THROW(cross_entropy(tape.constant(Tensor(Shape{1, 3})), labels), ValueError);
}

TEST(Backward, SumGivesOnes) {
  Rng rng(10);
  Tape tape;
  const Var x = tape.leaf(random_tensor({2, 3, 4}, rng), true);
  const Gradients g = tape.backward(sum(x));
  EXPECT_EQ(g.of(x), Tensor(Shape{2, 3, 4}, 1.0f));
}

TEST(Backward, DisconnectedLeafGetsZeros) {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1, 2}), true);
  const Var y = tape.leaf(Tensor::vector({3, 4, 5}), true);
  const Gradients g = tape.backward(sum(x));
  EXPECT_EQ(g.of(y), Tensor(Shape{3}, 0.0f));
}

TEST(Backward, ConstantsReceiveNoGradient) {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1, 2}), true);
  const Var c = tape.constant(Tensor::vector({3, 4}));
  const Gradients g = tape.backward(sum(mul(x, c)));
  EXPECT_EQ(g.of(x), Tensor::vector({3, 4}));
  EXPECT_FALSE(g.contains(c));
  EXPECT_THROW(g.of(c), TapeError);
}

TEST(Backward, RejectsNonScalarAndSecondSweep) {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1, 2}), true);
  EXPECT_THROW(tape.backward(x), TapeError);
  const Var s = sum(x);
  tape.backward(s);
  EXPECT_TRUE(tape.frozen());
  EXPECT_THROW(tape.backward(s), TapeError);
  EXPECT_THROW(add(x, x), TapeError);
}

TEST(Backward, VisitsEveryNodeOnce) {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1, 2}), true);
  const Var y = mul(add(x, x), exp(x));
  const Var loss = sum(y);
  tape.backward(loss);
  EXPECT_EQ(tape.backward_visits(), tape.size());
  EXPECT_EQ(tape.backward_calls(), 1u);
}

TEST(Backward, BitIdenticalAcrossRuns) {
  auto run = [] {
    Rng rng(77);
    Tape tape;
    const Var x = tape.leaf(random_tensor({2, 2, 5, 5}, rng), true);
    const Var w = tape.leaf(random_tensor({3, 2, 3, 3}, rng), true);
    const Var z = tape.leaf(random_tensor({4}, rng), true);
    const Var y = conv2d(relu(x), w, {1, 1, 1});
    const Var loss = add(mean(y), sum(gumbel_softmax_sample(z, 0.5f, rng)));
    const Gradients g = tape.backward(loss);
    return std::vector<Tensor>{y.value(), g.of(x), g.of(w), g.of(z)};
  };
  EXPECT_EQ(run(), run());
}

class PrimitiveGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PrimitiveGradient, MatchesCentralDifferences) {
  const auto cases = testing::primitive_cases();
  const auto& c = cases.at(GetParam());
  for (int seed = 0; seed < testing::kGradSeeds; ++seed) {
    const auto r = testing::run_grad_case(c, seed);
    EXPECT_LT(r.max_error, testing::kGradTolerance) << c.name << " seed " << seed << " " << r.worst;
  }
}

INSTANTIATE_TEST_SUITE_P(AllPrimitives, PrimitiveGradient,
                         ::testing::Range<std::size_t>(0, testing::primitive_cases().size()),
                         [](const auto& info) { return testing::primitive_cases()[info.param].name; });

}  // namespace
}  // namespace augnas
