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

#include <gtest/gtest.h>

#include "augnas/error.hpp"
#include "augnas/policy.hpp"
#include "augnas/policy_io.hpp"
#include "support/grad_cases.hpp"

namespace augnas {
namespace {

using testing::random_tensor;

float max_abs_diff(const Tensor& a, const Tensor& b) {
  float m = 0.0f;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor stage_output(const Tensor& x, const OperationStage& st, const std::vector<ImageOpId>& ops,
                    std::uint64_t seed, NoiseMode noise = NoiseMode::kPerBatch) {
  Tape tape;
  Rng rng(seed);
  const StageVars v{tape.constant(st.z), tape.constant(st.p), tape.constant(st.mu)};
  return apply_stage_train(tape.constant(x), v, ops, {1.0f, noise}, rng).value();
}

TEST(Policy, ParameterCountMatchesFormula) {
  const Policy p(default_op_set(), 10, 2);
  EXPECT_EQ(p.parameter_count(), 960u);
  std::size_t total = 0;
  for (const Tensor* t : p.parameters()) total += t->numel();
  EXPECT_EQ(total, 960u);
  EXPECT_EQ(Policy({ImageOpId::kInvert}, 3, 4).parameter_count(), 36u);
}

TEST(Policy, InitialisationIsUniformAndCentred) {
  const Policy p(default_op_set(), 2, 2);
  for (const auto& sp : p.sub_policies()) {
    for (const auto& st : sp.stages) {
      for (float v : st.z.values()) EXPECT_EQ(v, 0.0f);
      for (float v : st.p.values()) EXPECT_EQ(v, 0.5f);
      for (float v : st.mu.values()) EXPECT_EQ(v, 0.5f);
    }
  }
}

TEST(Policy, SnapshotIsUniformAtInitAndPure) {
  Policy p(default_op_set(), 3, 2);
  const Tensor snap = p.distribution_snapshot();
  ASSERT_EQ(snap.shape(), (Shape{6, 16}));
  for (float v : snap.values()) EXPECT_NEAR(v, 1.0f / 16.0f, 1e-7);
  Rng rng(1);
  for (Tensor* t : p.parameters()) *t = random_tensor(t->shape(), rng, -5, 5);
  const Tensor a = p.distribution_snapshot();
  EXPECT_EQ(a, p.distribution_snapshot());
  for (int r = 0; r < 6; ++r) {
    double s = 0.0;
    for (int c = 0; c < 16; ++c) s += a[static_cast<std::size_t>(r * 16 + c)];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Policy, ReadUnitProjects) {
  EXPECT_EQ(read_unit(-0.5f), 0.0f);
  EXPECT_EQ(read_unit(0.25f), 0.25f);
  EXPECT_EQ(read_unit(3.0f), 1.0f);
}

TEST(Stage, ClosedGatesLeaveInputUnchanged) {
  Rng rng(2);
  const Tensor x = random_tensor({4, 3, 8, 8}, rng, 0, 1);
  OperationStage st{Tensor(Shape{16}, 0.0f), Tensor(Shape{16}, -1.0f), Tensor(Shape{16}, 0.8f)};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LE(max_abs_diff(stage_output(x, st, default_op_set(), seed), x), 1e-3f);
  }
}

TEST(Stage, SingleInvertWithOpenGate) {
  Rng rng(3);
  const Tensor x = random_tensor({2, 3, 4, 4}, rng, 0, 1);
  OperationStage st{Tensor(Shape{1}, 0.0f), Tensor(Shape{1}, 1.0f), Tensor(Shape{1}, 0.5f)};
  const Tensor y = stage_output(x, st, {ImageOpId::kInvert}, 4);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(y[i], 1.0f - x[i], 1e-3);
}

TEST(Stage, MixtureWeightsFormSimplex) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Tape tape;
    Rng g(static_cast<std::uint64_t>(trial));
    const Tensor w = gumbel_softmax_sample(tape.constant(random_tensor({16}, rng, -3, 3)), 1.0f, g).value();
    double s = 0.0;
    for (float v : w.values()) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Stage, RejectsMismatchedParameters) {
  const Tensor x(Shape{1, 3, 4, 4}, 0.5f);
  OperationStage st{Tensor(Shape{2}), Tensor(Shape{3}), Tensor(Shape{3})};
  EXPECT_THROW(stage_output(x, st, default_op_set(), 0), ShapeError);
}

TEST(Stage, PerImageNoiseDiffersAcrossBatch) {
  Tensor x(Shape{2, 3, 4, 4}, 0.3f);
  OperationStage st{Tensor(Shape{2}, 0.0f), Tensor(Shape{2}, 0.5f), Tensor(Shape{2}, 0.5f)};
  const std::vector<ImageOpId> ops = {ImageOpId::kInvert, ImageOpId::kBrightness};
  const Tensor batch = stage_output(x, st, ops, 5, NoiseMode::kPerBatch);
  EXPECT_EQ(batch[0], batch[48]);
  const Tensor image = stage_output(x, st, ops, 5, NoiseMode::kPerImage);
  EXPECT_NE(image[0], image[48]);
}

TEST(Stage, GradientsReachEveryParameter) {
  Rng rng(6);
  const std::vector<ImageOpId> ops = {ImageOpId::kRotate, ImageOpId::kContrast, ImageOpId::kBrightness};
  Tape tape;
  Rng noise(7);
  const Var x = tape.leaf(testing::smooth_image({2, 3, 6, 6}, rng), true);
  const StageVars v{tape.leaf(Tensor(Shape{3}, 0.0f), true), tape.leaf(Tensor(Shape{3}, 0.5f), true),
                    tape.leaf(Tensor(Shape{3}, 0.4f), true)};
  const Var y = apply_stage_train(x, v, ops, {1.0f, NoiseMode::kPerBatch}, noise);
  const Gradients g = tape.backward(mean(mul(y, y)));
  for (const Var& p : {x, v.z, v.p, v.mu}) {
    const auto vals = g.of(p).values();
    EXPECT_TRUE(std::any_of(vals.begin(), vals.end(), [](float f) { return f != 0.0f; }));
  }
}

TEST(SubPolicy, SingleStageEqualsStage) {
  Rng rng(8);
  const Tensor x = random_tensor({2, 3, 5, 5}, rng, 0, 1);
  const OperationStage st{random_tensor({16}, rng), random_tensor({16}, rng, 0, 1),
                          random_tensor({16}, rng, 0, 1)};
  Tape tape;
  Rng r(9);
  const std::vector<StageVars> vars = {{tape.constant(st.z), tape.constant(st.p), tape.constant(st.mu)}};
  const Tensor chain =
      apply_subpolicy_train(tape.constant(x), vars, default_op_set(), {1.0f, NoiseMode::kPerBatch}, r).value();
  EXPECT_EQ(chain, stage_output(x, st, default_op_set(), 9));
}

TEST(SubPolicy, TwoClosedStagesPreserveInput) {
  Rng rng(10);
  const Tensor x = random_tensor({2, 3, 8, 8}, rng, 0, 1);
  Tape tape;
  Rng r(11);
  std::vector<StageVars> vars;
  for (int k = 0; k < 2; ++k) {
    vars.push_back({tape.constant(Tensor(Shape{16}, 0.0f)), tape.constant(Tensor(Shape{16}, 0.0f)),
                    tape.constant(Tensor(Shape{16}, 0.7f))});
  }
  const Tensor y =
      apply_subpolicy_train(tape.constant(x), vars, default_op_set(), {1.0f, NoiseMode::kPerBatch}, r).value();
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_LE(max_abs_diff(y, x), 2e-3f);
}

TEST(PolicyTrain, SingleSubPolicyAlwaysIndexZero) {
  const Policy p(default_op_set(), 1, 1);
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    Tape tape;
    const auto vars = bind_policy(tape, p, false);
    EXPECT_EQ(apply_policy_train(tape.constant(Tensor(Shape{1, 3, 4, 4}, 0.5f)), vars, p,
                                 NoiseMode::kPerBatch, rng)
                  .second,
              0);
  }
}

TEST(PolicyTrain, UniformChoiceOverTenSubPolicies) {
  const Policy p({ImageOpId::kInvert}, 10, 1);
  Tape tape;
  const auto vars = bind_policy(tape, p, false);
  const Var x = tape.constant(Tensor(Shape{1, 1, 2, 2}, 0.5f));
  std::vector<int> counts(10, 0);
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(apply_policy_train(x, vars, p, NoiseMode::kPerBatch, rng).second)];
  for (int c : counts) {
    EXPECT_GE(c / 10000.0, 0.08);
    EXPECT_LE(c / 10000.0, 0.12);
  }
}

TEST(PolicyTrain, SeedFixesIndexSequence) {
  const Policy p(default_op_set(), 5, 2);
  auto sequence = [&p] {
    Rng rng(14);
    std::vector<int> out;
    for (int i = 0; i < 10; ++i) {
      Tape tape;
      const auto vars = bind_policy(tape, p, false);
      out.push_back(apply_policy_train(tape.constant(Tensor(Shape{1, 3, 4, 4}, 0.5f)), vars, p,
                                       NoiseMode::kPerBatch, rng)
                        .second);
    }
    return out;
  };
  EXPECT_EQ(sequence(), sequence());
}

TEST(PolicyTrain, RejectsEmptyPolicy) {
  const Policy p(default_op_set(), 1, 1);
  Tape tape;
  Rng rng(0);
  EXPECT_THROW(apply_policy_train(tape.constant(Tensor(Shape{1, 3, 4, 4}, 0.5f)), PolicyVars{}, p,
                                  NoiseMode::kPerBatch, rng),
               ValueError);
}

TEST(PolicyInfer, PeakedLogitDominates) {
  Policy p(default_op_set(), 1, 1);
  p.stage(0, 0).z[7] = 20.0f;
  Rng rng(15);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += sample_stage_op(p.stage(0, 0), p.eta(), rng) == 7;
  EXPECT_GE(hits, 999);
}

TEST(PolicyInfer, ZeroProbabilityNeverApplies) {
  Policy p(default_op_set(), 3, 2);
  for (auto& sp : p.sub_policies()) {
    for (auto& st : sp.stages) st.p.fill(0.0f);
  }
  Rng rng(16);
  const Tensor x = random_tensor({2, 3, 8, 8}, rng, 0, 1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(apply_policy_infer(x, p, rng), x);
}

TEST(PolicyInfer, RandomPolicyPreservesRangeAndShape) {
  Policy p(default_op_set(), 4, 2);
  Rng rng(17);
  for (Tensor* t : p.parameters()) *t = random_tensor(t->shape(), rng, -0.5, 1.5);
  const Tensor x = random_tensor({3, 3, 8, 8}, rng, 0, 1);
  for (int i = 0; i < 50; ++i) {
    const Tensor y = apply_policy_infer(x, p, rng);
    ASSERT_EQ(y.shape(), x.shape());
    for (float v : y.values()) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(PolicyJson, RoundTripIsExact) {
  Policy p(default_op_set(), 3, 2, 0.7f);
  Rng rng(18);
  for (Tensor* t : p.parameters()) *t = random_tensor(t->shape(), rng, -10, 10);
  p.stage(1, 1).mu[3] = 1e-38f;
  p.stage(2, 0).p[0] = 0.1f;
  const std::string text = policy_to_json(p);
  const Policy back = policy_from_json(text);
  EXPECT_TRUE(back == p);
  EXPECT_EQ(policy_to_json(back), text);
}

TEST(PolicyJson, MalformedInputNamesLocation) {
  EXPECT_THROW(policy_from_json("{"), ParseError);
  EXPECT_THROW(policy_from_json(R"({"eta": 1, "op_set": ["warp"], "sub_policies": []})"), ParseError);
  try {
    policy_from_json(R"({"eta": 1, "op_set": ["invert"], "sub_policies": [[{"z": [0], "p": [0, 1], "mu": [0]}]]})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("p"), std::string::npos);
  }
}

class AugmentationGradient : public ::testing::TestWithParam<std::size_t> {};

std::vector<testing::GradCase> augmentation_cases() {
  auto c = testing::image_op_cases();
  c.push_back(testing::stage_case(NoiseMode::kPerBatch));
  c.push_back(testing::stage_case(NoiseMode::kPerImage));
  return c;
}

TEST_P(AugmentationGradient, MatchesCentralDifferences) {
  const auto cases = augmentation_cases();
  const auto& c = cases.at(GetParam());
  for (int seed = 0; seed < testing::kGradSeeds; ++seed) {
    const auto r = testing::run_grad_case(c, seed);
    EXPECT_LT(r.max_error, testing::kGradTolerance) << c.name << " seed " << seed << " " << r.worst;
  }
}

INSTANTIATE_TEST_SUITE_P(AllAugmentations, AugmentationGradient,
                         ::testing::Range<std::size_t>(0, augmentation_cases().size()),
                         [](const auto& info) { return augmentation_cases()[info.param].name; });

}  // namespace
}  // namespace augnas
