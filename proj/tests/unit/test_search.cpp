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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "augnas/error.hpp"
#include "augnas/search.hpp"
#include "support/toy.hpp"

namespace augnas {
namespace {

using testing::first_rows;
using testing::make_state;
using testing::make_toy;

std::uint64_t weights_sum(const JointState& s) { return checksum(s.weight_parameters()); }
std::uint64_t search_sum(const JointState& s) { return checksum(s.search_parameters()); }

TEST(JointState, SearchParametersCoverAlphaAndPolicy) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  // 2 cells x 2 edges of alpha, then L * K * 3 policy tensors.
  EXPECT_EQ(s.search_parameters().size(), 4u + 2u * 2u * 3u);
  EXPECT_EQ(s.policy.parameter_count(), 2u * 2u * 16u * 3u);
  EXPECT_EQ(s.weight_parameters().size(), s.network.weights().size());
}

TEST(JointState, InitialisationIsSeeded) {
  const auto toy = make_toy();
  const JointState a = make_state(toy), b = make_state(toy);
  EXPECT_EQ(weights_sum(a), weights_sum(b));
  EXPECT_EQ(search_sum(a), search_sum(b));
  auto other = toy;
  other.search.seed = 4;
  EXPECT_NE(weights_sum(a), weights_sum(make_state(other)));
}

TEST(Steps, ValStepUpdatesOnlySearchParameters) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  const auto batch = first_rows(toy.splits.val.data, 16);
  const auto w0 = weights_sum(s);
  const Tensor alpha0 = *s.network.alpha_parameters()[0];
  const Policy policy0 = s.policy;
  const StepResult r = val_step(s, batch, toy.search, toy.pre, 0, 0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_EQ(weights_sum(s), w0);
  EXPECT_NE(*s.network.alpha_parameters()[0], alpha0);
  const int l = r.sub_policy;
  EXPECT_NE(s.policy.stage(l, 0).z, policy0.stage(l, 0).z);
  EXPECT_EQ(s.policy.stage(1 - l, 0).z, policy0.stage(1 - l, 0).z);
  EXPECT_EQ(s.counters.val_steps, 1);
  EXPECT_EQ(s.counters.backward_calls, 1);
}

TEST(Steps, TrainStepUpdatesOnlyWeights) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  const auto batch = first_rows(toy.splits.train.data, 16);
  const auto w0 = weights_sum(s);
  const auto a0 = search_sum(s);
  train_step(s, batch, toy.search, toy.pre, 0, 0, 0.025f);
  EXPECT_NE(weights_sum(s), w0);
  EXPECT_EQ(search_sum(s), a0);
  EXPECT_EQ(s.counters.train_steps, 1);
  EXPECT_EQ(s.counters.backward_calls, 1);
}

TEST(Steps, ClippedUpdateRespectsBound) {
  auto toy = make_toy();
  toy.search.w.grad_clip = 0.05f;
  toy.search.w.weight_decay = 0.0f;
  JointState s = make_state(toy);
  std::vector<Tensor> before;
  for (const Tensor* t : s.weight_parameters()) before.push_back(*t);
  const float lr = 0.1f;
  const StepResult r = train_step(s, first_rows(toy.splits.train.data, 16), toy.search, toy.pre, 0, 0, lr);
  EXPECT_GT(r.grad_norm, 0.05);
  double sq = 0.0;
  const auto after = s.weight_parameters();
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::size_t j = 0; j < before[i].numel(); ++j) {
      const double d = static_cast<double>((*after[i])[j]) - before[i][j];
      sq += d * d;
    }
  }
  EXPECT_LE(std::sqrt(sq), lr * 0.05 * (1 + 1e-3));
  EXPECT_GT(std::sqrt(sq), lr * 0.05 * 0.99);
}

TEST(Steps, StepsAreDeterministic) {
  const auto toy = make_toy();
  JointState a = make_state(toy), b = make_state(toy);
  const auto vb = first_rows(toy.splits.val.data, 16);
  const auto tb = first_rows(toy.splits.train.data, 16);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(val_step(a, vb, toy.search, toy.pre, 0, i).loss, val_step(b, vb, toy.search, toy.pre, 0, i).loss);
    EXPECT_EQ(train_step(a, tb, toy.search, toy.pre, 0, i, 0.02f).loss,
              train_step(b, tb, toy.search, toy.pre, 0, i, 0.02f).loss);
  }
  EXPECT_EQ(weights_sum(a), weights_sum(b));
  EXPECT_EQ(search_sum(a), search_sum(b));
}

TEST(Steps, OverfitsFixedBatch) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  const auto batch = first_rows(toy.splits.train.data, 16);
  const double before = testing::fixed_draw_loss(s, batch, toy.search, toy.pre);
  for (int i = 0; i < 50; ++i) train_step(s, batch, toy.search, toy.pre, 0, i, toy.search.w.lr);
  const double after = testing::fixed_draw_loss(s, batch, toy.search, toy.pre);
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
}

TEST(Steps, FixedDrawLossLeavesStateUntouched) {
  const auto toy = make_toy();
  const JointState s = make_state(toy);
  const auto batch = first_rows(toy.splits.train.data, 16);
  const double a = testing::fixed_draw_loss(s, batch, toy.search, toy.pre);
  EXPECT_EQ(testing::fixed_draw_loss(s, batch, toy.search, toy.pre), a);
  EXPECT_EQ(s.counters.train_steps, 0);
}

TEST(Steps, NonFiniteLossAbortsWithContext) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  s.network.weights().values.back()[0] = std::nanf("");
  try {
    train_step(s, first_rows(toy.splits.train.data, 16), toy.search, toy.pre, 1, 7, 0.02f);
    FAIL();
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch=1"), std::string::npos) << what;
    EXPECT_NE(what.find("step=7"), std::string::npos) << what;
  }
}

TEST(Steps, SearchPipelineOrder) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  std::vector<PipelineStage> seen;
  Hooks hooks;
  hooks.on_stage = [&](PipelineStage st) { seen.push_back(st); };
  val_step(s, first_rows(toy.splits.val.data, 4), toy.search, toy.pre, 0, 0, hooks);
  train_step(s, first_rows(toy.splits.train.data, 4), toy.search, toy.pre, 0, 0, 0.01f, hooks);
  const std::vector<PipelineStage> expect = {PipelineStage::kBaseline, PipelineStage::kPolicy,
                                             PipelineStage::kNormalize, PipelineStage::kBaseline,
                                             PipelineStage::kPolicy, PipelineStage::kNormalize};
  EXPECT_EQ(seen, expect);
}

TEST(FinalPipeline, OrderIncludesCutoutLast) {
  const auto toy = make_toy();
  const Policy p(toy.aug_ops, 2, 2);
  std::vector<PipelineStage> seen;
  Hooks hooks;
  hooks.on_stage = [&](PipelineStage st) { seen.push_back(st); };
  final_train_batch(first_rows(toy.splits.train.data, 4), p, toy.pre, 1, 0, 0, hooks);
  const std::vector<PipelineStage> expect = {PipelineStage::kBaseline, PipelineStage::kPolicy,
                                             PipelineStage::kNormalize, PipelineStage::kCutout};
  EXPECT_EQ(seen, expect);
}

TEST(FinalPipeline, InertPolicyEqualsBaselineAndCutout) {
  const auto toy = make_toy();
  Policy p(toy.aug_ops, 3, 2);
  for (auto& sp : p.sub_policies()) {
    for (auto& st : sp.stages) st.p.fill(0.0f);
  }
  const auto batch = first_rows(toy.splits.train.data, 8);
  for (std::int64_t step = 0; step < 5; ++step) {
    const Rng master(9);
    Rng pre_rng = master.derive({streams::kTrainPreprocess, 2, static_cast<std::uint64_t>(step)});
    Rng cut_rng = master.derive({streams::kCutout, 2, static_cast<std::uint64_t>(step)});
    const Tensor expect = cutout(normalize(baseline_preprocess(batch, toy.pre, pre_rng, true),
                                           toy.pre.mean, toy.pre.std),
                                 toy.pre.cutout_size, cut_rng);
    EXPECT_EQ(final_train_batch(batch, p, toy.pre, 9, 2, step), expect);
  }
}

TEST(Search, OneEpochOnSixtyFourSamples) {
  auto toy = make_toy(160);
  toy.search.epochs = 1;
  const SearchResult r = search(toy.net, toy.arch_ops, toy.aug_ops, toy.search, toy.pre,
                                toy.splits.train, toy.splits.val);
  ASSERT_EQ(toy.splits.train.data.size(), 64u);
  ASSERT_EQ(r.log.records.size(), 1u);
  const auto& rec = r.log.records[0];
  EXPECT_TRUE(std::isfinite(rec.train_loss));
  EXPECT_GE(rec.val_accuracy, 0.0);
  EXPECT_LE(rec.val_accuracy, 1.0);
  EXPECT_EQ(r.genotype.size(), 2u);
  EXPECT_EQ(rec.policy_dist.shape(), (Shape{4, 16}));
  for (float v : rec.policy_dist.values()) EXPECT_NEAR(v, 1.0f / 16.0f, 1e-7);
}

TEST(Search, SeparationAndCountersAcrossEpochs) {
  const auto toy = make_toy();
  JointState s = make_state(toy);
  SearchLog log;
  std::uint64_t w_before = 0, a_before = 0;
  int violations = 0, steps = 0;
  Hooks hooks;
  hooks.before_step = [&](StepKind, const JointState& st) {
    w_before = weights_sum(st);
    a_before = search_sum(st);
  };
  hooks.after_step = [&](StepKind kind, const JointState& st) {
    ++steps;
    if (kind == StepKind::kVal && weights_sum(st) != w_before) ++violations;
    if (kind == StepKind::kTrain && search_sum(st) != a_before) ++violations;
  };
  run_search(s, toy.splits.train, toy.splits.val, toy.search, toy.pre, log, hooks);
  EXPECT_EQ(violations, 0);
  const std::int64_t per_epoch = static_cast<std::int64_t>(toy.splits.train.data.size() / 16);
  EXPECT_EQ(s.counters.val_steps, 2 * per_epoch);
  EXPECT_EQ(s.counters.train_steps, 2 * per_epoch);
  EXPECT_EQ(s.counters.backward_calls, steps);
  EXPECT_EQ(s.epoch, 2);
}

TEST(Search, CheckpointResumeIsExact) {
  const auto toy = make_toy();
  JointState straight = make_state(toy);
  SearchLog straight_log;
  run_search(straight, toy.splits.train, toy.splits.val, toy.search, toy.pre, straight_log);

  const auto path = std::filesystem::temp_directory_path() / "augnas_test_checkpoint.bin";
  auto one_epoch = toy.search;
  one_epoch.epochs = 1;
  {
    JointState first = make_state(toy);
    SearchLog log;
    run_search(first, toy.splits.train, toy.splits.val, one_epoch, toy.pre, log);
    save_checkpoint(path, first, log);
  }
  JointState resumed = make_state(toy);
  SearchLog resumed_log;
  load_checkpoint(path, resumed, resumed_log);
  EXPECT_EQ(resumed.epoch, 1);
  run_search(resumed, toy.splits.train, toy.splits.val, toy.search, toy.pre, resumed_log);
  std::filesystem::remove(path);

  EXPECT_EQ(weights_sum(resumed), weights_sum(straight));
  EXPECT_EQ(search_sum(resumed), search_sum(straight));
  EXPECT_EQ(resumed.counters, straight.counters);
  EXPECT_EQ(resumed_log.csv(), straight_log.csv());
  EXPECT_TRUE(resumed.w_opt == straight.w_opt);
  EXPECT_TRUE(resumed.search_opt == straight.search_opt);
}

TEST(Search, CorruptCheckpointRejected) {
  const auto toy = make_toy();
  const auto path = std::filesystem::temp_directory_path() / "augnas_test_bad_checkpoint.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "AUGNASCK truncated";
  }
  JointState s = make_state(toy);
  SearchLog log;
  EXPECT_THROW(load_checkpoint(path, s, log), ParseError);
  auto other = toy;
  other.net.init_channels = 6;
  JointState wrong = make_state(other);
  save_checkpoint(path, wrong, log);
  EXPECT_THROW(load_checkpoint(path, s, log), ParseError);
  std::filesystem::remove(path);
}

TEST(SearchLog, CsvRoundTrip) {
  SearchLog log;
  log.initial_val_loss = 0.7;
  for (int e = 0; e < 2; ++e) {
    EpochRecord r;
    r.epoch = e;
    r.train_loss = 0.5 / (e + 1);
    r.val_loss = 0.25 + e;
    r.val_accuracy = 0.875;
    r.L = 1;
    r.K = 2;
    r.policy_dist = Tensor(Shape{2, 3}, std::vector<float>{0.2f, 0.3f, 0.5f, 0.1f, 0.1f, 0.8f});
    log.records.push_back(r);
  }
  const std::string csv = log.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,val_accuracy,L,K,n_ops,dist");
  const SearchLog back = SearchLog::from_csv(csv);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[1].policy_dist, log.records[1].policy_dist);
  EXPECT_EQ(back.csv(), csv);
  try {
    SearchLog::from_csv(csv + "3,x,1,1,1,2,3,0.1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(SearchLog, PolicyDistCsvRowsSumToOne) {
  auto toy = make_toy();
  toy.search.epochs = 1;
  const SearchResult r = search(toy.net, toy.arch_ops, toy.aug_ops, toy.search, toy.pre,
                                toy.splits.train, toy.splits.val);
  const std::string csv = policy_dist_csv(r.log, toy.aug_ops);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("epoch,sub_policy,stage,shear_x", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    double total = 0.0;
    for (int c = 0; std::getline(cells, cell, ','); ++c) {
      if (c >= 3) total += std::stod(cell);
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Evaluate, ReportsAccuracyInUnitRange) {
  const auto toy = make_toy();
  const JointState s = make_state(toy);
  const EvalResult r = evaluate(s.network, toy.splits.val.data, toy.pre, 16);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 1.0);
  EXPECT_NEAR(r.loss, std::log(2.0), 0.5);
}

TEST(FinalTrain, LearnsToyTaskAndIsDeterministic) {
  auto toy = make_toy(256);
  toy.search.epochs = 1;
  const SearchResult r = search(toy.net, toy.arch_ops, toy.aug_ops, toy.search, toy.pre,
                                toy.splits.train, toy.splits.val);
  FinalTrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const DatasetSplit train = merge(toy.splits.train, toy.splits.val);
  const FinalResult a = final_train(r.genotype, r.policy, toy.net, cfg, toy.pre, train, toy.splits.test);
  const FinalResult b = final_train(r.genotype, r.policy, toy.net, cfg, toy.pre, train, toy.splits.test);
  EXPECT_EQ(a.test_accuracy, b.test_accuracy);
  EXPECT_EQ(a.train_loss_curve, b.train_loss_curve);
  EXPECT_EQ(a.train_loss_curve.size(), 3u);
  EXPECT_LT(a.train_loss_curve.back(), a.train_loss_curve.front());
}

TEST(FinalTrain, RejectsOpsOutsideAllowedSet) {
  const auto toy = make_toy();
  Genotype g(2);
  g[1].reduction = true;
  for (auto& c : g) c.nodes = {{DiscreteEdge{ArchOpId::kDilConv5, 0}, DiscreteEdge{ArchOpId::kSkip, 1}}};
  FinalTrainConfig cfg;
  cfg.epochs = 1;
  cfg.arch_ops = reduced_arch_op_set();
  EXPECT_THROW(final_train(g, Policy(toy.aug_ops, 1, 1), toy.net, cfg, toy.pre, toy.splits.train,
                           toy.splits.test),
               ValueError);
}

TEST(SearchConfig, ValidationRejectsNonsense) {
  SearchConfig c;
  c.L = 0;
  EXPECT_THROW(c.validate(), ValueError);
  c = SearchConfig{};
  c.eta = 0.0f;
  EXPECT_THROW(c.validate(), ValueError);
  c = SearchConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ValueError);
}

}  // namespace
}  // namespace augnas
