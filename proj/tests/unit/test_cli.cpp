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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "augnas/error.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace augnas::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "augnas");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Overrides shrinking a run to a few seconds.
std::vector<std::string> tiny_overrides() {
  std::vector<std::string> out;
  for (const char* kv : {"synthetic_n=96", "synthetic_size=8", "epochs=2", "batch_size=16", "L=1",
                         "K=1", "n_cells=2", "n_nodes=4", "init_channels=4", "reduction_positions=1",
                         "pad=1", "cutout_size=4", "train_epochs=1", "train_batch_size=16"}) {
    out.push_back("--set");
    out.push_back(kv);
  }
  return out;
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("augnas_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  Outcome search(const fs::path& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"search", "--seed", "5", "--out", out.string()};
    for (auto& a : tiny_overrides()) args.push_back(a);
    for (auto& a : extra) args.push_back(a);
    return run_cli(args);
  }

  fs::path root_;
};

TEST(Config, DefaultsAndOverrides) {
  RunConfig c;
  EXPECT_EQ(c.get("epochs"), "5");
  EXPECT_EQ(c.get("cutout_size"), "8");
  c.set("epochs=7");
  EXPECT_EQ(c.search(3).epochs, 7);
  EXPECT_EQ(c.search(3).seed, 3u);
  EXPECT_EQ(c.arch_ops().size(), 5u);
  EXPECT_EQ(c.aug_ops().size(), 16u);
  c.set("aug_ops", "invert,rotate");
  EXPECT_EQ(c.aug_ops(), (std::vector<ImageOpId>{ImageOpId::kInvert, ImageOpId::kRotate}));
  EXPECT_EQ(RunConfig::from_text(c.to_text()).to_text(), c.to_text());
}

TEST(Config, ParsesTextWithComments) {
  const RunConfig c = RunConfig::from_text("# comment\n\n epochs = 3 \nnoise=per-image\n");
  EXPECT_EQ(c.search(0).epochs, 3);
  EXPECT_EQ(c.search(0).noise, NoiseMode::kPerImage);
}

TEST(Config, UnknownKeySuggestsNearest) {
  RunConfig c;
  try {
    c.set("epcohs=3");
    FAIL();
  } catch (const ValueError& e) {
    EXPECT_EQ(std::string(e.what()), "unknown config key 'epcohs'; did you mean 'epochs'?");
  }
  EXPECT_EQ(suggest_key("search_lrr"), "search_lr");
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    RunConfig::from_text("epochs = 3\nbatch_size\n");
    FAIL();
  } catch (const ValueError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(RunConfig::from_text("epochs = many\n").search(0), ValueError);
}

TEST(Config, ValidationCatchesBadValues) {
  RunConfig c;
  c.set("train_fraction=0.8");
  c.set("val_fraction=0.5");
  EXPECT_THROW(c.validate(), ValueError);
  RunConfig d;
  d.set("arch_ops=sep_conv_3x3,warp");
  EXPECT_THROW(d.validate(), ValueError);
}

TEST(Cli, MissingSeedIsUsageError) {
  const Outcome o = run_cli({"search"});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("--seed"), std::string::npos) << o.err;
}

TEST(Cli, UnknownKeyExitsWithUsage) {
  const Outcome o = run_cli({"search", "--seed", "1", "--set", "epcohs=3", "--out", "/nonexistent/x"});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("did you mean 'epochs'"), std::string::npos) << o.err;
}

TEST(Cli, SpaceReportsCounts) {
  const Outcome o = run_cli({"space"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("architecture_space N=7 |F|=8: 11520"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find(": 960"), std::string::npos) << o.out;
  const Outcome r = run_cli({"space", "--reference"});
  EXPECT_NE(r.out.find("3.8e+43"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli({"space", "--nodes", "3"}).code, kExitUsage);
}

TEST_F(CliRun, SearchTrainEvalExport) {
  const fs::path s = root_ / "search";
  const Outcome o = search(s);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const char* f : {"config.txt", "policy.json", "genotype.json", "search_log.csv", "policy_dist.csv",
                        "alpha.csv", "summary.json", "timing.csv", "checkpoint.bin"}) {
    EXPECT_TRUE(fs::exists(s / f)) << f;
  }
  const auto summary = nlohmann::json::parse(read_file(s / "summary.json"));
  EXPECT_TRUE(summary.contains("initial_val_accuracy"));
  EXPECT_EQ(read_file(s / "search_log.csv").find("time"), std::string::npos);

  const fs::path t = root_ / "train";
  std::vector<std::string> targs = {"train", "--seed", "2", "--genotype", (s / "genotype.json").string(),
                                    "--policy", (s / "policy.json").string(), "--out", t.string()};
  for (auto& a : tiny_overrides()) targs.push_back(a);
  const Outcome tr = run_cli(targs);
  ASSERT_EQ(tr.code, kExitOk) << tr.err;
  const auto metrics = nlohmann::json::parse(read_file(t / "metrics.json"));
  for (const char* k : {"test_accuracy", "train_loss_curve", "epochs", "seed"}) EXPECT_TRUE(metrics.contains(k)) << k;
  EXPECT_EQ(metrics["seed"], 2);

  std::vector<std::string> eargs = {"eval", "--genotype", (s / "genotype.json").string(), "--weights",
                                    (t / "weights.bin").string()};
  for (auto& a : tiny_overrides()) eargs.push_back(a);
  const Outcome ev = run_cli(eargs);
  ASSERT_EQ(ev.code, kExitOk) << ev.err;
  const auto eval = nlohmann::json::parse(ev.out);
  EXPECT_DOUBLE_EQ(eval["accuracy"].get<double>(), metrics["test_accuracy"].get<double>());

  const fs::path exported = root_ / "dist.csv";
  const Outcome ex = run_cli({"export-dist", "--log", s.string(), "--output", exported.string()});
  ASSERT_EQ(ex.code, kExitOk) << ex.err;
  EXPECT_EQ(read_file(exported), read_file(s / "policy_dist.csv"));
}

TEST_F(CliRun, IdenticalSeedsGiveIdenticalArtifacts) {
  ASSERT_EQ(search(root_ / "a").code, kExitOk);
  ASSERT_EQ(search(root_ / "b").code, kExitOk);
  for (const char* f : {"policy_dist.csv", "genotype.json", "policy.json", "search_log.csv"}) {
    EXPECT_EQ(read_file(root_ / "a" / f), read_file(root_ / "b" / f)) << f;
  }
}

TEST_F(CliRun, ResumeMatchesUninterruptedRun) {
  ASSERT_EQ(search(root_ / "full").code, kExitOk);
  ASSERT_EQ(search(root_ / "part", {"--set", "epochs=1"}).code, kExitOk);
  const Outcome o = search(root_ / "part", {"--resume"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const char* f : {"policy_dist.csv", "genotype.json", "policy.json", "search_log.csv"}) {
    EXPECT_EQ(read_file(root_ / "full" / f), read_file(root_ / "part" / f)) << f;
  }
}

TEST_F(CliRun, NumericalAbortWritesPartialLog) {
  const Outcome o = search(root_ / "nan", {"--set", "w_lr=1e38"});
  EXPECT_EQ(o.code, kExitNumerical) << o.err;
  EXPECT_NE(o.err.find("seed="), std::string::npos) << o.err;
  EXPECT_TRUE(fs::exists(root_ / "nan" / "nan_dump.bin"));
  EXPECT_TRUE(fs::exists(root_ / "nan" / "search_log.csv"));
}

TEST_F(CliRun, MissingInputFileIsReported) {
  const Outcome o = run_cli({"train", "--seed", "1", "--genotype", (root_ / "none.json").string(), "--policy",
                             (root_ / "none.json").string(), "--out", (root_ / "t").string()});
  EXPECT_NE(o.code, kExitOk);
  EXPECT_FALSE(o.err.empty());
}

}  // namespace
}  // namespace augnas::cli
