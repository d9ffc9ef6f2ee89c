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
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cli/config.hpp"

namespace augnas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct SearchArgs {
  RunConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  bool resume = false;
};

// Writes config.txt, policy.json, genotype.json, search_log.csv,
// policy_dist.csv, alpha.csv, summary.json, timing.csv and checkpoint.bin.
// On a numerical abort the partial log and nan_dump.bin are written.
int cmd_search(const SearchArgs& args, std::ostream& out, std::ostream& err);

struct TrainArgs {
  RunConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path genotype;
  std::filesystem::path policy;
  std::filesystem::path out_dir;
};

// Writes config.txt, metrics.json and weights.bin.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
  RunConfig config;
  std::filesystem::path genotype;
  std::filesystem::path weights;
  std::string split = "test";
};

// Prints {"split", "accuracy", "loss"} as JSON.
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

struct ExportArgs {
  std::filesystem::path log_dir;
  std::filesystem::path output;  // empty: <log_dir>/policy_dist.csv
};

// Rebuilds policy_dist.csv from search_log.csv and policy.json.
int cmd_export_dist(const ExportArgs& args, std::ostream& out, std::ostream& err);

struct SpaceArgs {
  int n_nodes = 7;
  int n_ops = 8;
  int L = 10;
  int K = 2;
  int n_aug_ops = 16;
  bool reference = false;
};

int cmd_space(const SpaceArgs& args, std::ostream& out, std::ostream& err);

// Full command-line entry point.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace augnas::cli
