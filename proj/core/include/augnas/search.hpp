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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "augnas/data.hpp"
#include "augnas/network.hpp"
#include "augnas/optim.hpp"
#include "augnas/policy.hpp"

namespace augnas {

struct SgdConfig {
  float lr = 0.025f;
  float lr_min = 0.0f;
  float momentum = 0.9f;
  float weight_decay = 3e-4f;
  float grad_clip = 5.0f;
};

struct SearchConfig {
  int epochs = 5;
  int batch_size = 32;
  SgdConfig w;
  float search_lr = 3e-4f;
  float search_beta1 = 0.5f;
  float search_beta2 = 0.999f;
  float search_weight_decay = 1e-3f;
  float eta = 1.0f;
  int L = 10;
  int K = 2;
  NoiseMode noise = NoiseMode::kPerBatch;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Counters {
  std::int64_t val_steps = 0;
  std::int64_t train_steps = 0;
  std::int64_t backward_calls = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

// Network weights w, architecture logits alpha, the augmentation policy and
// the optimizer states of both levels.
struct JointState {
  Network network;
  Policy policy;
  Sgd w_opt;
  Adam search_opt;
  int epoch = 0;  // next epoch to run
  std::uint64_t seed = 0;
  Rng rng;
  Counters counters;

  // alpha rows, then policy tensors in (l, k, {z, p, mu}) order.
  std::vector<Tensor*> search_parameters();
  std::vector<const Tensor*> search_parameters() const;
  std::vector<Tensor*> weight_parameters() { return network.weights().parameters(); }
  std::vector<const Tensor*> weight_parameters() const;
};

JointState make_joint_state(const NetworkConfig& net_config, const std::vector<ArchOpId>& arch_ops,
                            const std::vector<ImageOpId>& aug_ops, const SearchConfig& config);

// FNV-1a over the raw bytes of the tensors.
std::uint64_t checksum(const std::vector<const Tensor*>& tensors);

enum class StepKind { kVal, kTrain };
enum class PipelineStage { kBaseline, kPolicy, kNormalize, kCutout };

struct Hooks {
  std::function<void(PipelineStage)> on_stage;
  std::function<void(StepKind, const JointState&)> before_step;
  std::function<void(StepKind, const JointState&)> after_step;
};

struct StepResult {
  double loss = 0.0;
  int sub_policy = 0;
  double grad_norm = 0.0;
};

// Validation-level update: the loss on the augmented validation batch is
// differentiated once w.r.t. alpha and the policy; Adam updates those; w is
// left untouched. Randomness is derived from (seed, epoch, step).
StepResult val_step(JointState& state, const ByteBatch& batch, const SearchConfig& config,
                    const PreprocessConfig& pre, int epoch, std::int64_t step,
                    const Hooks& hooks = {});
// Training-level update: the loss on the augmented training batch is
// differentiated once w.r.t. w; gradients are clipped and SGD applied at
// learning rate `lr`. alpha and the policy are left untouched.
StepResult train_step(JointState& state, const ByteBatch& batch, const SearchConfig& config,
                      const PreprocessConfig& pre, int epoch, std::int64_t step, float lr,
                      const Hooks& hooks = {});

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Clean evaluation (no augmentation) in fixed-order batches. A search
// network is evaluated with its current alpha.
EvalResult evaluate(const Network& network, const Dataset& data, const PreprocessConfig& pre,
                    int batch_size);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  int L = 0;
  int K = 0;
  Tensor policy_dist;  // (L K) x #O, taken at the start of the epoch
  std::vector<CellSpec> cells;  // alpha at the end of the epoch
  double seconds = 0.0;
};

struct SearchLog {
  double initial_val_loss = 0.0;
  double initial_val_accuracy = 0.0;
  std::vector<EpochRecord> records;

  // epoch,train_loss,val_loss,val_accuracy,L,K,n_ops,dist
  // dist holds the (L K) x #O distribution row-major, space separated.
  std::string csv() const;
  std::string timing_csv() const;
  // Throws ParseError naming the offending line.
  static SearchLog from_csv(std::string_view text);
};

// epoch,sub_policy,stage,<op names>: one row per (epoch, l, k).
std::string policy_dist_csv(const SearchLog& log, const std::vector<ImageOpId>& op_set);

// Runs epochs state.epoch .. config.epochs - 1 of alternating val/train
// steps, appending one record per epoch. `on_epoch` runs after each record,
// e.g. to write a checkpoint.
void run_search(JointState& state, const DatasetSplit& train, const DatasetSplit& val,
                const SearchConfig& config, const PreprocessConfig& pre, SearchLog& log,
                const Hooks& hooks = {},
                const std::function<void(const JointState&, const SearchLog&)>& on_epoch = {});

struct SearchResult {
  Policy policy;
  Genotype genotype;
  SearchLog log;
};

SearchResult search(const NetworkConfig& net_config, const std::vector<ArchOpId>& arch_ops,
                    const std::vector<ImageOpId>& aug_ops, const SearchConfig& config,
                    const PreprocessConfig& pre, const DatasetSplit& train,
                    const DatasetSplit& val, const Hooks& hooks = {});

struct FinalTrainConfig {
  int epochs = 20;
  int batch_size = 32;
  SgdConfig sgd;
  std::uint64_t seed = 0;
  // Allowed op sets; empty skips the check.
  std::vector<ArchOpId> arch_ops;
  std::vector<ImageOpId> aug_ops;
};

struct FinalResult {
  Network network;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  std::vector<double> train_loss_curve;
};

// Final-training input pipeline: baseline preprocessing, hard policy
// sampling, normalization, cutout.
Tensor final_train_batch(const ByteBatch& batch, const Policy& policy, const PreprocessConfig& pre,
                         std::uint64_t seed, int epoch, std::int64_t step,
                         const Hooks& hooks = {});

FinalResult final_train(const Genotype& genotype, const Policy& policy,
                        const NetworkConfig& net_config, const FinalTrainConfig& config,
                        const PreprocessConfig& pre, const DatasetSplit& train,
                        const DatasetSplit& test, const Hooks& hooks = {});

// Versioned binary archive of the full joint state and the log so far.
void save_checkpoint(const std::filesystem::path& path, const JointState& state,
                     const SearchLog& log);
// `state` must have been built from the same configuration; shapes are
// verified. Throws ParseError on corrupt or mismatched archives.
void load_checkpoint(const std::filesystem::path& path, JointState& state, SearchLog& log);

}  // namespace augnas
