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
#include <utility>
#include <vector>

#include "augnas/image_ops.hpp"

namespace augnas {

// One slot of a sub-policy: selection logits z, application probabilities p
// and magnitudes mu, one entry per candidate op. p and mu are stored
// unconstrained and projected onto [0, 1] when read.
struct OperationStage {
  Tensor z;
  Tensor p;
  Tensor mu;
};

struct SubPolicy {
  std::vector<OperationStage> stages;
};

// Whether Gumbel noise (and the relaxed Bernoulli gates) are drawn once per
// minibatch or once per image.
enum class NoiseMode { kPerBatch, kPerImage };

// L sub-policies of K stages over a fixed op set. The continuous parameter
// space is (#O x [0,1] x [0,1])^(K L) plus the selection logits; the
// learnable parameter count is exactly K * L * #O * 3.
class Policy {
 public:
  // z = 0, p = 0.5, mu = 0.5.
  Policy(std::vector<ImageOpId> op_set, int num_sub_policies, int num_stages, float eta = 1.0f);

  const std::vector<ImageOpId>& op_set() const { return op_set_; }
  std::size_t num_ops() const { return op_set_.size(); }
  int num_sub_policies() const { return static_cast<int>(sub_policies_.size()); }
  int num_stages() const { return num_stages_; }
  float eta() const { return eta_; }

  std::vector<SubPolicy>& sub_policies() { return sub_policies_; }
  const std::vector<SubPolicy>& sub_policies() const { return sub_policies_; }
  OperationStage& stage(int l, int k) { return sub_policies_.at(l).stages.at(k); }
  const OperationStage& stage(int l, int k) const { return sub_policies_.at(l).stages.at(k); }

  std::size_t parameter_count() const;
  // Parameter tensors in (l, k, {z, p, mu}) order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  // Noise-free selection distribution softmax(z / eta): row l*K + k, one
  // column per op. Consumes no randomness.
  Tensor distribution_snapshot() const;

  friend bool operator==(const Policy&, const Policy&);

 private:
  std::vector<ImageOpId> op_set_;
  std::vector<SubPolicy> sub_policies_;
  int num_stages_;
  float eta_;
};

// Tape handles of one stage's parameters.
struct StageVars {
  Var z;
  Var p;
  Var mu;
};

struct PolicyVars {
  std::vector<std::vector<StageVars>> stages;  // [l][k]
  std::vector<Var> flat() const;               // (l, k, {z, p, mu}) order
};

PolicyVars bind_policy(Tape& tape, const Policy& policy, bool requires_grad);

struct StageOptions {
  float eta = 1.0f;
  NoiseMode noise = NoiseMode::kPerBatch;
};

// X' = sum_n w_n (b_n O_n(X; mu_n) + (1 - b_n) X), w = Gumbel-softmax(z),
// b_n = relaxed Bernoulli(p_n). Gradients reach z, p, mu and X.
Var apply_stage_train(Var x, const StageVars& stage, const std::vector<ImageOpId>& ops,
                      const StageOptions& options, Rng& rng);

Var apply_subpolicy_train(Var x, const std::vector<StageVars>& stages,
                          const std::vector<ImageOpId>& ops, const StageOptions& options,
                          Rng& rng);

// Picks one sub-policy uniformly at random and applies it. Returns the
// transformed batch and the chosen index.
std::pair<Var, int> apply_policy_train(Var x, const PolicyVars& vars, const Policy& policy,
                                       NoiseMode noise, Rng& rng);

// Samples the op of each stage from Cat(softmax(z / eta)).
std::size_t sample_stage_op(const OperationStage& stage, float eta, Rng& rng);

// Hard inference-time augmentation: one uniformly chosen sub-policy, per stage
// one sampled op applied with probability p. No gradients.
Tensor apply_policy_infer(const Tensor& x, const Policy& policy, Rng& rng);

// Projection of a stored probability or magnitude onto [0, 1].
float read_unit(float raw);

}  // namespace augnas
