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

#include "augnas/policy.hpp"

#include <algorithm>
#include <cmath>

#include "augnas/error.hpp"
#include "augnas/sampling.hpp"

namespace augnas {

Policy::Policy(std::vector<ImageOpId> op_set, int num_sub_policies, int num_stages, float eta)
    : op_set_(std::move(op_set)), num_stages_(num_stages), eta_(eta) {
  if (op_set_.empty()) throw ValueError("policy needs at least one operation");
  if (num_sub_policies < 1 || num_stages < 1) {
    throw ValueError("policy needs L >= 1 sub-policies and K >= 1 stages");
  }
  if (!(eta > 0.0f)) throw ValueError("temperature eta must be positive");
  const auto n = static_cast<std::int64_t>(op_set_.size());
  sub_policies_.resize(static_cast<std::size_t>(num_sub_policies));
  for (auto& sp : sub_policies_) {
    sp.stages.resize(static_cast<std::size_t>(num_stages));
    for (auto& st : sp.stages) {
      st.z = Tensor(Shape{n}, 0.0f);
      st.p = Tensor(Shape{n}, 0.5f);
      st.mu = Tensor(Shape{n}, 0.5f);
    }
  }
}

std::size_t Policy::parameter_count() const {
  std::size_t total = 0;
  for (const Tensor* t : parameters()) total += t->numel();
  return total;
}

std::vector<Tensor*> Policy::parameters() {
  std::vector<Tensor*> out;
  for (auto& sp : sub_policies_) {
    for (auto& st : sp.stages) {
      out.push_back(&st.z);
      out.push_back(&st.p);
      out.push_back(&st.mu);
    }
  }
  return out;
}

std::vector<const Tensor*> Policy::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& sp : sub_policies_) {
    for (const auto& st : sp.stages) {
      out.push_back(&st.z);
      out.push_back(&st.p);
      out.push_back(&st.mu);
    }
  }
  return out;
}

namespace {

std::vector<double> stage_distribution(const Tensor& z, float eta) {
  const std::size_t n = z.numel();
  std::vector<double> w(n);
  const float mx = *std::max_element(z.values().begin(), z.values().end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp((static_cast<double>(z[i]) - mx) / eta);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace

Tensor Policy::distribution_snapshot() const {
  const auto rows = static_cast<std::int64_t>(sub_policies_.size()) * num_stages_;
  const auto n = static_cast<std::int64_t>(op_set_.size());
  Tensor out(Shape{rows, n});
  std::int64_t r = 0;
  for (const auto& sp : sub_policies_) {
    for (const auto& st : sp.stages) {
      const auto w = stage_distribution(st.z, eta_);
      for (std::int64_t i = 0; i < n; ++i) out[r * n + i] = static_cast<float>(w[i]);
      ++r;
    }
  }
  return out;
}

bool operator==(const Policy& a, const Policy& b) {
  if (a.op_set_ != b.op_set_ || a.num_stages_ != b.num_stages_ || a.eta_ != b.eta_) return false;
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!(*pa[i] == *pb[i])) return false;
  }
  return true;
}

std::vector<Var> PolicyVars::flat() const {
  std::vector<Var> out;
  for (const auto& sp : stages) {
    for (const auto& st : sp) {
      out.push_back(st.z);
      out.push_back(st.p);
      out.push_back(st.mu);
    }
  }
  return out;
}

PolicyVars bind_policy(Tape& tape, const Policy& policy, bool requires_grad) {
  PolicyVars vars;
  for (const auto& sp : policy.sub_policies()) {
    auto& row = vars.stages.emplace_back();
    for (const auto& st : sp.stages) {
      row.push_back({tape.leaf(st.z, requires_grad), tape.leaf(st.p, requires_grad),
                     tape.leaf(st.mu, requires_grad)});
    }
  }
  return vars;
}

float read_unit(float raw) { return std::clamp(raw, 0.0f, 1.0f); }

Var apply_stage_train(Var x, const StageVars& stage, const std::vector<ImageOpId>& ops,
                      const StageOptions& options, Rng& rng) {
  const std::size_t n = ops.size();
  if (stage.z.value().numel() != n || stage.p.value().numel() != n ||
      stage.mu.value().numel() != n) {
    throw ShapeError("apply_stage_train: stage parameters do not match " + std::to_string(n) +
                     " operations");
  }
  check_pixel_range(x.value(), "apply_stage_train");
  const bool per_image = options.noise == NoiseMode::kPerImage;
  const std::int64_t batch = x.value().dim(0);

  Var z = stage.z;
  if (per_image) {
    Var row = reshape(z, Shape{1, static_cast<std::int64_t>(n)});
    std::vector<Var> rows(static_cast<std::size_t>(batch), row);
    z = concat(rows, 0);
  }
  Var weights = gumbel_softmax_sample(z, options.eta, rng);
  Var p = clamp(stage.p, 0.0f, 1.0f, ClampGrad::kOpen);
  Var mu = clamp(stage.mu, 0.0f, 1.0f, ClampGrad::kOpen);

  std::vector<Var> branches;
  branches.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::int64_t>(i);
    Var gate = relaxed_bernoulli(select(p, idx), options.eta, rng, per_image ? batch : 1);
    Var applied = apply_image_op(image_op(ops[i]), x, select(mu, idx), rng);
    branches.push_back(lerp(applied, x, gate));
  }
  return clamp(weighted_sum(branches, weights), 0.0f, 1.0f);
}

Var apply_subpolicy_train(Var x, const std::vector<StageVars>& stages,
                          const std::vector<ImageOpId>& ops, const StageOptions& options,
                          Rng& rng) {
  for (const auto& st : stages) x = apply_stage_train(x, st, ops, options, rng);
  return x;
}

std::pair<Var, int> apply_policy_train(Var x, const PolicyVars& vars, const Policy& policy,
                                       NoiseMode noise, Rng& rng) {
  if (vars.stages.empty()) throw ValueError("apply_policy_train: empty policy");
  const auto index = static_cast<int>(rng.uniform_int(vars.stages.size()));
  const StageOptions options{policy.eta(), noise};
  return {apply_subpolicy_train(x, vars.stages[index], policy.op_set(), options, rng), index};
}

std::size_t sample_stage_op(const OperationStage& stage, float eta, Rng& rng) {
  const auto w = stage_distribution(stage.z, eta);
  double u = rng.uniform();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

Tensor apply_policy_infer(const Tensor& x, const Policy& policy, Rng& rng) {
  if (policy.num_sub_policies() < 1) throw ValueError("apply_policy_infer: empty policy");
  check_pixel_range(x, "apply_policy_infer");
  const auto index = static_cast<int>(rng.uniform_int(policy.sub_policies().size()));
  Tensor current = x;
  for (const auto& st : policy.sub_policies()[index].stages) {
    const std::size_t op = sample_stage_op(st, policy.eta(), rng);
    if (!rng.bernoulli(read_unit(st.p[op]))) continue;
    Tape scratch;
    Var in = scratch.constant(std::move(current));
    Var mu = scratch.constant(Tensor(Shape{1}, read_unit(st.mu[op])));
    current = apply_image_op(image_op(policy.op_set()[op]), in, mu, rng).value();
  }
  return current;
}

}  // namespace augnas
