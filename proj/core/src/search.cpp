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

#include "augnas/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "augnas/error.hpp"

namespace augnas {

namespace {

void notify(const Hooks& hooks, PipelineStage stage) {
  if (hooks.on_stage) hooks.on_stage(stage);
}

std::string where(std::uint64_t seed, int epoch, std::int64_t step, const char* what) {
  return std::string(what) + " at seed=" + std::to_string(seed) + " epoch=" +
         std::to_string(epoch) + " step=" + std::to_string(step);
}

std::vector<Var> bind_alpha(Tape& tape, const Network& net, bool requires_grad) {
  std::vector<Var> out;
  for (const Tensor* a : net.alpha_parameters()) out.push_back(tape.leaf(*a, requires_grad));
  return out;
}

std::vector<std::size_t> slice(const std::vector<std::size_t>& perm, std::size_t begin,
                               std::size_t count) {
  const std::size_t end = std::min(perm.size(), begin + count);
  return std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                  perm.begin() + static_cast<std::ptrdiff_t>(end));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

StepResult joint_step(JointState& state, const ByteBatch& batch, const SearchConfig& config,
                      const PreprocessConfig& pre, int epoch, std::int64_t step, StepKind kind,
                      float lr, const Hooks& hooks) {
  if (hooks.before_step) hooks.before_step(kind, state);
  const bool val = kind == StepKind::kVal;
  const Rng master(state.seed);
  Rng pre_rng = master.derive({val ? streams::kValPreprocess : streams::kTrainPreprocess,
                               static_cast<std::uint64_t>(epoch),
                               static_cast<std::uint64_t>(step)});
  Rng policy_rng = master.derive({val ? streams::kValPolicy : streams::kTrainPolicy,
                                  static_cast<std::uint64_t>(epoch),
                                  static_cast<std::uint64_t>(step)});

  notify(hooks, PipelineStage::kBaseline);
  Tensor x0 = baseline_preprocess(batch, pre, pre_rng, true);

  Tape tape;
  const auto w = bind_tensors(tape, state.network.weights().values, !val);
  const auto alpha = bind_alpha(tape, state.network, val);
  const PolicyVars pv = bind_policy(tape, state.policy, val);
  const Var x = tape.constant(std::move(x0));

  notify(hooks, PipelineStage::kPolicy);
  auto [augmented, index] = apply_policy_train(x, pv, state.policy, config.noise, policy_rng);
  notify(hooks, PipelineStage::kNormalize);
  const Var input = normalize_channels(augmented, pre.mean, pre.std);

  Var loss;
  try {
    loss = cross_entropy(state.network.forward(input, w, alpha), batch.labels);
  } catch (const NumericalError&) {
    throw NumericalError(where(state.seed, epoch, step, "non-finite logits"));
  }
  const double loss_value = loss.value().item();
  if (!std::isfinite(loss_value)) {
    throw NumericalError(where(state.seed, epoch, step, "non-finite loss"));
  }
  const Gradients grads = tape.backward(loss);
  state.counters.backward_calls += static_cast<std::int64_t>(tape.backward_calls());

  StepResult result{loss_value, index, 0.0};
  std::vector<Tensor> g;
  if (val) {
    for (const Var& a : alpha) g.push_back(grads.of(a));
    for (const Var& p : pv.flat()) g.push_back(grads.of(p));
  } else {
    for (const Var& v : w) g.push_back(grads.of(v));
  }
  for (const auto& t : g) {
    if (!t.all_finite()) throw NumericalError(where(state.seed, epoch, step, "non-finite gradient"));
  }
  if (val) {
    result.grad_norm = global_norm(g);
    const auto params = state.search_parameters();
    state.search_opt.step(params, g);
    ++state.counters.val_steps;
  } else {
    result.grad_norm = clip_grad_norm(g, config.w.grad_clip);
    const auto params = state.weight_parameters();
    state.w_opt.step(params, g, lr);
    ++state.counters.train_steps;
  }
  if (hooks.after_step) hooks.after_step(kind, state);
  return result;
}

}  // namespace

void SearchConfig::validate() const {
  if (epochs < 1) throw ValueError("epochs must be >= 1");
  if (batch_size < 1) throw ValueError("batch_size must be >= 1");
  if (!(w.lr > 0.0f)) throw ValueError("w_lr must be > 0");
  if (w.lr_min < 0.0f || w.lr_min > w.lr) throw ValueError("w_lr_min must be in [0, w_lr]");
  if (w.momentum < 0.0f || w.momentum >= 1.0f) throw ValueError("w_momentum must be in [0, 1)");
  if (w.weight_decay < 0.0f) throw ValueError("w_weight_decay must be >= 0");
  if (!(w.grad_clip > 0.0f)) throw ValueError("grad_clip must be > 0");
  if (!(search_lr > 0.0f)) throw ValueError("search_lr must be > 0");
  if (search_beta1 < 0.0f || search_beta1 >= 1.0f || search_beta2 < 0.0f ||
      search_beta2 >= 1.0f) {
    throw ValueError("search betas must be in [0, 1)");
  }
  if (search_weight_decay < 0.0f) throw ValueError("search_weight_decay must be >= 0");
  if (!(eta > 0.0f)) throw ValueError("eta must be > 0");
  if (L < 1 || K < 1) throw ValueError("L and K must be >= 1");
}

std::vector<Tensor*> JointState::search_parameters() {
  std::vector<Tensor*> out = network.alpha_parameters();
  for (Tensor* t : policy.parameters()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> JointState::search_parameters() const {
  std::vector<const Tensor*> out = network.alpha_parameters();
  for (const Tensor* t : policy.parameters()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> JointState::weight_parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& v : network.weights().values) out.push_back(&v);
  return out;
}

JointState make_joint_state(const NetworkConfig& net_config, const std::vector<ArchOpId>& arch_ops,
                            const std::vector<ImageOpId>& aug_ops, const SearchConfig& config) {
  config.validate();
  Rng init = Rng(config.seed).derive({streams::kInit});
  return JointState{
      Network::search(net_config, arch_ops, init),
      Policy(aug_ops, config.L, config.K, config.eta),
      Sgd(config.w.momentum, config.w.weight_decay),
      Adam(config.search_lr, config.search_beta1, config.search_beta2,
           config.search_weight_decay),
      0,
      config.seed,
      Rng(config.seed),
      {},
  };
}

std::uint64_t checksum(const std::vector<const Tensor*>& tensors) {
  std::uint64_t h = 1469598103934665603ull;
  for (const Tensor* t : tensors) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t->values().data());
    for (std::size_t i = 0; i < t->numel() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

StepResult val_step(JointState& state, const ByteBatch& batch, const SearchConfig& config,
                    const PreprocessConfig& pre, int epoch, std::int64_t step,
                    const Hooks& hooks) {
  return joint_step(state, batch, config, pre, epoch, step, StepKind::kVal, 0.0f, hooks);
}

StepResult train_step(JointState& state, const ByteBatch& batch, const SearchConfig& config,
                      const PreprocessConfig& pre, int epoch, std::int64_t step, float lr,
                      const Hooks& hooks) {
  return joint_step(state, batch, config, pre, epoch, step, StepKind::kTrain, lr, hooks);
}

EvalResult evaluate(const Network& network, const Dataset& data, const PreprocessConfig& pre,
                    int batch_size) {
  if (data.size() == 0) throw ValueError("evaluate: empty dataset");
  Rng unused(0);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < data.size(); begin += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> rows;
    for (std::size_t r = begin; r < std::min(data.size(), begin + batch_size); ++r) {
      rows.push_back(r);
    }
    const ByteBatch batch = gather(data, rows);
    const Tensor x = normalize(baseline_preprocess(batch, pre, unused, false), pre.mean, pre.std);
    Tape tape;
    const auto w = bind_tensors(tape, network.weights().values, false);
    const auto alpha = bind_alpha(tape, network, false);
    const Var logits = network.forward(tape.constant(x), w, alpha);
    loss_sum += cross_entropy(logits, batch.labels).value().item() *
                static_cast<double>(rows.size());
    const Tensor& l = logits.value();
    const auto classes = static_cast<std::size_t>(l.dim(1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (l[i * classes + c] > l[i * classes + arg]) arg = c;
      }
      if (static_cast<int>(arg) == batch.labels[i]) ++correct;
    }
  }
  const auto n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

std::string SearchLog::csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_accuracy,L,K,n_ops,dist\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << fmt(r.train_loss) << ',' << fmt(r.val_loss) << ','
        << fmt(r.val_accuracy) << ',' << r.L << ',' << r.K << ','
        << (r.L * r.K > 0 ? r.policy_dist.numel() / static_cast<std::size_t>(r.L * r.K) : 0)
        << ',';
    const auto d = r.policy_dist.values();
    for (std::size_t i = 0; i < d.size(); ++i) out << (i ? " " : "") << fmt(d[i]);
    out << '\n';
  }
  return out.str();
}

std::string SearchLog::timing_csv() const {
  std::ostringstream out;
  out << "epoch,seconds\n";
  for (const auto& r : records) out << r.epoch << ',' << fmt(r.seconds) << '\n';
  return out.str();
}

SearchLog SearchLog::from_csv(std::string_view text) {
  SearchLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("search log line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "epoch,train_loss,val_loss,val_accuracy,L,K,n_ops,dist") {
        throw fail("unexpected header '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 8) {
      throw fail("expected 8 fields, got " + std::to_string(fields.size()));
    }
    EpochRecord r;
    std::size_t n_ops = 0;
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string& s) {
        if (used != s.size()) throw std::invalid_argument(s);
      };
      r.epoch = std::stoi(fields[0], &used);
      whole(fields[0]);
      r.train_loss = std::stod(fields[1], &used);
      whole(fields[1]);
      r.val_loss = std::stod(fields[2], &used);
      whole(fields[2]);
      r.val_accuracy = std::stod(fields[3], &used);
      whole(fields[3]);
      r.L = std::stoi(fields[4], &used);
      whole(fields[4]);
      r.K = std::stoi(fields[5], &used);
      whole(fields[5]);
      n_ops = static_cast<std::size_t>(std::stoul(fields[6], &used));
      whole(fields[6]);
    } catch (const std::exception&) {
      throw fail("malformed numeric field");
    }
    if (r.L < 1 || r.K < 1 || n_ops < 1) throw fail("L, K and n_ops must be positive");
    std::vector<float> dist;
    std::istringstream ds(fields[7]);
    std::string tok;
    while (ds >> tok) {
      try {
        std::size_t used = 0;
        dist.push_back(std::stof(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw fail("malformed distribution value '" + tok + "'");
      }
    }
    const auto rows = static_cast<std::int64_t>(r.L * r.K);
    if (dist.size() != static_cast<std::size_t>(rows) * n_ops) {
      throw fail("distribution has " + std::to_string(dist.size()) + " values, expected " +
                 std::to_string(static_cast<std::size_t>(rows) * n_ops));
    }
    r.policy_dist = Tensor(Shape{rows, static_cast<std::int64_t>(n_ops)}, std::move(dist));
    log.records.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError("search log is empty");
  return log;
}

std::string policy_dist_csv(const SearchLog& log, const std::vector<ImageOpId>& op_set) {
  std::ostringstream out;
  out << "epoch,sub_policy,stage";
  for (auto id : op_set) out << ',' << image_op(id).name;
  out << '\n';
  for (const auto& r : log.records) {
    if (r.policy_dist.rank() != 2 || r.policy_dist.dim(1) != static_cast<std::int64_t>(op_set.size())) {
      throw ValueError("policy_dist_csv: epoch " + std::to_string(r.epoch) + " has " +
                       std::to_string(r.policy_dist.rank() == 2 ? r.policy_dist.dim(1) : 0) +
                       " ops, op set has " + std::to_string(op_set.size()));
    }
    const auto n = op_set.size();
    for (int l = 0; l < r.L; ++l) {
      for (int k = 0; k < r.K; ++k) {
        out << r.epoch << ',' << l << ',' << k;
        const std::size_t row = static_cast<std::size_t>(l * r.K + k);
        for (std::size_t o = 0; o < n; ++o) out << ',' << fmt(r.policy_dist[row * n + o]);
        out << '\n';
      }
    }
  }
  return out.str();
}

void run_search(JointState& state, const DatasetSplit& train, const DatasetSplit& val,
                const SearchConfig& config, const PreprocessConfig& pre, SearchLog& log,
                const Hooks& hooks,
                const std::function<void(const JointState&, const SearchLog&)>& on_epoch) {
  config.validate();
  if (train.data.size() == 0 || val.data.size() == 0) {
    throw ValueError("search needs non-empty train and val splits");
  }
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps = std::max<std::size_t>(1, train.data.size() / bs);
  const std::size_t val_batches = std::max<std::size_t>(1, val.data.size() / bs);
  const Rng master(state.seed);

  if (state.epoch == 0 && log.records.empty()) {
    const EvalResult initial = evaluate(state.network, val.data, pre, config.batch_size);
    log.initial_val_loss = initial.loss;
    log.initial_val_accuracy = initial.accuracy;
  }

  std::uint64_t val_cycle = ~0ull;
  std::vector<std::size_t> val_perm;
  for (int epoch = state.epoch; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;
    record.L = state.policy.num_sub_policies();
    record.K = state.policy.num_stages();
    record.policy_dist = state.policy.distribution_snapshot();

    const float lr = cosine_lr(config.w.lr, config.w.lr_min, epoch, config.epochs);
    const auto order = master.derive({streams::kTrainOrder, static_cast<std::uint64_t>(epoch)})
                           .permutation(train.data.size());
    double train_loss = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::uint64_t global = static_cast<std::uint64_t>(epoch) * steps + s;
      if (global / val_batches != val_cycle) {
        val_cycle = global / val_batches;
        val_perm = master.derive({streams::kValOrder, val_cycle}).permutation(val.data.size());
      }
      const auto vrows = slice(val_perm, (global % val_batches) * bs, bs);
      val_step(state, gather(val.data, vrows), config, pre, epoch,
               static_cast<std::int64_t>(s), hooks);
      const auto trows = slice(order, s * bs, bs);
      train_loss += train_step(state, gather(train.data, trows), config, pre, epoch,
                               static_cast<std::int64_t>(s), lr, hooks)
                        .loss;
    }
    record.train_loss = train_loss / static_cast<double>(steps);
    const EvalResult eval = evaluate(state.network, val.data, pre, config.batch_size);
    record.val_loss = eval.loss;
    record.val_accuracy = eval.accuracy;
    record.cells = state.network.cells();
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.records.push_back(std::move(record));
    state.epoch = epoch + 1;
    if (on_epoch) on_epoch(state, log);
  }
}

SearchResult search(const NetworkConfig& net_config, const std::vector<ArchOpId>& arch_ops,
                    const std::vector<ImageOpId>& aug_ops, const SearchConfig& config,
                    const PreprocessConfig& pre, const DatasetSplit& train,
                    const DatasetSplit& val, const Hooks& hooks) {
  JointState state = make_joint_state(net_config, arch_ops, aug_ops, config);
  SearchLog log;
  run_search(state, train, val, config, pre, log, hooks);
  return {state.policy, discretize(state.network.cells()), std::move(log)};
}

Tensor final_train_batch(const ByteBatch& batch, const Policy& policy, const PreprocessConfig& pre,
                         std::uint64_t seed, int epoch, std::int64_t step, const Hooks& hooks) {
  const Rng master(seed);
  const auto e = static_cast<std::uint64_t>(epoch);
  const auto s = static_cast<std::uint64_t>(step);
  Rng pre_rng = master.derive({streams::kTrainPreprocess, e, s});
  Rng policy_rng = master.derive({streams::kTrainPolicy, e, s});
  Rng cutout_rng = master.derive({streams::kCutout, e, s});
  notify(hooks, PipelineStage::kBaseline);
  Tensor x = baseline_preprocess(batch, pre, pre_rng, true);
  notify(hooks, PipelineStage::kPolicy);
  x = apply_policy_infer(x, policy, policy_rng);
  notify(hooks, PipelineStage::kNormalize);
  x = normalize(x, pre.mean, pre.std);
  notify(hooks, PipelineStage::kCutout);
  return cutout(x, pre.cutout_size, cutout_rng);
}

FinalResult final_train(const Genotype& genotype, const Policy& policy,
                        const NetworkConfig& net_config, const FinalTrainConfig& config,
                        const PreprocessConfig& pre, const DatasetSplit& train,
                        const DatasetSplit& test, const Hooks& hooks) {
  if (config.epochs < 1 || config.batch_size < 1) {
    throw ValueError("final training needs epochs >= 1 and batch_size >= 1");
  }
  if (!config.arch_ops.empty()) {
    for (const auto& cell : genotype) {
      for (const auto& node : cell.nodes) {
        for (const auto& e : node) {
          if (std::find(config.arch_ops.begin(), config.arch_ops.end(), e.op) ==
              config.arch_ops.end()) {
            throw ValueError("genotype uses op '" + std::string(arch_op_name(e.op)) +
                             "' outside the configured architecture op set");
          }
        }
      }
    }
  }
  if (!config.aug_ops.empty() && policy.op_set() != config.aug_ops) {
    throw ValueError("policy op set does not match the configured augmentation op set");
  }
  if (train.data.size() == 0 || test.data.size() == 0) {
    throw ValueError("final training needs non-empty train and test splits");
  }
  const Rng master(config.seed);
  Rng init = master.derive({streams::kInit});
  FinalResult result{Network::discrete(net_config, genotype, init), 0.0, 0.0, {}};
  Network& net = result.network;
  Sgd sgd(config.sgd.momentum, config.sgd.weight_decay);
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps = std::max<std::size_t>(1, train.data.size() / bs);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const float lr = cosine_lr(config.sgd.lr, config.sgd.lr_min, epoch, config.epochs);
    const auto order = master.derive({streams::kTrainOrder, static_cast<std::uint64_t>(epoch)})
                           .permutation(train.data.size());
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const ByteBatch batch = gather(train.data, slice(order, s * bs, bs));
      Tensor x = final_train_batch(batch, policy, pre, config.seed, epoch,
                                   static_cast<std::int64_t>(s), hooks);
      Tape tape;
      const auto w = bind_tensors(tape, net.weights().values, true);
      Var loss;
      try {
        loss = cross_entropy(net.forward(tape.constant(std::move(x)), w, {}), batch.labels);
      } catch (const NumericalError&) {
        throw NumericalError(where(config.seed, epoch, static_cast<std::int64_t>(s),
                                   "non-finite logits in final training"));
      }
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw NumericalError(where(config.seed, epoch, static_cast<std::int64_t>(s),
                                   "non-finite loss in final training"));
      }
      const Gradients grads = tape.backward(loss);
      std::vector<Tensor> g;
      for (const Var& v : w) g.push_back(grads.of(v));
      clip_grad_norm(g, config.sgd.grad_clip);
      const auto params = net.weights().parameters();
      sgd.step(params, g, lr);
      epoch_loss += value;
    }
    result.train_loss_curve.push_back(epoch_loss / static_cast<double>(steps));
  }
  const EvalResult eval = evaluate(net, test.data, pre, config.batch_size);
  result.test_accuracy = eval.accuracy;
  result.test_loss = eval.loss;
  return result;
}

}  // namespace augnas
