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

#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "augnas/error.hpp"
#include "augnas/policy_io.hpp"

namespace augnas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ValueError("cannot write " + path.string());
}

std::string config_echo(const RunConfig& config, const std::string& extra) {
  return "# resolved configuration\n" + extra + config.to_text();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValueError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

fs::path default_out_dir(const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << command << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return fs::path("runs") / name.str();
}

std::string fmt_double(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

}  // namespace

int cmd_search(const SearchArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const Dataset data = cfg.dataset();
    const Splits splits = cfg.splits(data);
    const NetworkConfig net = cfg.network(data);
    const SearchConfig sc = cfg.search(args.seed);
    const PreprocessConfig pre = cfg.preprocess();
    pre.validate(data.channels, data.height, data.width);
    const auto aug_ops = cfg.aug_ops();

    fs::create_directories(args.out_dir);
    write_text(args.out_dir / "config.txt",
               config_echo(cfg, "# command = search\n# seed = " + std::to_string(args.seed) +
                                    "\n# dataset_digest = " + data.digest() + "\n"));

    JointState state = make_joint_state(net, cfg.arch_ops(), aug_ops, sc);
    SearchLog log;
    const fs::path ckpt = args.out_dir / "checkpoint.bin";
    if (args.resume && fs::exists(ckpt)) {
      load_checkpoint(ckpt, state, log);
      out << "resumed at epoch " << state.epoch << '\n';
    }
    auto write_log = [&](const SearchLog& l) {
      write_text(args.out_dir / "search_log.csv", l.csv());
      write_text(args.out_dir / "timing.csv", l.timing_csv());
    };
    try {
      run_search(state, splits.train, splits.val, sc, pre, log, {},
                 [&](const JointState& s, const SearchLog& l) {
                   const auto& r = l.records.back();
                   out << "epoch " << r.epoch << " train_loss " << fmt_double(r.train_loss)
                       << " val_loss " << fmt_double(r.val_loss) << " val_accuracy "
                       << fmt_double(r.val_accuracy) << '\n';
                   save_checkpoint(ckpt, s, l);
                   write_log(l);
                 });
    } catch (const NumericalError& e) {
      write_log(log);
      save_checkpoint(args.out_dir / "nan_dump.bin", state, log);
      err << "numerical error: " << e.what() << "; state dumped to "
          << (args.out_dir / "nan_dump.bin").string() << '\n';
      return kExitNumerical;
    }

    const Genotype genotype = discretize(state.network.cells());
    write_text(args.out_dir / "policy.json", policy_to_json(state.policy));
    write_text(args.out_dir / "genotype.json", genotype_to_json(genotype));
    write_text(args.out_dir / "policy_dist.csv", policy_dist_csv(log, aug_ops));
    write_text(args.out_dir / "alpha.csv", alpha_csv(state.network.cells()));
    write_log(log);
    json summary = {
        {"seed", args.seed},
        {"epochs", sc.epochs},
        {"initial_val_loss", log.initial_val_loss},
        {"initial_val_accuracy", log.initial_val_accuracy},
        {"val_steps", state.counters.val_steps},
        {"train_steps", state.counters.train_steps},
        {"backward_calls", state.counters.backward_calls},
    };
    if (!log.records.empty()) {
      summary["first_train_loss"] = log.records.front().train_loss;
      summary["final_train_loss"] = log.records.back().train_loss;
      summary["final_val_loss"] = log.records.back().val_loss;
      summary["final_val_accuracy"] = log.records.back().val_accuracy;
    }
    write_text(args.out_dir / "summary.json", summary.dump(1) + "\n");
    out << "artifacts written to " << args.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const Genotype genotype = genotype_from_json(read_text(args.genotype));
    const Policy policy = policy_from_json(read_text(args.policy));
    const Dataset data = cfg.dataset();
    const Splits splits = cfg.splits(data);
    const NetworkConfig net = cfg.network(data);
    const FinalTrainConfig fc = cfg.final_train(args.seed);
    const PreprocessConfig pre = cfg.preprocess();
    pre.validate(data.channels, data.height, data.width);

    fs::create_directories(args.out_dir);
    write_text(args.out_dir / "config.txt",
               config_echo(cfg, "# command = train\n# seed = " + std::to_string(args.seed) +
                                    "\n# genotype = " + args.genotype.string() +
                                    "\n# policy = " + args.policy.string() +
                                    "\n# dataset_digest = " + data.digest() + "\n"));
    const FinalResult result =
        final_train(genotype, policy, net, fc, pre, merge(splits.train, splits.val), splits.test);
    save_weights(args.out_dir / "weights.bin", result.network.weights());
    const json metrics = {
        {"test_accuracy", result.test_accuracy},
        {"test_loss", result.test_loss},
        {"train_loss_curve", result.train_loss_curve},
        {"epochs", fc.epochs},
        {"seed", args.seed},
    };
    write_text(args.out_dir / "metrics.json", metrics.dump(1) + "\n");
    out << "test_accuracy " << fmt_double(result.test_accuracy) << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig& cfg = args.config;
    cfg.validate();
    const Genotype genotype = genotype_from_json(read_text(args.genotype));
    const Dataset data = cfg.dataset();
    const Splits splits = cfg.splits(data);
    const DatasetSplit* target = nullptr;
    if (args.split == "train") target = &splits.train;
    if (args.split == "val") target = &splits.val;
    if (args.split == "test") target = &splits.test;
    if (target == nullptr) throw ValueError("split must be train, val or test");
    Rng init(0);
    Network network = Network::discrete(cfg.network(data), genotype, init);
    NetworkWeights loaded = load_weights(args.weights);
    if (loaded.names != network.weights().names) {
      throw ValueError("weights in " + args.weights.string() + " do not match the genotype");
    }
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      if (loaded.values[i].shape() != network.weights().values[i].shape()) {
        throw ValueError("weight '" + loaded.names[i] + "' has shape " +
                         shape_to_string(loaded.values[i].shape()));
      }
    }
    network.weights() = std::move(loaded);
    const EvalResult r = evaluate(network, target->data, cfg.preprocess(),
                                  cfg.final_train(0).batch_size);
    out << json{{"split", args.split}, {"accuracy", r.accuracy}, {"loss", r.loss}}.dump() << '\n';
    return kExitOk;
  });
}

int cmd_export_dist(const ExportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SearchLog log = SearchLog::from_csv(read_text(args.log_dir / "search_log.csv"));
    const Policy policy = policy_from_json(read_text(args.log_dir / "policy.json"));
    for (const auto& r : log.records) {
      if (r.L != policy.num_sub_policies() || r.K != policy.num_stages() ||
          r.policy_dist.dim(1) != static_cast<std::int64_t>(policy.num_ops())) {
        throw ParseError("search log epoch " + std::to_string(r.epoch) +
                         " does not match the policy shape");
      }
    }
    const fs::path target = args.output.empty() ? args.log_dir / "policy_dist.csv" : args.output;
    write_text(target, policy_dist_csv(log, policy.op_set()));
    out << "wrote " << target.string() << '\n';
    return kExitOk;
  });
}

int cmd_space(const SpaceArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.L < 1 || args.K < 1 || args.n_aug_ops < 1) {
      throw ValueError("L, K and the augmentation op count must be >= 1");
    }
    const auto arch = search_space_size(args.n_nodes, args.n_ops);
    const std::uint64_t params = 3ull * static_cast<std::uint64_t>(args.K) *
                                 static_cast<std::uint64_t>(args.L) *
                                 static_cast<std::uint64_t>(args.n_aug_ops);
    out << "architecture_space N=" << args.n_nodes << " |F|=" << args.n_ops << ": " << arch
        << '\n';
    out << "policy_parameters K=" << args.K << " L=" << args.L << " #O=" << args.n_aug_ops
        << ": " << params << '\n';
    if (args.reference) {
      constexpr double kEnas = 1.3e11;
      constexpr double kAutoAugment = 2.9e32;
      std::ostringstream joint;
      joint << std::setprecision(2) << kEnas * kAutoAugment;
      out << "reference ENAS networks: 1.3e11\n";
      out << "reference AutoAugment policies: 2.9e32\n";
      out << "reference joint space: " << joint.str() << '\n';
    }
    return kExitOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint differentiable augmentation-policy and architecture search"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--set", overrides, "override, key=value (repeatable)");
  };

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "run the joint search");
  add_config(search);
  search->add_option("--seed", seed, "master seed")->required();
  search->add_option("--out", out_dir, "output directory");
  search->add_flag("--resume", search_args.resume, "continue from <out>/checkpoint.bin");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train the derived architecture");
  add_config(train);
  train->add_option("--seed", seed, "master seed")->required();
  train->add_option("--genotype", train_args.genotype, "genotype.json")->required();
  train->add_option("--policy", train_args.policy, "policy.json")->required();
  train->add_option("--out", out_dir, "output directory");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate trained weights");
  add_config(eval);
  eval->add_option("--genotype", eval_args.genotype, "genotype.json")->required();
  eval->add_option("--weights", eval_args.weights, "weights.bin")->required();
  eval->add_option("--split", eval_args.split, "train, val or test");

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export-dist", "rebuild policy_dist.csv from a search log");
  exp->add_option("--log", export_args.log_dir, "search output directory")->required();
  exp->add_option("--output", export_args.output, "target CSV");

  SpaceArgs space_args;
  auto* space = app.add_subcommand("space", "report search-space sizes");
  space->add_option("--nodes", space_args.n_nodes, "cell nodes N");
  space->add_option("--ops", space_args.n_ops, "candidate operations |F|");
  space->add_option("--L", space_args.L, "sub-policies");
  space->add_option("--K", space_args.K, "stages per sub-policy");
  space->add_option("--aug-ops", space_args.n_aug_ops, "augmentation operations #O");
  space->add_flag("--reference", space_args.reference, "print reference magnitudes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto load_config = [&]() -> RunConfig {
    RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    for (const auto& o : overrides) cfg.set(o);
    return cfg;
  };
  auto with_config = [&](auto&& body) {
    RunConfig cfg;
    const int rc = guarded(err, [&] {
      cfg = load_config();
      cfg.validate();
      return kExitOk;
    });
    return rc == kExitOk ? body(std::move(cfg)) : rc;
  };

  if (search->parsed()) {
    return with_config([&](RunConfig cfg) {
      search_args.config = std::move(cfg);
      search_args.seed = seed;
      search_args.out_dir = out_dir.empty() ? default_out_dir("search") : fs::path(out_dir);
      return cmd_search(search_args, out, err);
    });
  }
  if (train->parsed()) {
    return with_config([&](RunConfig cfg) {
      train_args.config = std::move(cfg);
      train_args.seed = seed;
      train_args.out_dir = out_dir.empty() ? default_out_dir("train") : fs::path(out_dir);
      return cmd_train(train_args, out, err);
    });
  }
  if (eval->parsed()) {
    return with_config([&](RunConfig cfg) {
      eval_args.config = std::move(cfg);
      return cmd_eval(eval_args, out, err);
    });
  }
  if (exp->parsed()) return cmd_export_dist(export_args, out, err);
  return cmd_space(space_args, out, err);
}

}  // namespace augnas::cli
