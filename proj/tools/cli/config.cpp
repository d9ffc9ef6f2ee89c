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

#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "augnas/error.hpp"

namespace augnas::cli {

namespace {

struct KeyDef {
  const char* name;
  const char* default_value;
};

// Defaults target the built-in 16x16 synthetic task.
constexpr KeyDef kSchema[] = {
    {"dataset_format", "builtin-synthetic"},
    {"dataset_source", "color-vs-shape"},
    {"dataset_seed", "7"},
    {"synthetic_n", "1280"},
    {"synthetic_size", "16"},
    {"train_fraction", "0.4"},
    {"val_fraction", "0.4"},
    {"split_seed", "1"},
    {"epochs", "5"},
    {"batch_size", "32"},
    {"w_lr", "0.025"},
    {"w_lr_min", "0"},
    {"w_momentum", "0.9"},
    {"w_weight_decay", "0.0003"},
    {"grad_clip", "5"},
    {"search_lr", "0.0003"},
    {"search_beta1", "0.5"},
    {"search_beta2", "0.999"},
    {"search_weight_decay", "0.001"},
    {"eta", "1"},
    {"L", "10"},
    {"K", "2"},
    {"noise", "per-batch"},
    {"aug_ops", "default"},
    {"arch_ops", "reduced"},
    {"n_cells", "4"},
    {"n_nodes", "6"},
    {"init_channels", "16"},
    {"reduction_positions", "2"},
    {"pad", "4"},
    {"crop", "0"},
    {"hflip_prob", "0.5"},
    {"norm_mean", "0.5,0.5,0.5"},
    {"norm_std", "0.5,0.5,0.5"},
    {"cutout_size", "8"},
    {"train_epochs", "20"},
    {"train_batch_size", "32"},
    {"train_lr", "0.025"},
    {"train_lr_min", "0"},
    {"train_momentum", "0.9"},
    {"train_weight_decay", "0.0003"},
    {"train_grad_clip", "5"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool known(const std::string& key) {
  return std::any_of(std::begin(kSchema), std::end(kSchema),
                     [&](const KeyDef& d) { return key == d.name; });
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw ValueError("config key '" + key + "': '" + value + "' is not " + want);
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest_key(std::string_view key) {
  std::string best;
  std::size_t best_d = 0;
  for (const auto& d : kSchema) {
    const std::size_t dist = edit_distance(key, d.name);
    if (best.empty() || dist < best_d) {
      best = d.name;
      best_d = dist;
    }
  }
  return best_d <= std::max<std::size_t>(2, key.size() / 3) ? best : "";
}

RunConfig::RunConfig() {
  for (const auto& d : kSchema) values_[d.name] = d.default_value;
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValueError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ValueError& e) {
      throw ValueError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_text(text.str());
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValueError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) {
    const std::string hint = suggest_key(key);
    throw ValueError("unknown config key '" + key + "'" +
                     (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
  }
  values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValueError("unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "an integer");
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a number");
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used == v.size() && v[0] != '-') return x;
  } catch (const std::exception&) {
  }
  bad_value(key, v, "a non-negative integer");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

NetworkConfig RunConfig::network(const Dataset& data) const {
  NetworkConfig c;
  c.n_cells = get_int("n_cells");
  c.n_nodes = get_int("n_nodes");
  c.init_channels = get_int("init_channels");
  c.in_channels = static_cast<int>(data.channels);
  c.n_classes = data.n_classes;
  c.reduction_positions.clear();
  for (const auto& s : get_list("reduction_positions")) {
    try {
      c.reduction_positions.push_back(std::stoi(s));
    } catch (const std::exception&) {
      bad_value("reduction_positions", s, "an integer");
    }
  }
  c.validate();
  return c;
}

SearchConfig RunConfig::search(std::uint64_t seed) const {
  SearchConfig c;
  c.epochs = get_int("epochs");
  c.batch_size = get_int("batch_size");
  c.w.lr = static_cast<float>(get_double("w_lr"));
  c.w.lr_min = static_cast<float>(get_double("w_lr_min"));
  c.w.momentum = static_cast<float>(get_double("w_momentum"));
  c.w.weight_decay = static_cast<float>(get_double("w_weight_decay"));
  c.w.grad_clip = static_cast<float>(get_double("grad_clip"));
  c.search_lr = static_cast<float>(get_double("search_lr"));
  c.search_beta1 = static_cast<float>(get_double("search_beta1"));
  c.search_beta2 = static_cast<float>(get_double("search_beta2"));
  c.search_weight_decay = static_cast<float>(get_double("search_weight_decay"));
  c.eta = static_cast<float>(get_double("eta"));
  c.L = get_int("L");
  c.K = get_int("K");
  const std::string& noise = get("noise");
  if (noise == "per-batch") {
    c.noise = NoiseMode::kPerBatch;
  } else if (noise == "per-image") {
    c.noise = NoiseMode::kPerImage;
  } else {
    bad_value("noise", noise, "per-batch or per-image");
  }
  c.seed = seed;
  c.validate();
  return c;
}

FinalTrainConfig RunConfig::final_train(std::uint64_t seed) const {
  FinalTrainConfig c;
  c.epochs = get_int("train_epochs");
  c.batch_size = get_int("train_batch_size");
  c.sgd.lr = static_cast<float>(get_double("train_lr"));
  c.sgd.lr_min = static_cast<float>(get_double("train_lr_min"));
  c.sgd.momentum = static_cast<float>(get_double("train_momentum"));
  c.sgd.weight_decay = static_cast<float>(get_double("train_weight_decay"));
  c.sgd.grad_clip = static_cast<float>(get_double("train_grad_clip"));
  c.seed = seed;
  c.arch_ops = arch_ops();
  c.aug_ops = aug_ops();
  if (c.epochs < 1) throw ValueError("train_epochs must be >= 1");
  if (c.batch_size < 1) throw ValueError("train_batch_size must be >= 1");
  if (!(c.sgd.lr > 0.0f)) throw ValueError("train_lr must be > 0");
  if (!(c.sgd.grad_clip > 0.0f)) throw ValueError("train_grad_clip must be > 0");
  return c;
}

PreprocessConfig RunConfig::preprocess() const {
  PreprocessConfig c;
  c.pad = get_int("pad");
  c.crop = get_int("crop");
  c.hflip_prob = static_cast<float>(get_double("hflip_prob"));
  c.cutout_size = get_int("cutout_size");
  c.mean.clear();
  c.std.clear();
  const std::pair<const char*, std::vector<float>*> stats[] = {{"norm_mean", &c.mean},
                                                               {"norm_std", &c.std}};
  for (const auto& [key, target] : stats) {
    for (const auto& s : get_list(key)) {
      try {
        std::size_t used = 0;
        const float v = std::stof(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        target->push_back(v);
      } catch (const std::invalid_argument&) {
        bad_value(key, s, "a number");
      } catch (const std::out_of_range&) {
        bad_value(key, s, "a number");
      }
    }
  }
  return c;
}

std::vector<ArchOpId> RunConfig::arch_ops() const {
  const auto names = get_list("arch_ops");
  if (names.size() == 1 && names[0] == "reduced") return reduced_arch_op_set();
  if (names.size() == 1 && names[0] == "full") return full_arch_op_set();
  std::vector<ArchOpId> out;
  for (const auto& n : names) out.push_back(arch_op_by_name(n));
  if (out.empty()) throw ValueError("arch_ops is empty");
  return out;
}

std::vector<ImageOpId> RunConfig::aug_ops() const {
  const auto names = get_list("aug_ops");
  if (names.size() == 1 && names[0] == "default") return default_op_set();
  std::vector<ImageOpId> out;
  for (const auto& n : names) out.push_back(image_op_by_name(n).id);
  if (out.empty()) throw ValueError("aug_ops is empty");
  return out;
}

Dataset RunConfig::dataset() const {
  return load_dataset(get("dataset_source"), dataset_format_from_name(get("dataset_format")),
                      get_u64("dataset_seed"), static_cast<std::size_t>(get_u64("synthetic_n")),
                      get_int("synthetic_size"));
}

Splits RunConfig::splits(const Dataset& data) const {
  return split(data, get_double("train_fraction"), get_double("val_fraction"),
               get_u64("split_seed"));
}

void RunConfig::validate() const {
  search(0);
  final_train(0);
  arch_ops();
  aug_ops();
  dataset_format_from_name(get("dataset_format"));
  get_u64("dataset_seed");
  get_u64("synthetic_n");
  get_int("synthetic_size");
  const double ft = get_double("train_fraction"), fv = get_double("val_fraction");
  if (ft < 0.0 || fv < 0.0 || ft + fv > 1.0) {
    throw ValueError("train_fraction + val_fraction must lie in [0, 1]");
  }
  get_u64("split_seed");
  get_int("n_cells");
  get_int("n_nodes");
  get_int("init_channels");
  preprocess();
}

}  // namespace augnas::cli
