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

#include <cstring>
#include <fstream>

#include "augnas/error.hpp"
#include "augnas/search.hpp"

namespace augnas {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'G', 'N', 'A', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

// Fixed-width fields in host byte order (little-endian on supported hosts).
class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof v);
  }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void put_tensor(const Tensor& t) {
    put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::int64_t>(d);
    const auto* p = reinterpret_cast<const char*>(t.values().data());
    bytes_.insert(bytes_.end(), p, p + t.numel() * sizeof(float));
  }
  template <typename Range>
  void put_tensors(const Range& ts) {
    put<std::uint64_t>(ts.size());
    for (const auto& t : ts) put_tensor(deref(t));
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  static const Tensor& deref(const Tensor& t) { return t; }
  static const Tensor& deref(const Tensor* t) { return *t; }
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  Tensor get_tensor() {
    const auto rank = get<std::uint32_t>();
    if (rank > 8) throw ParseError("checkpoint: implausible tensor rank " + std::to_string(rank));
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = get<std::int64_t>();
      if (d < 0) throw ParseError("checkpoint: negative extent");
      shape.push_back(d);
    }
    Tensor t(std::move(shape));
    need(t.numel() * sizeof(float));
    std::memcpy(t.values().data(), bytes_.data() + pos_, t.numel() * sizeof(float));
    pos_ += t.numel() * sizeof(float);
    return t;
  }
  std::vector<Tensor> get_tensors() {
    const auto n = get<std::uint64_t>();
    std::vector<Tensor> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(get_tensor());
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError("checkpoint: truncated at byte " + std::to_string(pos_) + ", need " +
                       std::to_string(n) + " more");
    }
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void assign_matching(const std::vector<Tensor*>& dst, std::vector<Tensor> src, const char* what) {
  if (dst.size() != src.size()) {
    throw ParseError(std::string("checkpoint: ") + what + " count " + std::to_string(src.size()) +
                     " does not match " + std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->shape() != src[i].shape()) {
      throw ParseError(std::string("checkpoint: ") + what + " " + std::to_string(i) + " has shape " +
                       shape_to_string(src[i].shape()) + ", expected " +
                       shape_to_string(dst[i]->shape()));
    }
  }
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = std::move(src[i]);
}

// Optimizer state is either empty (no step taken yet) or mirrors the params.
void check_state(const std::vector<Tensor>& state, const std::vector<Tensor*>& params,
                 const char* what) {
  if (state.empty()) return;
  if (state.size() != params.size()) {
    throw ParseError(std::string("checkpoint: ") + what + " count mismatch");
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].shape() != params[i]->shape()) {
      throw ParseError(std::string("checkpoint: ") + what + " " + std::to_string(i) +
                       " shape mismatch");
    }
  }
}

constexpr char kWeightsMagic[8] = {'A', 'U', 'G', 'N', 'A', 'S', 'W', 'T'};

void write_file(const std::filesystem::path& path, const std::vector<char>& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValueError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot open " + path.string());
  return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void save_weights(const std::filesystem::path& path, const NetworkWeights& weights) {
  Writer w;
  for (char c : kWeightsMagic) w.put(c);
  w.put(kVersion);
  w.put<std::uint64_t>(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    w.put_string(weights.names[i]);
    w.put_tensor(weights.values[i]);
  }
  write_file(path, w.bytes());
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  Reader r(read_file(path));
  for (char c : kWeightsMagic) {
    if (r.get<char>() != c) throw ParseError("weights: bad magic in " + path.string());
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError("weights: unsupported version " + std::to_string(version));
  }
  NetworkWeights out;
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = r.get_string();
    out.add(std::move(name), r.get_tensor());
  }
  if (!r.done()) throw ParseError("weights: trailing bytes in " + path.string());
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const JointState& state,
                     const SearchLog& log) {
  Writer w;
  for (char c : kMagic) w.put(c);
  w.put(kVersion);
  w.put<std::uint64_t>(state.seed);
  w.put<std::int32_t>(state.epoch);
  w.put<std::int64_t>(state.counters.val_steps);
  w.put<std::int64_t>(state.counters.train_steps);
  w.put<std::int64_t>(state.counters.backward_calls);
  w.put<std::uint64_t>(state.rng.seed());
  w.put_string(state.rng.state());
  w.put_tensors(state.weight_parameters());
  w.put_tensors(state.search_parameters());
  w.put_tensors(state.w_opt.velocity());
  w.put<std::int64_t>(state.search_opt.t());
  w.put_tensors(state.search_opt.m());
  w.put_tensors(state.search_opt.v());
  w.put<double>(log.initial_val_loss);
  w.put<double>(log.initial_val_accuracy);
  w.put<std::uint64_t>(log.records.size());
  for (const auto& r : log.records) {
    w.put<std::int32_t>(r.epoch);
    w.put<double>(r.train_loss);
    w.put<double>(r.val_loss);
    w.put<double>(r.val_accuracy);
    w.put<std::int32_t>(r.L);
    w.put<std::int32_t>(r.K);
    w.put<double>(r.seconds);
    w.put_tensor(r.policy_dist);
    std::vector<const Tensor*> alpha;
    for (const auto& c : r.cells) {
      for (const auto& a : c.alpha) alpha.push_back(&a);
    }
    w.put_tensors(alpha);
  }
  write_file(path, w.bytes());
}

void load_checkpoint(const std::filesystem::path& path, JointState& state, SearchLog& log) {
  Reader r(read_file(path));
  for (char c : kMagic) {
    if (r.get<char>() != c) throw ParseError("checkpoint: bad magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto seed = r.get<std::uint64_t>();
  const auto epoch = r.get<std::int32_t>();
  Counters counters;
  counters.val_steps = r.get<std::int64_t>();
  counters.train_steps = r.get<std::int64_t>();
  counters.backward_calls = r.get<std::int64_t>();
  const auto rng_seed = r.get<std::uint64_t>();
  const std::string rng_state = r.get_string();
  auto weights = r.get_tensors();
  auto search = r.get_tensors();
  auto velocity = r.get_tensors();
  const auto t = r.get<std::int64_t>();
  auto m = r.get_tensors();
  auto v = r.get_tensors();
  check_state(velocity, state.weight_parameters(), "velocity");
  check_state(m, state.search_parameters(), "adam m");
  check_state(v, state.search_parameters(), "adam v");

  SearchLog loaded;
  loaded.initial_val_loss = r.get<double>();
  loaded.initial_val_accuracy = r.get<double>();
  const auto n_records = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_records; ++i) {
    EpochRecord rec;
    rec.epoch = r.get<std::int32_t>();
    rec.train_loss = r.get<double>();
    rec.val_loss = r.get<double>();
    rec.val_accuracy = r.get<double>();
    rec.L = r.get<std::int32_t>();
    rec.K = r.get<std::int32_t>();
    rec.seconds = r.get<double>();
    rec.policy_dist = r.get_tensor();
    rec.cells = state.network.cells();
    std::vector<Tensor*> alpha;
    for (auto& c : rec.cells) {
      for (auto& a : c.alpha) alpha.push_back(&a);
    }
    assign_matching(alpha, r.get_tensors(), "logged alpha");
    loaded.records.push_back(std::move(rec));
  }
  if (!r.done()) throw ParseError("checkpoint: trailing bytes");

  assign_matching(state.weight_parameters(), std::move(weights), "weight");
  assign_matching(state.search_parameters(), std::move(search), "search parameter");
  state.w_opt.velocity() = std::move(velocity);
  state.search_opt.set_t(t);
  state.search_opt.m() = std::move(m);
  state.search_opt.v() = std::move(v);
  state.seed = seed;
  state.epoch = epoch;
  state.counters = counters;
  state.rng.restore(rng_seed, rng_state);
  log = std::move(loaded);
}

}  // namespace augnas
