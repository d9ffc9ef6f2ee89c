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

#include <benchmark/benchmark.h>

#include <vector>

#include "augnas/network.hpp"
#include "augnas/ops.hpp"
#include "augnas/policy.hpp"
#include "augnas/rng.hpp"
#include "augnas/tape.hpp"

namespace {

using namespace augnas;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<float>(rng.uniform());
  return t;
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  Rng rng(1);
  const Tensor x = random_tensor({16, c, 16, 16}, rng);
  const Tensor w = random_tensor({c, c, 3, 3}, rng);
  for (auto _ : state) {
    Tape tape;
    Var xv = tape.leaf(x, true);
    Var wv = tape.leaf(w, true);
    Var loss = sum(conv2d(xv, wv, {1, 1, 1}));
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SearchNetworkStep(benchmark::State& state) {
  NetworkConfig config;
  config.n_cells = 2;
  config.n_nodes = 4;
  config.init_channels = static_cast<int>(state.range(0));
  config.n_classes = 2;
  config.reduction_positions = {1};
  Rng rng(2);
  const Network net = Network::search(config, reduced_arch_op_set(), rng);
  const Tensor x = random_tensor({16, 3, 16, 16}, rng);
  std::vector<int> labels(16);
  for (int i = 0; i < 16; ++i) labels[i] = i % 2;
  std::vector<Tensor> alpha;
  for (const Tensor* a : net.alpha_parameters()) alpha.push_back(*a);
  for (auto _ : state) {
    Tape tape;
    const auto w = bind_tensors(tape, net.weights().values, true);
    const auto a = bind_tensors(tape, alpha, true);
    Var loss = cross_entropy(net.forward(tape.constant(x), w, a), labels);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_SearchNetworkStep)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PolicyStage(benchmark::State& state) {
  const Policy policy(default_op_set(), 1, 1);
  Rng rng(3);
  const Tensor x = random_tensor({static_cast<std::int64_t>(state.range(0)), 3, 32, 32}, rng);
  std::uint64_t step = 0;
  for (auto _ : state) {
    Tape tape;
    const PolicyVars vars = bind_policy(tape, policy, true);
    Rng draw = Rng(4).derive({0, 0, step++});
    Var y = apply_stage_train(tape.leaf(x, true), vars.stages[0][0], policy.op_set(), {}, draw);
    benchmark::DoNotOptimize(tape.backward(sum(y)));
  }
}
BENCHMARK(BM_PolicyStage)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
