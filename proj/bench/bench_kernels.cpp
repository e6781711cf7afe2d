/* Copyright 2026 The Seedscan Authors. All Rights Reserved.

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

// Optimized kernels against the serial reference implementations, on the
// layer shapes of the default 64x64 classifier.

#include <benchmark/benchmark.h>

#include <random>

#include "seedscan/kernels.hpp"
#include "seedscan/reference/reference.hpp"

namespace {

using seedscan::ConvSpec;
using seedscan::Tensor;

Tensor random_tensor(seedscan::Shape shape, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// {filters, channels, side} for conv1..conv3 of the default model.
const int kLayers[3][3] = {{16, 3, 64}, {32, 16, 32}, {64, 32, 16}};

ConvSpec layer_spec(int layer) {
  return ConvSpec{static_cast<std::size_t>(kLayers[layer][1]),
                  static_cast<std::size_t>(kLayers[layer][0]), 3, 3, 1, 1};
}

void BM_GemmTiled(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  Tensor a = random_tensor({m, k}, 1), b = random_tensor({k, n}, 2);
  Tensor c({m, n});
  for (auto _ : state) {
    seedscan::gemm(m, n, k, a.raw(), b.raw(), c.raw(), false);
    benchmark::DoNotOptimize(c.raw());
  }
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * m * n * k, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmTiled)->Args({16, 27, 4096})->Args({32, 144, 1024})->Args({64, 288, 256});

void BM_MatmulReference(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  Tensor a = random_tensor({m, k}, 1), b = random_tensor({k, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(seedscan::reference::matmul(a, b));
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * m * n * k, benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}
BENCHMARK(BM_MatmulReference)->Args({32, 144, 1024});

void BM_ConvForward(benchmark::State& state) {
  const int layer = static_cast<int>(state.range(0));
  const ConvSpec spec = layer_spec(layer);
  const auto side = static_cast<std::size_t>(kLayers[layer][2]);
  Tensor input = random_tensor({8, spec.in_channels, side, side}, 3);
  Tensor weights = random_tensor(spec.weight_shape(), 4);
  Tensor bias = random_tensor({spec.out_channels}, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(seedscan::conv2d_forward(input, weights, bias, spec));
  }
}
BENCHMARK(BM_ConvForward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ConvBackward(benchmark::State& state) {
  const int layer = static_cast<int>(state.range(0));
  const ConvSpec spec = layer_spec(layer);
  const auto side = static_cast<std::size_t>(kLayers[layer][2]);
  Tensor input = random_tensor({8, spec.in_channels, side, side}, 3);
  Tensor weights = random_tensor(spec.weight_shape(), 4);
  Tensor bias = random_tensor({spec.out_channels}, 5);
  auto fwd = seedscan::conv2d_forward(input, weights, bias, spec);
  Tensor grad = random_tensor(fwd.output.shape(), 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(seedscan::conv2d_backward(fwd.cache, grad));
  }
}
BENCHMARK(BM_ConvBackward)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ConvDirectReference(benchmark::State& state) {
  const int layer = static_cast<int>(state.range(0));
  const ConvSpec spec = layer_spec(layer);
  const auto side = static_cast<std::size_t>(kLayers[layer][2]);
  Tensor input = random_tensor({8, spec.in_channels, side, side}, 3);
  Tensor weights = random_tensor(spec.weight_shape(), 4);
  Tensor bias = random_tensor({spec.out_channels}, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(seedscan::reference::conv2d(input, weights, bias, spec));
  }
}
BENCHMARK(BM_ConvDirectReference)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_MaxPool(benchmark::State& state) {
  Tensor input = random_tensor({8, 16, 64, 64}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(seedscan::maxpool2d_forward(input));
}
BENCHMARK(BM_MaxPool)->Unit(benchmark::kMicrosecond);

void BM_MaxPoolReference(benchmark::State& state) {
  Tensor input = random_tensor({8, 16, 64, 64}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(seedscan::reference::maxpool2d(input));
}
BENCHMARK(BM_MaxPoolReference)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
