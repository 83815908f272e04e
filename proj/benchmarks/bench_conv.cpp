#include <benchmark/benchmark.h>

#include "dacc/conv.hpp"
#include "dacc/evaluate.hpp"
#include "dacc/network.hpp"
#include "dacc/random.hpp"

using namespace dacc;

namespace {

struct Layer {
  std::size_t in, out, dilation;
};

// conv1_1 .. conv5
constexpr Layer kLayers[] = {{3, 24, 1}, {24, 24, 1}, {24, 24, 1}, {24, 48, 2}, {48, 24, 4}, {24, 12, 2}, {12, 12, 1}};

Tensor4<float> noise(Shape4 s, std::uint64_t seed) {
  Rng rng(seed);
  Tensor4<float> t(s);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

void conv_forward(benchmark::State& state) {
  const Layer l = kLayers[state.range(0)];
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto algo = static_cast<ConvAlgorithm>(state.range(2));
  const auto x = noise({1, l.in, side, side}, 1);
  const auto w = noise({l.out, l.in, 3, 3}, 2);
  const Tensor4<float> b({l.out, 1, 1, 1});
  const ConvGeometry g{1, l.dilation, l.dilation, algo};
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, w, b, g));
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * l.in * l.out * 9 * side * side * 1e-9,
                                                 benchmark::Counter::kIsIterationInvariantRate);
}

void conv_backward(benchmark::State& state) {
  const Layer l = kLayers[state.range(0)];
  const auto side = static_cast<std::size_t>(state.range(1));
  const auto x = noise({1, l.in, side, side}, 1);
  const auto w = noise({l.out, l.in, 3, 3}, 2);
  const auto go = noise({1, l.out, side, side}, 3);
  const ConvGeometry g{1, l.dilation, l.dilation, ConvAlgorithm::im2col};
  for (auto _ : state) {
    Tensor4<float> gx(x.shape()), gw(w.shape()), gb({l.out, 1, 1, 1});
    conv2d_backward(x, w, go, g, &gx, &gw, &gb);
    benchmark::DoNotOptimize(gx);
  }
}

void network_forward(benchmark::State& state) {
  ArchitectureConfig arch;
  arch.input_size = static_cast<std::size_t>(state.range(0));
  const auto nets = build_networks<float>(arch, 1);
  const auto image = noise({1, 3, arch.input_size, arch.input_size}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(infer_count(image, nets).total);
}

void algorithm_args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"layer", "side", "algo"});
  for (long layer = 0; layer < 7; ++layer) {
    b->Args({layer, 128, static_cast<long>(ConvAlgorithm::direct)});
    b->Args({layer, 128, static_cast<long>(ConvAlgorithm::im2col)});
  }
}

void layer_args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"layer", "side"});
  for (long layer = 0; layer < 7; ++layer) b->Args({layer, 256});
}

}  // namespace

BENCHMARK(conv_forward)->Apply(algorithm_args)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward)->Apply(layer_args)->Unit(benchmark::kMillisecond);
BENCHMARK(network_forward)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
