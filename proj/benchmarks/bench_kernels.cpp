#include <benchmark/benchmark.h>

#include "znet/loss.hpp"
#include "znet/model.hpp"
#include "znet/rng.hpp"
#include "znet/tensor.hpp"

using namespace znet;

namespace {

Tensor4<float> rand_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor4<float> t(n, c, h, w);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

ConvParams<float> rand_conv(int out_c, int in_c, std::uint64_t seed) {
  Rng rng(seed);
  ConvParams<float> p(out_c, in_c);
  for (auto& w : p.weight) w = static_cast<float>(rng.uniform(-0.3, 0.3));
  return p;
}

}  // namespace

static void Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const auto x = rand_tensor(1, c, hw, hw, 1);
  auto p = rand_conv(c, c, 2);
  for (auto _ : state) {
    auto y = conv2d_forward<float>(x, p);
    benchmark::DoNotOptimize(y.data.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(c) * c * hw * hw * 9);
}
BENCHMARK(Conv2dForward)->Args({16, 64})->Args({16, 256})->Args({64, 64});

static void Conv2dBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const auto x = rand_tensor(1, c, hw, hw, 3);
  auto p = rand_conv(c, c, 4);
  const auto g = rand_tensor(1, c, hw, hw, 5);
  for (auto _ : state) {
    auto gx = conv2d_backward<float>(x, p, g);
    benchmark::DoNotOptimize(gx.data.data());
    p.zero_grads();
  }
}
BENCHMARK(Conv2dBackward)->Args({16, 64})->Args({32, 64});

static void BatchNormForwardTrain(benchmark::State& state) {
  const auto x = rand_tensor(8, 16, 128, 128, 6);
  BatchNormParams<float> p(16);
  for (auto _ : state) {
    auto y = batchnorm_forward<float>(x, p, Mode::train);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(BatchNormForwardTrain);

static void MaxPool(benchmark::State& state) {
  const auto x = rand_tensor(8, 16, 256, 256, 7);
  PoolCache cache;
  for (auto _ : state) {
    auto y = maxpool2x2_forward(x, &cache);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(MaxPool);

static void Upsample2x(benchmark::State& state) {
  const auto x = rand_tensor(8, 16, 128, 128, 8);
  for (auto _ : state) {
    auto y = upsample2x_nearest(x);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(Upsample2x);

static void DiceLossForwardBackward(benchmark::State& state) {
  auto z = rand_tensor(8, 1, 256, 256, 9);
  for (auto& v : z.data) v = 0.5f * (v + 1.0f);
  Rng rng(10);
  Tensor4<float> y(8, 1, 256, 256);
  for (auto& v : y.data) v = rng.bernoulli(0.3) ? 1.0f : 0.0f;
  for (auto _ : state) {
    auto r = dice_loss(z, y);
    auto g = dice_loss_backward(z, y);
    benchmark::DoNotOptimize(r.mean);
    benchmark::DoNotOptimize(g.data.data());
  }
}
BENCHMARK(DiceLossForwardBackward);

static void TinyZNetTrainStep(benchmark::State& state) {
  ZNetConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.input_h = 32;
  cfg.input_w = 32;
  ZNet<float> model(cfg, 11);
  const auto x = rand_tensor(4, 1, 32, 32, 12);
  Rng rng(13);
  Tensor4<float> y(4, 1, 32, 32);
  for (auto& v : y.data) v = rng.bernoulli(0.4) ? 1.0f : 0.0f;
  for (auto _ : state) {
    auto pred = model.forward(x, Mode::train);
    auto g = dice_loss_backward(pred, y);
    auto gx = model.backward(g);
    benchmark::DoNotOptimize(gx.data.data());
    model.store().zero_grads();
  }
}
BENCHMARK(TinyZNetTrainStep);

static void DefaultZNetEvalSlice(benchmark::State& state) {
  ZNetConfig cfg;  // depth 5, base 32, 256x256
  ZNet<float> model(cfg, 14);
  const auto x = rand_tensor(1, 1, 256, 256, 15);
  for (auto _ : state) {
    auto pred = model.forward(x, Mode::eval);
    benchmark::DoNotOptimize(pred.data.data());
  }
}
BENCHMARK(DefaultZNetEvalSlice)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
