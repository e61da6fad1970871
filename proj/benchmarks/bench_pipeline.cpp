#include <benchmark/benchmark.h>

#include "znet/metrics.hpp"
#include "znet/phantom.hpp"
#include "znet/preprocess.hpp"
#include "znet/rng.hpp"

using namespace znet;

namespace {

Image2D rand_slice(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image2D img(h, w);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(0.0, 1000.0));
  return img;
}

Volume blob_mask(int d, int h, int w, std::array<double, 3> sp, std::uint64_t seed) {
  PhantomParams params;
  params.semi_axes_vox = {d * 0.3, h * 0.25, w * 0.25};
  return make_phantom(d, h, w, sp, PhantomShape::ellipsoid, params, seed).mask;
}

}  // namespace

static void Clahe256(benchmark::State& state) {
  const Image2D img = rand_slice(256, 256, 1);
  for (auto _ : state) {
    auto out = clahe(img);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(Clahe256);

static void GaussianNormalize256(benchmark::State& state) {
  const Image2D img = rand_slice(256, 256, 2);
  for (auto _ : state) {
    auto out = gaussian_normalize(img);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(GaussianNormalize256);

static void Resize2dRoundTrip(benchmark::State& state) {
  const Volume mask = blob_mask(20, 320, 320, {3.6, 0.63, 0.63}, 3);
  for (auto _ : state) {
    auto [u, rec] = unify_resize2d(mask, 256, 256);
    auto back = reconstruct_resize2d(u, rec);
    benchmark::DoNotOptimize(back.data.data());
  }
}
BENCHMARK(Resize2dRoundTrip)->Unit(benchmark::kMillisecond);

static void Resize3dRoundTrip(benchmark::State& state) {
  const Volume mask = blob_mask(20, 160, 160, {3.6, 0.63, 0.63}, 4);
  for (auto _ : state) {
    auto [u, rec] = unify_resize3d(mask, 256, 256);
    auto back = reconstruct_resize3d(u, rec);
    benchmark::DoNotOptimize(back.data.data());
  }
}
BENCHMARK(Resize3dRoundTrip)->Unit(benchmark::kMillisecond);

static void HausdorffKdTree(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Volume a = blob_mask(dim, dim, dim, {1.0, 0.5, 0.5}, 5);
  const Volume b = blob_mask(dim, dim, dim, {1.0, 0.5, 0.5}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hausdorff(a, b));
  }
}
BENCHMARK(HausdorffKdTree)->Arg(16)->Arg(32)->Arg(64);

static void HausdorffBrute(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Volume a = blob_mask(dim, dim, dim, {1.0, 0.5, 0.5}, 5);
  const Volume b = blob_mask(dim, dim, dim, {1.0, 0.5, 0.5}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hausdorff_brute(a, b));
  }
}
BENCHMARK(HausdorffBrute)->Arg(16)->Arg(32);

static void PhantomGeneration(benchmark::State& state) {
  for (auto _ : state) {
    auto pv = make_phantom(20, 320, 320, {3.6, 0.63, 0.63}, PhantomShape::ellipsoid,
                           {{-1, -1, -1}, 0.0, {4.0, 35.0, 35.0}}, 7);
    benchmark::DoNotOptimize(pv.mask.data.data());
  }
}
BENCHMARK(PhantomGeneration)->Unit(benchmark::kMillisecond);

static void Vdsc(benchmark::State& state) {
  const Volume a = blob_mask(20, 256, 256, {3.6, 0.63, 0.63}, 8);
  const Volume b = blob_mask(20, 256, 256, {3.6, 0.63, 0.63}, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vdsc(a, b));
  }
}
BENCHMARK(Vdsc);

BENCHMARK_MAIN();
