#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "znet/gradcheck.hpp"
#include "znet/loss.hpp"
#include "znet/model.hpp"

using namespace znet;
using test::random_binary_tensor;
using test::random_tensor;

namespace {

template <typename T>
struct OwnedCbr {
  ConvParams<T> conv;
  BatchNormParams<T> bn;

  OwnedCbr(int out_c, int in_c, std::uint64_t seed) : conv(out_c, in_c), bn(out_c) {
    Rng rng(seed);
    const double std_dev = std::sqrt(2.0 / (9.0 * in_c));
    for (auto& w : conv.weight) w = static_cast<T>(std_dev * rng.normal());
  }
  CbrParams<T> params() { return {conv, bn}; }
};

template <typename T>
struct OwnedBlock {
  OwnedCbr<T> s1, s2, s3;

  OwnedBlock(int c_out, int in_c, std::uint64_t seed)
      : s1(c_out / 2, in_c, seed),
        s2(c_out / 2, c_out / 2, seed + 1),
        s3(c_out / 2, c_out / 2, seed + 2) {}
  ZBlockParams<T> params() { return {s1.params(), s2.params(), s3.params()}; }
};

template <typename T>
struct OwnedDecoder {
  OwnedCbr<T> s1, s2, s3;

  explicit OwnedDecoder(int c_full, std::uint64_t seed)
      : s1(c_full / 2, c_full, seed),
        s2(c_full / 2, c_full, seed + 1),
        s3(c_full / 2, c_full / 2, seed + 2) {}
  ZBlockParams<T> params() { return {s1.params(), s2.params(), s3.params()}; }
};

ZNetConfig tiny_config(int size = 16, int precision = 64) {
  ZNetConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.input_h = size;
  cfg.input_w = size;
  cfg.precision_bits = precision;
  return cfg;
}

std::size_t prefix_param_count(const ParamStore<float>& store, const std::string& pre,
                               bool trainable_only = true) {
  std::size_t total = 0;
  for (const auto& e : store.entries()) {
    if (e.name.rfind(pre, 0) != 0) continue;
    if (trainable_only && !e.trainable) continue;
    total += e.count();
  }
  return total;
}

}  // namespace

TEST_CASE("zblock doubles channels by fusion at half resolution") {
  OwnedBlock<float> block(32, 1, 1);
  const auto x = random_tensor<float>(1, 1, 256, 256, 2);
  const ZBlockOutput<float> out =
      zblock_forward<float>(x, block.params(), SkipAlign::pool, Mode::eval);
  CHECK(out.down.c == 32);
  CHECK(out.down.h == 128);
  CHECK(out.down.w == 128);
  CHECK(out.skip.c == 16);
  CHECK(out.skip.h == 256);
  CHECK(out.skip.w == 256);
  CHECK(out.down.c == 2 * out.skip.c);
}

TEST_CASE("zblock shape recursion at the second level") {
  OwnedBlock<float> block(64, 32, 3);
  const auto x = random_tensor<float>(1, 32, 128, 128, 4);
  const ZBlockOutput<float> out =
      zblock_forward<float>(x, block.params(), SkipAlign::pool, Mode::eval);
  CHECK(out.down.c == 64);
  CHECK(out.down.h == 64);
  CHECK(out.down.w == 64);
}

TEST_CASE("zblock crop alignment matches pool alignment shapes") {
  OwnedBlock<float> block(8, 1, 5);
  const auto x = random_tensor<float>(2, 1, 32, 32, 6);
  const auto pool =
      zblock_forward<float>(x, block.params(), SkipAlign::pool, Mode::eval);
  const auto crop =
      zblock_forward<float>(x, block.params(), SkipAlign::crop, Mode::eval);
  CHECK(pool.down.same_shape(crop.down));
  CHECK(pool.skip.same_shape(crop.skip));
}

TEST_CASE("zblock rejects odd spatial dims") {
  OwnedBlock<float> block(4, 1, 7);
  const Tensor4<float> x(1, 1, 5, 6);
  CHECK_THROWS_AS(
      zblock_forward<float>(x, block.params(), SkipAlign::pool, Mode::eval),
      ShapeError);
}

TEST_CASE("encoder block parameter count for C_out=4, in=1 is 108") {
  ZNetConfig cfg;
  cfg.depth = 1;
  cfg.base_channels = 4;
  cfg.input_h = 32;
  cfg.input_w = 32;
  const ZNet<float> net(cfg, 0);
  CHECK(prefix_param_count(net.store(), "enc1/") == 108);
}

TEST_CASE("decoder zblock restores resolution: (1,512,8,8) + (1,256,16,16)") {
  OwnedDecoder<float> dec(512, 11);
  const auto x = random_tensor<float>(1, 512, 8, 8, 12);
  const auto skip = random_tensor<float>(1, 256, 16, 16, 13);
  const Tensor4<float> out =
      decoder_zblock_forward<float>(x, skip, dec.params(), Mode::eval);
  CHECK(out.c == 256);
  CHECK(out.h == 16);
  CHECK(out.w == 16);
  CHECK(out.h == 2 * x.h);
  CHECK(out.w == 2 * x.w);
}

TEST_CASE("decoder zblock rejects a skip with the wrong channel count") {
  OwnedDecoder<float> dec(64, 14);
  const Tensor4<float> x(1, 64, 128, 128);
  const Tensor4<float> bad_skip(1, 16, 256, 256);
  CHECK_THROWS_AS(decoder_zblock_forward<float>(x, bad_skip, dec.params(), Mode::eval),
                  ShapeError);
}

TEST_CASE("znet tiny config closes shapes and stays in (0,1)") {
  ZNetConfig cfg = tiny_config(32, 32);
  ZNet<float> model(cfg, 21);
  const auto x = random_tensor<float>(3, 1, 32, 32, 22);
  const Tensor4<float> pred = model.forward(x, Mode::eval);
  CHECK(pred.n == 3);
  CHECK(pred.c == 1);
  CHECK(pred.h == 32);
  CHECK(pred.w == 32);
  for (float v : pred.data) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("znet encoder channel ladder base*2^k") {
  ZNetConfig cfg;
  cfg.depth = 5;
  cfg.base_channels = 32;
  cfg.input_h = 64;
  cfg.input_w = 64;
  ZNet<float> model(cfg, 31);
  const auto x = random_tensor<float>(1, 1, 64, 64, 32);
  std::vector<BlockShape> trace;
  model.forward(x, Mode::eval, &trace);
  REQUIRE(trace.size() == 11);  // 5 enc + 5 dec + head
  const int expect_c[5] = {32, 64, 128, 256, 512};
  int res = 32;
  for (int k = 0; k < 5; ++k) {
    CHECK(trace[k].name == "enc" + std::to_string(k + 1));
    CHECK(trace[k].channels == expect_c[k]);
    CHECK(trace[k].h == res);
    res /= 2;
  }
  CHECK(trace[10].channels == 1);
  CHECK(trace[10].h == 64);
}

TEST_CASE("znet rejects inputs that do not match the config") {
  ZNet<float> model(tiny_config(16, 32), 41);
  const Tensor4<float> bad(1, 1, 32, 32);
  CHECK_THROWS_AS(model.forward(bad, Mode::eval), ShapeError);
}

TEST_CASE("znet conv layer count is 6*depth + 1") {
  CHECK(ZNet<float>(tiny_config(16, 32), 0).conv_layer_count() == 13);
  ZNetConfig cfg;
  cfg.depth = 5;
  cfg.base_channels = 32;
  cfg.input_h = 32;
  cfg.input_w = 32;
  CHECK(ZNet<float>(cfg, 0).conv_layer_count() == 31);
}

TEST_CASE("znet backward without caches is a contract error") {
  ZNet<float> model(tiny_config(16, 32), 51);
  const Tensor4<float> g(1, 1, 16, 16, 0.0f);
  CHECK_THROWS_AS(model.backward(g), ContractError);
}

TEST_CASE("zero prediction gradient yields zero parameter gradients") {
  ZNet<double> model(tiny_config(16), 61);
  const auto x = random_tensor<double>(2, 1, 16, 16, 62);
  model.forward(x, Mode::train);
  model.backward(Tensor4<double>(2, 1, 16, 16, 0.0));
  for (const auto& e : model.store().entries()) {
    for (double g : e.grad) CHECK(g == 0.0);
  }
}

TEST_CASE("two identical forward/backward passes produce bit-identical grads") {
  ZNet<double> model(tiny_config(16), 71);
  const auto x = random_tensor<double>(2, 1, 16, 16, 72);
  const auto y = random_binary_tensor<double>(2, 1, 16, 16, 73);

  auto run = [&] {
    model.store().zero_grads();
    const auto pred = model.forward(x, Mode::train);
    model.backward(dice_loss_backward(pred, y));
    std::vector<double> flat;
    for (const auto& e : model.store().entries()) {
      flat.insert(flat.end(), e.grad.begin(), e.grad.end());
    }
    return flat;
  };
  // Snapshot running stats so both passes see identical state.
  ParamStore<double>& store = model.store();
  std::vector<std::vector<double>> buffers;
  for (const auto& e : store.entries()) {
    if (!e.trainable) buffers.push_back(e.value);
  }
  const auto g1 = run();
  std::size_t bi = 0;
  for (auto& e : store.entries()) {
    if (!e.trainable) e.value = buffers[bi++];
  }
  const auto g2 = run();
  REQUIRE(g1.size() == g2.size());
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}

TEST_CASE("composed tiny znet gradient matches finite differences") {
  ZNet<double> model(tiny_config(16), 81);
  const auto x = random_tensor<double>(1, 1, 16, 16, 82);
  const auto y = random_binary_tensor<double>(1, 1, 16, 16, 83);

  const auto pred = model.forward(x, Mode::train);
  model.backward(dice_loss_backward(pred, y));

  std::vector<std::vector<double>> analytic;
  for (const auto& e : model.store().entries()) {
    if (e.trainable) analytic.push_back(e.grad);
  }
  std::vector<GradCheckParam> params;
  std::size_t j = 0;
  for (auto& e : model.store().entries()) {
    if (!e.trainable) continue;
    params.push_back({e.name, e.value.data(), analytic[j].data(), e.count()});
    ++j;
  }
  const auto report = grad_check(params, [&] {
    const auto p = model.forward(x, Mode::train);
    return dice_loss(p, y).mean;
  });
  INFO("worst: " << report.worst_param << "[" << report.worst_index
                 << "] analytic=" << report.worst_analytic
                 << " numeric=" << report.worst_numeric);
  CHECK(report.max_rel_error < 1e-3);
}

TEST_CASE("param_init is seed-deterministic with unit gammas") {
  ZNet<float> a(tiny_config(16, 32), 91);
  ZNet<float> b(tiny_config(16, 32), 91);
  ZNet<float> c(tiny_config(16, 32), 92);
  REQUIRE(a.store().entries().size() == b.store().entries().size());
  bool any_diff_c = false;
  for (std::size_t i = 0; i < a.store().entries().size(); ++i) {
    const auto& ea = a.store().entries()[i];
    const auto& eb = b.store().entries()[i];
    CHECK(ea.name == eb.name);
    CHECK(std::memcmp(ea.value.data(), eb.value.data(),
                      ea.value.size() * sizeof(float)) == 0);
    if (std::memcmp(ea.value.data(), c.store().entries()[i].value.data(),
                    ea.value.size() * sizeof(float)) != 0) {
      any_diff_c = true;
    }
    if (ea.name.ends_with("/gamma")) {
      for (float g : ea.value) CHECK(g == 1.0f);
    }
  }
  CHECK(any_diff_c);
}

TEST_CASE("total trainable parameter count matches the closed form") {
  ZNetConfig cfg;
  cfg.depth = 5;
  cfg.base_channels = 32;
  cfg.input_h = 32;
  cfg.input_w = 32;
  const ZNet<float> model(cfg, 0);

  std::size_t expected = 0;
  for (int k = 1; k <= cfg.depth; ++k) {
    const std::size_t half =
        (static_cast<std::size_t>(cfg.base_channels) << (k - 1)) / 2;
    const std::size_t in_c =
        k == 1 ? 1 : (static_cast<std::size_t>(cfg.base_channels) << (k - 2));
    expected += half * (9 * in_c + 1);      // conv1
    expected += 2 * half * (9 * half + 1);  // conv2, conv3
    expected += 3 * 2 * half;               // gamma/beta per stage
  }
  for (int j = 1; j <= cfg.depth; ++j) {
    const std::size_t full = static_cast<std::size_t>(cfg.base_channels)
                             << (cfg.depth - j);
    const std::size_t half = full / 2;
    expected += 2 * half * (9 * full + 1);  // conv1, conv2
    expected += half * (9 * half + 1);      // conv3
    expected += 3 * 2 * half;
  }
  expected += cfg.base_channels / 2 + 1;  // 1x1 head
  CHECK(model.trainable_parameter_count() == expected);
}

TEST_CASE("unet baseline closes shapes and doubles via convolution") {
  ZNetConfig cfg = tiny_config(32, 32);
  UNetBaseline<float> unet(cfg, 101);
  const auto x = random_tensor<float>(1, 1, 32, 32, 102);
  const Tensor4<float> pred = unet.forward(x, Mode::eval);
  CHECK(pred.c == 1);
  CHECK(pred.h == 32);
  CHECK(pred.w == 32);
  CHECK(unet.conv_layer_count() == 13);

  // U-block widens with a single conv (C/2 -> C); Z-block's third conv stays
  // C/2 -> C/2 and the fusion doubles.
  const auto& u3 = unet.store().at("enc1/conv3/weight");
  CHECK(u3.dims == std::vector<int>{4, 2, 3, 3});
  ZNet<float> znet(cfg, 101);
  const auto& z3 = znet.store().at("enc1/conv3/weight");
  CHECK(z3.dims == std::vector<int>{2, 2, 3, 3});
}

TEST_CASE("per-level conv parameter comparison matches hand counts") {
  ZNetConfig cfg = tiny_config(16, 32);
  const auto rows = encoder_conv_param_comparison(cfg);
  REQUIRE(rows.size() == 2);
  // depth-2, base-4 toy config, conv weights + biases only:
  // znet level 1: (2,1): 20, (2,2): 38, (2,2): 38  -> 96
  // unet level 1: (2,1): 20, (2,2): 38, (4,2): 76  -> 134
  CHECK(rows[0].znet_conv_params == 96);
  CHECK(rows[0].unet_conv_params == 134);
  // znet level 2: 3 x (4,4) convs: 3 * 148          -> 444
  // unet level 2: (4,4): 148, (4,4): 148, (8,4): 296 -> 592
  CHECK(rows[1].znet_conv_params == 444);
  CHECK(rows[1].unet_conv_params == 592);
  const std::string table = format_param_comparison(rows);
  CHECK(table.find("total") != std::string::npos);
  CHECK(table.find("96") != std::string::npos);
}

TEST_CASE("checkpoint round trip restores values, moments and meta") {
  test::TempDir tmp("ckpt");
  const ZNetConfig cfg = tiny_config(16, 32);
  ZNet<float> a(cfg, 111);
  // make the adam arrays non-trivial
  for (auto& e : a.store().entries()) {
    if (!e.trainable) continue;
    for (std::size_t i = 0; i < e.count(); ++i) {
      e.adam_m[i] = 0.25f * static_cast<float>(i % 7);
      e.adam_v[i] = 0.5f + static_cast<float>(i % 3);
    }
  }
  const std::string path = tmp.str() + "/model.znck";
  save_checkpoint(path, cfg, a.store(), {42, 7});

  ZNet<float> b(cfg, 999);
  const CheckpointMeta meta = load_checkpoint(path, cfg, b.store());
  CHECK(meta.adam_t == 42);
  CHECK(meta.epochs_completed == 7);
  for (std::size_t i = 0; i < a.store().entries().size(); ++i) {
    const auto& ea = a.store().entries()[i];
    const auto& eb = b.store().entries()[i];
    CHECK(std::memcmp(ea.value.data(), eb.value.data(),
                      ea.value.size() * sizeof(float)) == 0);
    if (ea.trainable) {
      CHECK(std::memcmp(ea.adam_m.data(), eb.adam_m.data(),
                        ea.adam_m.size() * sizeof(float)) == 0);
      CHECK(std::memcmp(ea.adam_v.data(), eb.adam_v.data(),
                        ea.adam_v.size() * sizeof(float)) == 0);
    }
  }
  CHECK(read_checkpoint_config(path) == cfg);
}

TEST_CASE("checkpoint load rejects config mismatch") {
  test::TempDir tmp("ckpt_mismatch");
  const ZNetConfig cfg = tiny_config(16, 32);
  ZNet<float> a(cfg, 121);
  const std::string path = tmp.str() + "/model.znck";
  save_checkpoint(path, cfg, a.store());

  ZNetConfig other = cfg;
  other.base_channels = 8;
  ZNet<float> b(other, 0);
  CHECK_THROWS_WITH_AS(load_checkpoint(path, other, b.store()),
                       doctest::Contains("base_channels"), ConfigError);
}

TEST_CASE("checkpoint load rejects truncated files") {
  test::TempDir tmp("ckpt_trunc");
  const ZNetConfig cfg = tiny_config(16, 32);
  ZNet<float> a(cfg, 131);
  const std::string path = tmp.str() + "/model.znck";
  save_checkpoint(path, cfg, a.store());
  const std::string bytes = test::read_file(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  out.close();
  ZNet<float> b(cfg, 0);
  CHECK_THROWS_AS(load_checkpoint(path, cfg, b.store()), ParseError);
}

TEST_CASE("config validation rejects bad setups") {
  ZNetConfig cfg;
  cfg.depth = 5;
  cfg.input_h = 100;  // not divisible by 32
  cfg.input_w = 256;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ZNetConfig{};
  cfg.base_channels = 3;  // odd
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ZNetConfig{};
  cfg.precision_bits = 16;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
