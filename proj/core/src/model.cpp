#include "znet/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "znet/rng.hpp"

namespace znet {

void ZNetConfig::validate() const {
  if (depth < 1 || depth > 20) {
    throw ConfigError("depth must be in [1, 20], got " + std::to_string(depth));
  }
  if (base_channels < 2 || base_channels % 2 != 0) {
    throw ConfigError("base_channels must be even and >= 2, got " +
                      std::to_string(base_channels));
  }
  if (in_channels < 1) {
    throw ConfigError("in_channels must be >= 1, got " + std::to_string(in_channels));
  }
  const int div = 1 << depth;
  if (input_h < div || input_h % div != 0 || input_w < div || input_w % div != 0) {
    throw ConfigError("input size " + std::to_string(input_h) + "x" +
                      std::to_string(input_w) + " must be divisible by 2^depth = " +
                      std::to_string(div));
  }
  if (precision_bits != 32 && precision_bits != 64) {
    throw ConfigError("precision_bits must be 32 or 64, got " +
                      std::to_string(precision_bits));
  }
}

const char* skip_align_name(SkipAlign a) {
  return a == SkipAlign::pool ? "pool" : "crop";
}

SkipAlign skip_align_from_name(const std::string& s) {
  if (s == "pool") return SkipAlign::pool;
  if (s == "crop") return SkipAlign::crop;
  throw ConfigError("unknown skip_align '" + s + "' (expected pool or crop)");
}

// --- ParamStore ----------------------------------------------------------------

template <typename T>
ParamEntry<T>& ParamStore<T>::add(const std::string& name, std::vector<int> dims,
                                  bool trainable) {
  if (index_.count(name)) {
    throw ContractError("duplicate parameter name: " + name);
  }
  ParamEntry<T> e;
  e.name = name;
  e.dims = std::move(dims);
  e.trainable = trainable;
  e.value.assign(e.count(), T(0));
  if (trainable) {
    e.grad.assign(e.count(), T(0));
    e.adam_m.assign(e.count(), T(0));
    e.adam_v.assign(e.count(), T(0));
  }
  index_[name] = entries_.size();
  entries_.push_back(std::move(e));
  return entries_.back();
}

template <typename T>
bool ParamStore<T>::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

template <typename T>
ParamEntry<T>& ParamStore<T>::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return entries_[it->second];
}

template <typename T>
const ParamEntry<T>& ParamStore<T>::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return entries_[it->second];
}

template <typename T>
std::size_t ParamStore<T>::trainable_scalar_count() const {
  std::size_t total = 0;
  for (const auto& e : entries_) {
    if (e.trainable) total += e.count();
  }
  return total;
}

template <typename T>
void ParamStore<T>::zero_grads() {
  for (auto& e : entries_) {
    std::fill(e.grad.begin(), e.grad.end(), T(0));
  }
}

// --- stage helpers ---------------------------------------------------------------

namespace {

template <typename T>
Tensor4<T> cbr_forward(const Tensor4<T>& x, const CbrParams<T>& p, Mode mode,
                       CbrCache<T>* cache) {
  Tensor4<T> y = conv2d_forward(x, p.conv);
  Tensor4<T> bn = batchnorm_forward(y, p.bn, mode, cache ? &cache->bn : nullptr);
  Tensor4<T> out = relu(bn);
  if (cache) {
    cache->x_in = x;
    cache->bn_out = std::move(bn);
  }
  return out;
}

template <typename T>
Tensor4<T> cbr_backward(const CbrCache<T>& cache, const CbrParams<T>& p,
                        const Tensor4<T>& grad_out) {
  Tensor4<T> g_bn = relu_backward(cache.bn_out, grad_out);
  Tensor4<T> g_conv = batchnorm_backward(cache.bn, p.bn, g_bn);
  return conv2d_backward(cache.x_in, p.conv, g_conv);
}

// 1x1 convolution to a single channel; the Z-net head.
template <typename T>
Tensor4<T> conv1x1_forward(const Tensor4<T>& x, const ConvParamsView<T>& p) {
  if (x.c != p.in_channels) {
    throw ShapeError("head conv: input has " + std::to_string(x.c) +
                     " channels, expected " + std::to_string(p.in_channels));
  }
  Tensor4<T> out(x.n, 1, x.h, x.w);
  const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
  for (int in = 0; in < x.n; ++in) {
    T* op = out.plane(in, 0);
    for (std::size_t i = 0; i < plane; ++i) op[i] = p.bias[0];
    for (int ic = 0; ic < x.c; ++ic) {
      const T wv = p.weight[ic];
      const T* xp = x.plane(in, ic);
      for (std::size_t i = 0; i < plane; ++i) op[i] += wv * xp[i];
    }
  }
  return out;
}

template <typename T>
Tensor4<T> conv1x1_backward(const Tensor4<T>& x, const ConvParamsView<T>& p,
                            const Tensor4<T>& grad_out) {
  Tensor4<T> gx = Tensor4<T>::like(x);
  const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
  for (int in = 0; in < x.n; ++in) {
    const T* gp = grad_out.plane(in, 0);
    T bsum = T(0);
    for (std::size_t i = 0; i < plane; ++i) bsum += gp[i];
    p.grad_bias[0] += bsum;
    for (int ic = 0; ic < x.c; ++ic) {
      const T* xp = x.plane(in, ic);
      T* gxp = gx.plane(in, ic);
      const T wv = p.weight[ic];
      T wacc = T(0);
      for (std::size_t i = 0; i < plane; ++i) {
        wacc += xp[i] * gp[i];
        gxp[i] += wv * gp[i];
      }
      p.grad_weight[ic] += wacc;
    }
  }
  return gx;
}

template <typename T>
Tensor4<T> sigmoid(const Tensor4<T>& x) {
  Tensor4<T> out = Tensor4<T>::like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data[i] = T(1) / (T(1) + std::exp(-x.data[i]));
  }
  return out;
}

template <typename T>
ConvParamsView<T> conv_view(ParamStore<T>& s, const std::string& prefix) {
  auto& w = s.at(prefix + "/weight");
  auto& b = s.at(prefix + "/bias");
  return {w.dims[0], w.dims[1], w.value.data(), b.value.data(), w.grad.data(),
          b.grad.data()};
}

template <typename T>
BatchNormView<T> bn_view(ParamStore<T>& s, const std::string& prefix) {
  auto& g = s.at(prefix + "/gamma");
  auto& b = s.at(prefix + "/beta");
  auto& rm = s.at(prefix + "/running_mean");
  auto& rv = s.at(prefix + "/running_var");
  return {g.dims[0],       g.value.data(),  b.value.data(), rm.value.data(),
          rv.value.data(), g.grad.data(),   b.grad.data(),  T(1e-5),
          T(0.99)};
}

template <typename T>
void add_conv(ParamStore<T>& s, const std::string& prefix, int out_c, int in_c,
              int k) {
  s.add(prefix + "/weight", {out_c, in_c, k, k});
  s.add(prefix + "/bias", {out_c});
}

template <typename T>
void add_bn(ParamStore<T>& s, const std::string& prefix, int c) {
  s.add(prefix + "/gamma", {c});
  s.add(prefix + "/beta", {c});
  s.add(prefix + "/running_mean", {c}, /*trainable=*/false);
  s.add(prefix + "/running_var", {c}, /*trainable=*/false);
}

// He-style init: conv weights ~ N(0, sqrt(2 / fan_in)), biases and beta 0,
// gamma and running_var 1.
template <typename T>
void init_store(ParamStore<T>& s, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x706172616dull));  // independent of other streams
  for (auto& e : s.entries()) {
    const bool is_weight = e.name.size() > 7 &&
                           e.name.compare(e.name.size() - 7, 7, "/weight") == 0;
    const bool is_one = e.name.ends_with("/gamma") || e.name.ends_with("/running_var");
    if (is_weight) {
      const std::size_t fan_in = static_cast<std::size_t>(e.dims[1]) * e.dims[2] * e.dims[3];
      const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (auto& v : e.value) v = static_cast<T>(std_dev * rng.normal());
    } else if (is_one) {
      std::fill(e.value.begin(), e.value.end(), T(1));
    }
    // everything else stays zero
  }
}

template <typename T>
ZBlockParams<T> block_views(ParamStore<T>& s, const std::string& prefix) {
  return {{conv_view(s, prefix + "/conv1"), bn_view(s, prefix + "/bn1")},
          {conv_view(s, prefix + "/conv2"), bn_view(s, prefix + "/bn2")},
          {conv_view(s, prefix + "/conv3"), bn_view(s, prefix + "/bn3")}};
}

int count_weight_entries(const std::vector<std::string>& names) {
  int n = 0;
  for (const auto& s : names) {
    if (s.ends_with("/weight")) ++n;
  }
  return n;
}

}  // namespace

// --- blocks ---------------------------------------------------------------------

template <typename T>
ZBlockOutput<T> zblock_forward(const Tensor4<T>& x, const ZBlockParams<T>& p,
                               SkipAlign align, Mode mode, ZBlockCache<T>* cache) {
  if (x.h % 2 != 0 || x.w % 2 != 0) {
    throw ShapeError("zblock_forward requires even spatial dims, got " + x.shape_str());
  }
  Tensor4<T> a = cbr_forward(x, p.s1, mode, cache ? &cache->s1 : nullptr);
  Tensor4<T> z2 = cbr_forward(a, p.s2, mode, cache ? &cache->s2 : nullptr);
  Tensor4<T> z3 = maxpool2x2_forward(z2, cache ? &cache->pool_main : nullptr);
  Tensor4<T> z4 = cbr_forward(z3, p.s3, mode, cache ? &cache->s3 : nullptr);
  Tensor4<T> aligned =
      align == SkipAlign::pool
          ? maxpool2x2_forward(z2, cache ? &cache->pool_skip : nullptr)
          : center_crop(z2, z2.h / 2, z2.w / 2);
  if (cache) {
    cache->align = align;
    cache->z2_h = z2.h;
    cache->z2_w = z2.w;
    cache->half_channels = z2.c;
  }
  Tensor4<T> down = concat_channels(aligned, z4);
  return {std::move(down), std::move(z2)};
}

template <typename T>
Tensor4<T> zblock_backward(const ZBlockCache<T>& cache, const ZBlockParams<T>& p,
                           const Tensor4<T>& grad_down, const Tensor4<T>& grad_skip) {
  auto [g_aligned, g_z4] = split_channels(grad_down, cache.half_channels);
  Tensor4<T> g_z3 = cbr_backward(cache.s3, p.s3, g_z4);
  Tensor4<T> g_z2 = maxpool2x2_backward(cache.pool_main, g_z3);
  Tensor4<T> g_align =
      cache.align == SkipAlign::pool
          ? maxpool2x2_backward(cache.pool_skip, g_aligned)
          : center_crop_backward(g_aligned, cache.z2_h, cache.z2_w);
  add_inplace(g_z2, g_align);
  add_inplace(g_z2, grad_skip);
  Tensor4<T> g_a = cbr_backward(cache.s2, p.s2, g_z2);
  return cbr_backward(cache.s1, p.s1, g_a);
}

template <typename T>
Tensor4<T> decoder_zblock_forward(const Tensor4<T>& x, const Tensor4<T>& skip,
                                  const ZBlockParams<T>& p, Mode mode,
                                  DecoderCache<T>* cache) {
  if (skip.c * 2 != x.c || skip.h != 2 * x.h || skip.w != 2 * x.w ||
      skip.n != x.n) {
    throw ShapeError("decoder_zblock_forward: x " + x.shape_str() +
                     " expects skip (" + std::to_string(x.n) + "," +
                     std::to_string(x.c / 2) + "," + std::to_string(2 * x.h) + "," +
                     std::to_string(2 * x.w) + "), got " + skip.shape_str());
  }
  Tensor4<T> a = cbr_forward(x, p.s1, mode, cache ? &cache->s1 : nullptr);
  Tensor4<T> u = upsample2x_nearest(a);
  Tensor4<T> f = concat_channels(u, skip);
  if (cache) cache->concat_first_c = u.c;
  Tensor4<T> b = cbr_forward(f, p.s2, mode, cache ? &cache->s2 : nullptr);
  return cbr_forward(b, p.s3, mode, cache ? &cache->s3 : nullptr);
}

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> decoder_zblock_backward(
    const DecoderCache<T>& cache, const ZBlockParams<T>& p,
    const Tensor4<T>& grad_out) {
  Tensor4<T> g_b = cbr_backward(cache.s3, p.s3, grad_out);
  Tensor4<T> g_f = cbr_backward(cache.s2, p.s2, g_b);
  auto [g_u, g_skip] = split_channels(g_f, cache.concat_first_c);
  Tensor4<T> g_a = upsample2x_nearest_backward(g_u);
  Tensor4<T> g_x = cbr_backward(cache.s1, p.s1, g_a);
  return {std::move(g_x), std::move(g_skip)};
}

// --- ZNet -----------------------------------------------------------------------

template <typename T>
ZNet<T>::ZNet(const ZNetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  build_store(seed);
  bind_views();
}

template <typename T>
void ZNet<T>::build_store(std::uint64_t seed) {
  const int base = cfg_.base_channels;
  for (int k = 1; k <= cfg_.depth; ++k) {
    const int half = (base << (k - 1)) / 2;
    const int in_c = k == 1 ? cfg_.in_channels : (base << (k - 2));
    const std::string pre = "enc" + std::to_string(k);
    add_conv(store_, pre + "/conv1", half, in_c, 3);
    add_bn(store_, pre + "/bn1", half);
    add_conv(store_, pre + "/conv2", half, half, 3);
    add_bn(store_, pre + "/bn2", half);
    add_conv(store_, pre + "/conv3", half, half, 3);
    add_bn(store_, pre + "/bn3", half);
  }
  for (int j = 1; j <= cfg_.depth; ++j) {
    const int full = base << (cfg_.depth - j);
    const int half = full / 2;
    const std::string pre = "dec" + std::to_string(j);
    add_conv(store_, pre + "/conv1", half, full, 3);
    add_bn(store_, pre + "/bn1", half);
    add_conv(store_, pre + "/conv2", half, full, 3);
    add_bn(store_, pre + "/bn2", half);
    add_conv(store_, pre + "/conv3", half, half, 3);
    add_bn(store_, pre + "/bn3", half);
  }
  add_conv(store_, "head", 1, base / 2, 1);
  init_store(store_, seed);
}

template <typename T>
void ZNet<T>::bind_views() {
  enc_.clear();
  dec_.clear();
  for (int k = 1; k <= cfg_.depth; ++k) {
    enc_.push_back(block_views(store_, "enc" + std::to_string(k)));
  }
  for (int j = 1; j <= cfg_.depth; ++j) {
    dec_.push_back(block_views(store_, "dec" + std::to_string(j)));
  }
  head_ = conv_view(store_, "head");
}

template <typename T>
Tensor4<T> ZNet<T>::forward(const Tensor4<T>& x, Mode mode,
                            std::vector<BlockShape>* trace) {
  if (x.c != cfg_.in_channels || x.h != cfg_.input_h || x.w != cfg_.input_w) {
    throw ShapeError("znet forward: input " + x.shape_str() + " does not match " +
                     "configured (n," + std::to_string(cfg_.in_channels) + "," +
                     std::to_string(cfg_.input_h) + "," +
                     std::to_string(cfg_.input_w) + ")");
  }
  const bool train = mode == Mode::train;
  if (train) {
    enc_cache_.assign(cfg_.depth, {});
    dec_cache_.assign(cfg_.depth, {});
  }
  std::vector<Tensor4<T>> skips(cfg_.depth);
  Tensor4<T> cur = x;
  for (int k = 0; k < cfg_.depth; ++k) {
    ZBlockOutput<T> o = zblock_forward(cur, enc_[k], cfg_.skip_align, mode,
                                       train ? &enc_cache_[k] : nullptr);
    if (trace) {
      trace->push_back({"enc" + std::to_string(k + 1), o.down.c, o.down.h, o.down.w});
    }
    skips[k] = std::move(o.skip);
    cur = std::move(o.down);
  }
  for (int j = 0; j < cfg_.depth; ++j) {
    const int k = cfg_.depth - 1 - j;
    try {
      cur = decoder_zblock_forward(cur, skips[k], dec_[j], mode,
                                   train ? &dec_cache_[j] : nullptr);
    } catch (const ShapeError& e) {
      throw ShapeError("decoder level " + std::to_string(j + 1) + ": " + e.what());
    }
    skips[k] = Tensor4<T>();  // consumed
    if (trace) {
      trace->push_back({"dec" + std::to_string(j + 1), cur.c, cur.h, cur.w});
    }
  }
  Tensor4<T> logits = conv1x1_forward(cur, head_);
  Tensor4<T> pred = sigmoid(logits);
  if (trace) trace->push_back({"head", pred.c, pred.h, pred.w});
  if (train) {
    head_in_ = std::move(cur);
    pred_ = pred;
    have_caches_ = true;
  }
  return pred;
}

template <typename T>
Tensor4<T> ZNet<T>::backward(const Tensor4<T>& pred_grad) {
  if (!have_caches_) {
    throw ContractError("znet backward called without a train-mode forward");
  }
  if (!pred_grad.same_shape(pred_)) {
    throw ShapeError("znet backward: grad " + pred_grad.shape_str() +
                     " does not match prediction " + pred_.shape_str());
  }
  // d(sigmoid)/d(logit) folded in analytically.
  Tensor4<T> g_logit = Tensor4<T>::like(pred_);
  for (std::size_t i = 0; i < pred_.size(); ++i) {
    g_logit.data[i] = pred_grad.data[i] * pred_.data[i] * (T(1) - pred_.data[i]);
  }
  Tensor4<T> cur = conv1x1_backward(head_in_, head_, g_logit);
  std::vector<Tensor4<T>> skip_grads(cfg_.depth);
  for (int j = cfg_.depth - 1; j >= 0; --j) {
    auto [g_x, g_skip] = decoder_zblock_backward(dec_cache_[j], dec_[j], cur);
    skip_grads[cfg_.depth - 1 - j] = std::move(g_skip);
    cur = std::move(g_x);
  }
  for (int k = cfg_.depth - 1; k >= 0; --k) {
    cur = zblock_backward(enc_cache_[k], enc_[k], cur, skip_grads[k]);
  }
  have_caches_ = false;
  enc_cache_.clear();
  dec_cache_.clear();
  head_in_ = Tensor4<T>();
  pred_ = Tensor4<T>();
  return cur;
}

template <typename T>
int ZNet<T>::conv_layer_count() const {
  std::vector<std::string> names;
  names.reserve(store_.entries().size());
  for (const auto& e : store_.entries()) names.push_back(e.name);
  return count_weight_entries(names);
}

template <typename T>
std::size_t ZNet<T>::trainable_parameter_count() const {
  return store_.trainable_scalar_count();
}

// --- UNetBaseline -----------------------------------------------------------------

template <typename T>
UNetBaseline<T>::UNetBaseline(const ZNetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  build_store(seed);
  bind_views();
}

template <typename T>
void UNetBaseline<T>::build_store(std::uint64_t seed) {
  const int base = cfg_.base_channels;
  for (int k = 1; k <= cfg_.depth; ++k) {
    const int full = base << (k - 1);
    const int half = full / 2;
    const int in_c = k == 1 ? cfg_.in_channels : (base << (k - 2));
    const std::string pre = "enc" + std::to_string(k);
    add_conv(store_, pre + "/conv1", half, in_c, 3);
    add_bn(store_, pre + "/bn1", half);
    add_conv(store_, pre + "/conv2", half, half, 3);
    add_bn(store_, pre + "/bn2", half);
    // channel doubling happens here, directly via convolution
    add_conv(store_, pre + "/conv3", full, half, 3);
    add_bn(store_, pre + "/bn3", full);
  }
  for (int j = 1; j <= cfg_.depth; ++j) {
    const int full = base << (cfg_.depth - j);
    const int half = full / 2;
    const std::string pre = "dec" + std::to_string(j);
    add_conv(store_, pre + "/conv1", half, full, 3);
    add_bn(store_, pre + "/bn1", half);
    add_conv(store_, pre + "/conv2", half, full, 3);
    add_bn(store_, pre + "/bn2", half);
    add_conv(store_, pre + "/conv3", half, half, 3);
    add_bn(store_, pre + "/bn3", half);
  }
  add_conv(store_, "head", 1, base / 2, 1);
  init_store(store_, seed);
}

template <typename T>
void UNetBaseline<T>::bind_views() {
  enc_.clear();
  dec_.clear();
  for (int k = 1; k <= cfg_.depth; ++k) {
    enc_.push_back(block_views(store_, "enc" + std::to_string(k)));
  }
  for (int j = 1; j <= cfg_.depth; ++j) {
    dec_.push_back(block_views(store_, "dec" + std::to_string(j)));
  }
  head_ = conv_view(store_, "head");
}

template <typename T>
Tensor4<T> UNetBaseline<T>::forward(const Tensor4<T>& x, Mode mode,
                                    std::vector<BlockShape>* trace) {
  if (x.c != cfg_.in_channels || x.h != cfg_.input_h || x.w != cfg_.input_w) {
    throw ShapeError("unet forward: input " + x.shape_str() +
                     " does not match configured input size");
  }
  std::vector<Tensor4<T>> skips(cfg_.depth);
  Tensor4<T> cur = x;
  for (int k = 0; k < cfg_.depth; ++k) {
    Tensor4<T> a = cbr_forward<T>(cur, enc_[k].s1, mode, nullptr);
    Tensor4<T> s = cbr_forward<T>(a, enc_[k].s2, mode, nullptr);
    Tensor4<T> p3 = maxpool2x2_forward(s, nullptr);
    cur = cbr_forward<T>(p3, enc_[k].s3, mode, nullptr);
    skips[k] = std::move(s);
    if (trace) {
      trace->push_back({"enc" + std::to_string(k + 1), cur.c, cur.h, cur.w});
    }
  }
  for (int j = 0; j < cfg_.depth; ++j) {
    const int k = cfg_.depth - 1 - j;
    cur = decoder_zblock_forward<T>(cur, skips[k], dec_[j], mode, nullptr);
    skips[k] = Tensor4<T>();
    if (trace) {
      trace->push_back({"dec" + std::to_string(j + 1), cur.c, cur.h, cur.w});
    }
  }
  Tensor4<T> pred = sigmoid(conv1x1_forward(cur, head_));
  if (trace) trace->push_back({"head", pred.c, pred.h, pred.w});
  return pred;
}

template <typename T>
int UNetBaseline<T>::conv_layer_count() const {
  std::vector<std::string> names;
  for (const auto& e : store_.entries()) names.push_back(e.name);
  return count_weight_entries(names);
}

template <typename T>
std::size_t UNetBaseline<T>::trainable_parameter_count() const {
  return store_.trainable_scalar_count();
}

// --- architecture comparison -------------------------------------------------------

std::vector<LevelParamCounts> encoder_conv_param_comparison(const ZNetConfig& cfg) {
  ZNet<float> z(cfg, 0);
  UNetBaseline<float> u(cfg, 0);
  std::vector<LevelParamCounts> rows;
  for (int k = 1; k <= cfg.depth; ++k) {
    LevelParamCounts row;
    row.level = k;
    const std::string pre = "enc" + std::to_string(k) + "/conv";
    for (const auto& e : z.store().entries()) {
      if (e.name.rfind(pre, 0) == 0) row.znet_conv_params += e.count();
    }
    for (const auto& e : u.store().entries()) {
      if (e.name.rfind(pre, 0) == 0) row.unet_conv_params += e.count();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_param_comparison(const std::vector<LevelParamCounts>& rows) {
  std::string out = "level  znet_conv_params  unet_conv_params\n";
  std::size_t zt = 0, ut = 0;
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-5d  %16zu  %16zu\n", r.level,
                  r.znet_conv_params, r.unet_conv_params);
    out += buf;
    zt += r.znet_conv_params;
    ut += r.unet_conv_params;
  }
  std::snprintf(buf, sizeof(buf), "total  %16zu  %16zu\n", zt, ut);
  out += buf;
  return out;
}

// --- checkpoints ---------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'Z', 'N', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void w_bytes(std::FILE* f, const void* p, std::size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw IoError("checkpoint write failed");
}

void w_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  w_bytes(f, b, 4);
}

void w_u64(std::FILE* f, std::uint64_t v) {
  w_u32(f, static_cast<std::uint32_t>(v & 0xffffffffull));
  w_u32(f, static_cast<std::uint32_t>(v >> 32));
}

void w_i32(std::FILE* f, std::int32_t v) { w_u32(f, static_cast<std::uint32_t>(v)); }

void w_f32(std::FILE* f, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  w_u32(f, u);
}

void r_bytes(std::FILE* f, void* p, std::size_t n) {
  if (std::fread(p, 1, n, f) != n) throw ParseError("checkpoint truncated");
}

std::uint32_t r_u32(std::FILE* f) {
  unsigned char b[4];
  r_bytes(f, b, 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t r_u64(std::FILE* f) {
  const std::uint64_t lo = r_u32(f);
  const std::uint64_t hi = r_u32(f);
  return lo | (hi << 32);
}

std::int32_t r_i32(std::FILE* f) { return static_cast<std::int32_t>(r_u32(f)); }

float r_f32(std::FILE* f) {
  const std::uint32_t u = r_u32(f);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

void write_named_array(std::FILE* f, const std::string& name,
                       const std::vector<int>& dims, const auto& values) {
  w_u32(f, static_cast<std::uint32_t>(name.size()));
  w_bytes(f, name.data(), name.size());
  w_u32(f, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) w_u32(f, static_cast<std::uint32_t>(d));
  for (const auto v : values) w_f32(f, static_cast<float>(v));
}

ZNetConfig read_header(std::FILE* f, CheckpointMeta* meta, std::uint64_t* entries) {
  char magic[8];
  r_bytes(f, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r_u32(f);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  ZNetConfig cfg;
  cfg.depth = r_i32(f);
  cfg.base_channels = r_i32(f);
  cfg.in_channels = r_i32(f);
  cfg.input_h = r_i32(f);
  cfg.input_w = r_i32(f);
  cfg.skip_align = r_u32(f) == 0 ? SkipAlign::pool : SkipAlign::crop;
  cfg.precision_bits = static_cast<int>(r_u32(f));
  CheckpointMeta m;
  m.adam_t = r_u64(f);
  m.epochs_completed = r_u32(f);
  if (meta) *meta = m;
  const std::uint64_t n = r_u64(f);
  if (entries) *entries = n;
  return cfg;
}

void check_field(const std::string& field, long expected, long actual) {
  if (expected != actual) {
    throw ConfigError("checkpoint config mismatch: " + field + " is " +
                      std::to_string(actual) + ", expected " +
                      std::to_string(expected));
  }
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const ZNetConfig& cfg,
                     const ParamStore<T>& store, CheckpointMeta meta) {
  const std::string tmp = path + ".tmp";
  {
    FilePtr f(std::fopen(tmp.c_str(), "wb"));
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    w_bytes(f.get(), kMagic, 8);
    w_u32(f.get(), kVersion);
    w_i32(f.get(), cfg.depth);
    w_i32(f.get(), cfg.base_channels);
    w_i32(f.get(), cfg.in_channels);
    w_i32(f.get(), cfg.input_h);
    w_i32(f.get(), cfg.input_w);
    w_u32(f.get(), cfg.skip_align == SkipAlign::pool ? 0u : 1u);
    w_u32(f.get(), static_cast<std::uint32_t>(cfg.precision_bits));
    w_u64(f.get(), meta.adam_t);
    w_u32(f.get(), meta.epochs_completed);
    std::uint64_t entries = 0;
    for (const auto& e : store.entries()) entries += e.trainable ? 3 : 1;
    w_u64(f.get(), entries);
    for (const auto& e : store.entries()) {
      write_named_array(f.get(), e.name, e.dims, e.value);
      if (e.trainable) {
        write_named_array(f.get(), e.name + "/adam_m", e.dims, e.adam_m);
        write_named_array(f.get(), e.name + "/adam_v", e.dims, e.adam_v);
      }
    }
    if (std::fflush(f.get()) != 0) throw IoError("checkpoint flush failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, const ZNetConfig& expected,
                               ParamStore<T>& store) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open checkpoint " + path);
  CheckpointMeta meta;
  std::uint64_t entries = 0;
  const ZNetConfig cfg = read_header(f.get(), &meta, &entries);
  check_field("depth", expected.depth, cfg.depth);
  check_field("base_channels", expected.base_channels, cfg.base_channels);
  check_field("in_channels", expected.in_channels, cfg.in_channels);
  check_field("input_h", expected.input_h, cfg.input_h);
  check_field("input_w", expected.input_w, cfg.input_w);
  check_field("skip_align", static_cast<long>(expected.skip_align),
              static_cast<long>(cfg.skip_align));
  check_field("precision_bits", expected.precision_bits, cfg.precision_bits);

  std::vector<bool> filled(store.entries().size(), false);
  for (std::uint64_t i = 0; i < entries; ++i) {
    const std::uint32_t name_len = r_u32(f.get());
    std::string name(name_len, '\0');
    r_bytes(f.get(), name.data(), name_len);
    const std::uint32_t dim_count = r_u32(f.get());
    std::vector<int> dims(dim_count);
    std::size_t count = 1;
    for (auto& d : dims) {
      d = static_cast<int>(r_u32(f.get()));
      count *= static_cast<std::size_t>(d);
    }
    std::string base = name;
    enum { kValue, kAdamM, kAdamV } slot = kValue;
    if (name.ends_with("/adam_m")) {
      base = name.substr(0, name.size() - 7);
      slot = kAdamM;
    } else if (name.ends_with("/adam_v")) {
      base = name.substr(0, name.size() - 7);
      slot = kAdamV;
    }
    if (!store.contains(base)) {
      throw ConfigError("checkpoint entry '" + name + "' has no matching parameter");
    }
    ParamEntry<T>& e = store.at(base);
    if (dims != e.dims) {
      throw ConfigError("checkpoint entry '" + name + "' dims mismatch");
    }
    std::vector<T>* dst = slot == kValue ? &e.value
                          : slot == kAdamM ? &e.adam_m
                                           : &e.adam_v;
    if (dst->size() != count) {
      throw ConfigError("checkpoint entry '" + name + "' size mismatch");
    }
    for (std::size_t j = 0; j < count; ++j) (*dst)[j] = static_cast<T>(r_f32(f.get()));
    if (slot == kValue) {
      for (std::size_t j = 0; j < store.entries().size(); ++j) {
        if (store.entries()[j].name == base) filled[j] = true;
      }
    }
  }
  for (std::size_t j = 0; j < filled.size(); ++j) {
    if (!filled[j]) {
      throw ConfigError("checkpoint missing parameter '" + store.entries()[j].name +
                        "'");
    }
  }
  return meta;
}

ZNetConfig read_checkpoint_config(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open checkpoint " + path);
  return read_header(f.get(), nullptr, nullptr);
}

// --- instantiations ---------------------------------------------------------------

#define ZNET_INSTANTIATE_MODEL(T)                                                     \
  template class ParamStore<T>;                                                       \
  template ZBlockOutput<T> zblock_forward<T>(const Tensor4<T>&, const ZBlockParams<T>&,\
                                             SkipAlign, Mode, ZBlockCache<T>*);       \
  template Tensor4<T> zblock_backward<T>(const ZBlockCache<T>&, const ZBlockParams<T>&,\
                                         const Tensor4<T>&, const Tensor4<T>&);       \
  template Tensor4<T> decoder_zblock_forward<T>(const Tensor4<T>&, const Tensor4<T>&, \
                                                const ZBlockParams<T>&, Mode,         \
                                                DecoderCache<T>*);                    \
  template std::pair<Tensor4<T>, Tensor4<T>> decoder_zblock_backward<T>(              \
      const DecoderCache<T>&, const ZBlockParams<T>&, const Tensor4<T>&);             \
  template class ZNet<T>;                                                             \
  template class UNetBaseline<T>;                                                     \
  template void save_checkpoint<T>(const std::string&, const ZNetConfig&,             \
                                   const ParamStore<T>&, CheckpointMeta);             \
  template CheckpointMeta load_checkpoint<T>(const std::string&, const ZNetConfig&,   \
                                             ParamStore<T>&);

ZNET_INSTANTIATE_MODEL(float)
ZNET_INSTANTIATE_MODEL(double)

#undef ZNET_INSTANTIATE_MODEL

}  // namespace znet
