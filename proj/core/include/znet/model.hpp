#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "znet/tensor.hpp"

namespace znet {

enum class SkipAlign { pool, crop };

struct ZNetConfig {
  int depth = 5;
  int base_channels = 32;
  int input_h = 256;
  int input_w = 256;
  int in_channels = 1;
  SkipAlign skip_align = SkipAlign::pool;
  int precision_bits = 32;  // 32 for training, 64 for gradient checks

  // depth >= 1, base_channels even and >= 2, input dims divisible by 2^depth.
  void validate() const;

  bool operator==(const ZNetConfig&) const = default;
};

// Named registry of parameter arrays. Trainable entries carry a paired
// gradient array and Adam moment arrays; buffers (batch-norm running stats)
// carry only values. Iteration order is insertion order.
template <typename T>
struct ParamEntry {
  std::string name;
  std::vector<int> dims;
  bool trainable = true;
  std::vector<T> value;
  std::vector<T> grad;
  std::vector<T> adam_m;
  std::vector<T> adam_v;

  std::size_t count() const {
    std::size_t p = 1;
    for (int d : dims) p *= static_cast<std::size_t>(d);
    return p;
  }
};

template <typename T>
class ParamStore {
 public:
  ParamEntry<T>& add(const std::string& name, std::vector<int> dims,
                     bool trainable = true);
  bool contains(const std::string& name) const;
  ParamEntry<T>& at(const std::string& name);
  const ParamEntry<T>& at(const std::string& name) const;

  std::vector<ParamEntry<T>>& entries() { return entries_; }
  const std::vector<ParamEntry<T>>& entries() const { return entries_; }

  std::size_t trainable_scalar_count() const;
  void zero_grads();

 private:
  std::vector<ParamEntry<T>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// --- building blocks ----------------------------------------------------------

// conv3x3 -> batch norm -> ReLU stage.
template <typename T>
struct CbrParams {
  ConvParamsView<T> conv;
  BatchNormView<T> bn;
};

template <typename T>
struct ZBlockParams {
  CbrParams<T> s1, s2, s3;
};

template <typename T>
struct CbrCache {
  Tensor4<T> x_in;    // conv input
  BatchNormCache<T> bn;
  Tensor4<T> bn_out;  // ReLU input
};

template <typename T>
struct ZBlockCache {
  CbrCache<T> s1, s2, s3;
  PoolCache pool_main;  // Z2 -> Z3
  PoolCache pool_skip;  // aligned path when skip_align == pool
  SkipAlign align = SkipAlign::pool;
  int z2_h = 0, z2_w = 0;
  int half_channels = 0;
};

template <typename T>
struct DecoderCache {
  CbrCache<T> s1, s2, s3;
  int concat_first_c = 0;
};

// Fused features at half resolution plus the pre-pool skip tensor.
// down.channels == 2 * skip.channels; down spatial dims == skip dims / 2.
template <typename T>
struct ZBlockOutput {
  Tensor4<T> down;
  Tensor4<T> skip;
};

// Encoder Z-block: with CBR = conv3x3 -> BN -> ReLU,
//   a  = CBR(x -> C/2)
//   Z2 = CBR(a -> C/2)
//   Z4 = CBR(maxpool(Z2) -> C/2)
//   down = concat(align(Z2), Z4), skip = Z2
// where align is a 2x2 max pool or a center crop to half size. Channel count
// doubles by fusion; exactly three convolutions.
template <typename T>
ZBlockOutput<T> zblock_forward(const Tensor4<T>& x, const ZBlockParams<T>& p,
                               SkipAlign align, Mode mode,
                               ZBlockCache<T>* cache = nullptr);

// Gradients w.r.t. the block input, given gradients for both outputs.
template <typename T>
Tensor4<T> zblock_backward(const ZBlockCache<T>& cache, const ZBlockParams<T>& p,
                           const Tensor4<T>& grad_down, const Tensor4<T>& grad_skip);

// Decoder Z-block, the mirror construction: x carries C channels at half
// resolution, skip carries C/2 at full resolution.
//   a = CBR(x -> C/2); u = upsample2x(a); f = concat(u, skip)
//   out = CBR(CBR(f -> C/2) -> C/2)
template <typename T>
Tensor4<T> decoder_zblock_forward(const Tensor4<T>& x, const Tensor4<T>& skip,
                                  const ZBlockParams<T>& p, Mode mode,
                                  DecoderCache<T>* cache = nullptr);

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> decoder_zblock_backward(
    const DecoderCache<T>& cache, const ZBlockParams<T>& p,
    const Tensor4<T>& grad_out);

// --- full networks --------------------------------------------------------------

struct BlockShape {
  std::string name;
  int channels = 0;
  int h = 0, w = 0;
};

// The Z-net: depth encoder Z-blocks (channels base, 2*base, ...), depth
// decoder Z-blocks consuming the skips in reverse, then a 1x1 convolution to
// one channel and an elementwise sigmoid. He-style initialization, fully
// determined by the seed.
template <typename T>
class ZNet {
 public:
  ZNet(const ZNetConfig& cfg, std::uint64_t seed);
  ZNet(const ZNet&) = delete;
  ZNet& operator=(const ZNet&) = delete;

  const ZNetConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }

  // Train mode retains layer caches for backward(). The optional trace
  // records every block output shape.
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode,
                     std::vector<BlockShape>* trace = nullptr);

  // Takes the gradient of the scalar loss w.r.t. the sigmoid prediction,
  // composes it with the sigmoid/1x1-head analytically, and populates every
  // parameter's gradient array. Returns the gradient w.r.t. the input.
  Tensor4<T> backward(const Tensor4<T>& pred_grad);

  int conv_layer_count() const;  // 6 * depth + 1
  std::size_t trainable_parameter_count() const;

 private:
  void build_store(std::uint64_t seed);
  void bind_views();

  ZNetConfig cfg_;
  ParamStore<T> store_;
  std::vector<ZBlockParams<T>> enc_;
  std::vector<ZBlockParams<T>> dec_;
  ConvParamsView<T> head_;  // 1x1 head stored with 3x3-free layout (1, C, 1, 1)

  bool have_caches_ = false;
  std::vector<ZBlockCache<T>> enc_cache_;
  std::vector<DecoderCache<T>> dec_cache_;
  Tensor4<T> head_in_;
  Tensor4<T> pred_;
};

// Plain U-net-style baseline for structural comparison: same layout, but the
// encoder doubles channels with a widening convolution after pooling instead
// of by fusion. Inference only.
template <typename T>
class UNetBaseline {
 public:
  UNetBaseline(const ZNetConfig& cfg, std::uint64_t seed);
  UNetBaseline(const UNetBaseline&) = delete;
  UNetBaseline& operator=(const UNetBaseline&) = delete;

  const ZNetConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }

  Tensor4<T> forward(const Tensor4<T>& x, Mode mode,
                     std::vector<BlockShape>* trace = nullptr);

  int conv_layer_count() const;
  std::size_t trainable_parameter_count() const;

 private:
  void build_store(std::uint64_t seed);
  void bind_views();

  ZNetConfig cfg_;
  ParamStore<T> store_;
  std::vector<ZBlockParams<T>> enc_;
  std::vector<ZBlockParams<T>> dec_;
  ConvParamsView<T> head_;
};

// Per-encoder-level conv parameter counts (weights + biases) for the two
// architectures, measured from freshly built stores.
struct LevelParamCounts {
  int level = 0;
  std::size_t znet_conv_params = 0;
  std::size_t unet_conv_params = 0;
};

std::vector<LevelParamCounts> encoder_conv_param_comparison(const ZNetConfig& cfg);
std::string format_param_comparison(const std::vector<LevelParamCounts>& rows);

// --- checkpoints ---------------------------------------------------------------
//
// Binary format, little-endian: magic "ZNCKPT01", u32 version, config fields
// (i32 depth, base_channels, in_channels, input_h, input_w; u32 skip_align,
// precision_bits), u64 adam step counter, u32 epochs completed, u64 entry
// count, then per entry: u32 name length, name bytes, u32 dim count, u32
// dims, float32 payload. Adam moments ride along as "<name>/adam_m" and
// "<name>/adam_v" entries.

struct CheckpointMeta {
  std::uint64_t adam_t = 0;
  std::uint32_t epochs_completed = 0;
};

template <typename T>
void save_checkpoint(const std::string& path, const ZNetConfig& cfg,
                     const ParamStore<T>& store, CheckpointMeta meta = {});

// Rejects any config mismatch with ConfigError naming the field.
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, const ZNetConfig& expected,
                               ParamStore<T>& store);

ZNetConfig read_checkpoint_config(const std::string& path);

const char* skip_align_name(SkipAlign a);
SkipAlign skip_align_from_name(const std::string& s);

}  // namespace znet
