#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "znet/errors.hpp"

namespace znet {

enum class Mode { train, eval };

// Kernel-internal parallelism. Work is split into contiguous chunks over
// batch and output-channel indices; every thread writes a disjoint slab, so
// results are bit-identical for any thread count. Default is 1.
void set_num_threads(int n);
int num_threads();

// Dense rank-4 tensor in row-major (batch, channel, height, width) order.
// The gradient buffer is optional and, when allocated, has the same length
// as data.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;
  std::vector<T> grad;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0));

  static Tensor4 like(const Tensor4& o) { return Tensor4(o.n, o.c, o.h, o.w); }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const;

  std::size_t offset(int in, int ic, int iy, int ix) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix;
  }
  T& at(int in, int ic, int iy, int ix) { return data[offset(in, ic, iy, ix)]; }
  T at(int in, int ic, int iy, int ix) const { return data[offset(in, ic, iy, ix)]; }

  T* plane(int in, int ic) {
    return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
  }
  const T* plane(int in, int ic) const {
    return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
  }

  void ensure_grad();
  bool has_grad() const { return !grad.empty(); }
};

// Non-owning view of 3x3 convolution parameters. weight is laid out as
// (out_channels, in_channels, 3, 3), bias as (out_channels).
template <typename T>
struct ConvParamsView {
  int out_channels = 0;
  int in_channels = 0;
  T* weight = nullptr;
  T* bias = nullptr;
  T* grad_weight = nullptr;
  T* grad_bias = nullptr;
};

// Owning 3x3 convolution parameters with paired gradient arrays.
template <typename T>
struct ConvParams {
  int out_channels = 0;
  int in_channels = 0;
  std::vector<T> weight;       // (out, in, 3, 3)
  std::vector<T> bias;         // (out)
  std::vector<T> grad_weight;
  std::vector<T> grad_bias;

  ConvParams(int out_c, int in_c);
  void zero_grads();

  operator ConvParamsView<T>() {
    return {out_channels, in_channels, weight.data(), bias.data(),
            grad_weight.data(), grad_bias.data()};
  }
};

template <typename T>
struct BatchNormView {
  int channels = 0;
  T* gamma = nullptr;
  T* beta = nullptr;
  T* running_mean = nullptr;
  T* running_var = nullptr;
  T* grad_gamma = nullptr;
  T* grad_beta = nullptr;
  T eps = T(1e-5);
  T momentum = T(0.99);
};

// Owning batch-norm parameters: affine pair (gamma, beta) with gradients,
// plus running statistics used in eval mode.
template <typename T>
struct BatchNormParams {
  int channels = 0;
  std::vector<T> gamma;         // init 1
  std::vector<T> beta;          // init 0
  std::vector<T> running_mean;  // init 0
  std::vector<T> running_var;   // init 1
  std::vector<T> grad_gamma;
  std::vector<T> grad_beta;
  T eps = T(1e-5);
  T momentum = T(0.99);

  explicit BatchNormParams(int c);
  void zero_grads();

  operator BatchNormView<T>() {
    return {channels,           gamma.data(),       beta.data(),
            running_mean.data(), running_var.data(), grad_gamma.data(),
            grad_beta.data(),   eps,                momentum};
  }
};

// Training-mode statistics captured by batchnorm_forward, consumed by
// batchnorm_backward.
template <typename T>
struct BatchNormCache {
  bool train_mode = false;
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> xhat;     // normalized pre-affine values, full tensor size
  std::vector<T> inv_std;  // per channel
  std::vector<T> gamma;    // gamma snapshot at forward time
};

// Argmax bookkeeping for 2x2/stride-2 max pooling; one flat input index per
// output element. Ties resolve to the first cell in row-major window order.
struct PoolCache {
  int n = 0, c = 0, h = 0, w = 0;  // input dims
  std::vector<std::uint32_t> argmax;
};

// --- forward/backward kernels ------------------------------------------------
//
// All convolutions are 3x3, stride 1, zero padding 1 (same-size). Backward
// kernels return the gradient w.r.t. the input and accumulate parameter
// gradients into the view's gradient arrays.

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, ConvParamsView<T> p);

template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& x, ConvParamsView<T> p,
                           const Tensor4<T>& grad_out);

// Train mode normalizes per channel over (n, h, w) with batch statistics and
// updates running stats by exponential moving average:
//   running = momentum * running + (1 - momentum) * batch_stat.
// Eval mode applies the stored running statistics. A cache, when supplied,
// records what backward needs (train mode only).
template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& x, BatchNormView<T> p, Mode mode,
                             BatchNormCache<T>* cache = nullptr);

template <typename T>
Tensor4<T> batchnorm_backward(const BatchNormCache<T>& cache, BatchNormView<T> p,
                              const Tensor4<T>& grad_out);

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x);

// Gradient passes where x > 0; the subgradient at exactly 0 is 0.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, const Tensor4<T>& grad_out);

template <typename T>
Tensor4<T> maxpool2x2_forward(const Tensor4<T>& x, PoolCache* cache = nullptr);

template <typename T>
Tensor4<T> maxpool2x2_backward(const PoolCache& cache, const Tensor4<T>& grad_out);

// Channel concatenation, a's channels first. split_channels is its backward.
template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b);

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& x, int c_first);

// Central h2 x w2 window at offset (floor((h-h2)/2), floor((w-w2)/2)).
template <typename T>
Tensor4<T> center_crop(const Tensor4<T>& x, int h2, int w2);

// Zero-pads grad_out back to the (h, w) source shape of the matching crop.
template <typename T>
Tensor4<T> center_crop_backward(const Tensor4<T>& grad_out, int h, int w);

// Nearest-neighbor 2x upsampling: each input cell replicated into a 2x2
// block. Backward sums each 2x2 block of grads.
template <typename T>
Tensor4<T> upsample2x_nearest(const Tensor4<T>& x);

template <typename T>
Tensor4<T> upsample2x_nearest_backward(const Tensor4<T>& grad_out);

// dst += src, elementwise. Shapes must match.
template <typename T>
void add_inplace(Tensor4<T>& dst, const Tensor4<T>& src);

// Debug dump: 4 little-endian uint32 dims followed by float32 values,
// row-major. Double tensors are narrowed to float32.
template <typename T>
void write_tensor_dump(const std::string& path, const Tensor4<T>& t);

}  // namespace znet
