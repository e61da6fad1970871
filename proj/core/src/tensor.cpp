#include "znet/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <thread>

namespace znet {

namespace {

int g_num_threads = 1;

// Runs fn(begin, end) over contiguous chunks of [0, count). With one thread
// this is a plain call; otherwise chunks are fixed per thread so output is
// independent of scheduling.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  const int threads = std::min<std::size_t>(g_num_threads, count);
  if (threads <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

std::string dims4(int n, int c, int h, int w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%d,%d,%d,%d)", n, c, h, w);
  return buf;
}

void put_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

}  // namespace

void set_num_threads(int n) { g_num_threads = std::max(1, n); }
int num_threads() { return g_num_threads; }

template <typename T>
Tensor4<T>::Tensor4(int n_, int c_, int h_, int w_, T fill)
    : n(n_), c(c_), h(h_), w(w_) {
  if (n < 1 || c < 1 || h < 1 || w < 1) {
    throw ShapeError("Tensor4 dims must be >= 1, got " + dims4(n, c, h, w));
  }
  data.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

template <typename T>
std::string Tensor4<T>::shape_str() const {
  return dims4(n, c, h, w);
}

template <typename T>
void Tensor4<T>::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), T(0));
}

template <typename T>
ConvParams<T>::ConvParams(int out_c, int in_c)
    : out_channels(out_c), in_channels(in_c) {
  if (out_c < 1 || in_c < 1) {
    throw ShapeError("ConvParams channels must be >= 1");
  }
  weight.assign(static_cast<std::size_t>(out_c) * in_c * 9, T(0));
  bias.assign(out_c, T(0));
  grad_weight.assign(weight.size(), T(0));
  grad_bias.assign(bias.size(), T(0));
}

template <typename T>
void ConvParams<T>::zero_grads() {
  std::fill(grad_weight.begin(), grad_weight.end(), T(0));
  std::fill(grad_bias.begin(), grad_bias.end(), T(0));
}

template <typename T>
BatchNormParams<T>::BatchNormParams(int c) : channels(c) {
  if (c < 1) throw ShapeError("BatchNormParams channels must be >= 1");
  gamma.assign(c, T(1));
  beta.assign(c, T(0));
  running_mean.assign(c, T(0));
  running_var.assign(c, T(1));
  grad_gamma.assign(c, T(0));
  grad_beta.assign(c, T(0));
}

template <typename T>
void BatchNormParams<T>::zero_grads() {
  std::fill(grad_gamma.begin(), grad_gamma.end(), T(0));
  std::fill(grad_beta.begin(), grad_beta.end(), T(0));
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, ConvParamsView<T> p) {
  if (x.c != p.in_channels) {
    throw ShapeError("conv2d_forward: input has " + std::to_string(x.c) +
                     " channels " + x.shape_str() + " but kernel expects " +
                     std::to_string(p.in_channels));
  }
  Tensor4<T> out(x.n, p.out_channels, x.h, x.w);
  const int h = x.h, w = x.w;
  const std::size_t jobs = static_cast<std::size_t>(x.n) * p.out_channels;
  parallel_chunks(jobs, [&](std::size_t jb, std::size_t je) {
    for (std::size_t job = jb; job < je; ++job) {
      const int in = static_cast<int>(job / p.out_channels);
      const int oc = static_cast<int>(job % p.out_channels);
      T* op = out.plane(in, oc);
      const T b = p.bias[oc];
      for (int i = 0; i < h * w; ++i) op[i] = b;
      for (int ic = 0; ic < p.in_channels; ++ic) {
        const T* xp = x.plane(in, ic);
        const T* wrow = p.weight + (static_cast<std::size_t>(oc) * p.in_channels + ic) * 9;
        for (int ki = 0; ki < 3; ++ki) {
          const int di = ki - 1;
          const int i0 = std::max(0, -di), i1 = std::min(h, h - di);
          for (int kj = 0; kj < 3; ++kj) {
            const int dj = kj - 1;
            const int j0 = std::max(0, -dj), j1 = std::min(w, w - dj);
            const T wv = wrow[ki * 3 + kj];
            for (int i = i0; i < i1; ++i) {
              const T* src = xp + static_cast<std::size_t>(i + di) * w + dj;
              T* dst = op + static_cast<std::size_t>(i) * w;
              for (int j = j0; j < j1; ++j) dst[j] += wv * src[j];
            }
          }
        }
      }
    }
  });
  return out;
}

template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& x, ConvParamsView<T> p,
                           const Tensor4<T>& grad_out) {
  if (x.c != p.in_channels) {
    throw ShapeError("conv2d_backward: input channels " + std::to_string(x.c) +
                     " != kernel in_channels " + std::to_string(p.in_channels));
  }
  if (grad_out.n != x.n || grad_out.c != p.out_channels || grad_out.h != x.h ||
      grad_out.w != x.w) {
    throw ShapeError("conv2d_backward: grad_out " + grad_out.shape_str() +
                     " does not match forward output " +
                     dims4(x.n, p.out_channels, x.h, x.w));
  }
  Tensor4<T> gx(x.n, x.c, x.h, x.w);
  const int h = x.h, w = x.w;
  for (int in = 0; in < x.n; ++in) {
    for (int oc = 0; oc < p.out_channels; ++oc) {
      const T* gp = grad_out.plane(in, oc);
      T bsum = T(0);
      for (int i = 0; i < h * w; ++i) bsum += gp[i];
      p.grad_bias[oc] += bsum;
      for (int ic = 0; ic < p.in_channels; ++ic) {
        const T* xp = x.plane(in, ic);
        T* gxp = gx.plane(in, ic);
        T* gwrow = p.grad_weight + (static_cast<std::size_t>(oc) * p.in_channels + ic) * 9;
        const T* wrow = p.weight + (static_cast<std::size_t>(oc) * p.in_channels + ic) * 9;
        for (int ki = 0; ki < 3; ++ki) {
          const int di = ki - 1;
          const int i0 = std::max(0, -di), i1 = std::min(h, h - di);
          for (int kj = 0; kj < 3; ++kj) {
            const int dj = kj - 1;
            const int j0 = std::max(0, -dj), j1 = std::min(w, w - dj);
            const T wv = wrow[ki * 3 + kj];
            T wacc = T(0);
            for (int i = i0; i < i1; ++i) {
              const T* src = xp + static_cast<std::size_t>(i + di) * w + dj;
              T* gdst = gxp + static_cast<std::size_t>(i + di) * w + dj;
              const T* grow = gp + static_cast<std::size_t>(i) * w;
              for (int j = j0; j < j1; ++j) {
                wacc += src[j] * grow[j];
                gdst[j] += wv * grow[j];
              }
            }
            gwrow[ki * 3 + kj] += wacc;
          }
        }
      }
    }
  }
  return gx;
}

template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& x, BatchNormView<T> p, Mode mode,
                             BatchNormCache<T>* cache) {
  if (x.c != p.channels) {
    throw ShapeError("batchnorm_forward: input has " + std::to_string(x.c) +
                     " channels but params have " + std::to_string(p.channels));
  }
  Tensor4<T> out = Tensor4<T>::like(x);
  const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
  if (cache) {
    cache->train_mode = (mode == Mode::train);
    cache->n = x.n;
    cache->c = x.c;
    cache->h = x.h;
    cache->w = x.w;
    cache->xhat.clear();
    cache->inv_std.assign(x.c, T(0));
    cache->gamma.assign(p.gamma, p.gamma + x.c);
  }
  if (mode == Mode::eval) {
    for (int ic = 0; ic < x.c; ++ic) {
      const T scale = p.gamma[ic] / std::sqrt(p.running_var[ic] + p.eps);
      const T shift = p.beta[ic] - scale * p.running_mean[ic];
      for (int in = 0; in < x.n; ++in) {
        const T* xp = x.plane(in, ic);
        T* op = out.plane(in, ic);
        for (std::size_t i = 0; i < plane; ++i) op[i] = scale * xp[i] + shift;
      }
    }
    return out;
  }
  const T m = static_cast<T>(static_cast<std::size_t>(x.n) * plane);
  if (cache) cache->xhat.assign(x.size(), T(0));
  for (int ic = 0; ic < x.c; ++ic) {
    T sum = T(0);
    for (int in = 0; in < x.n; ++in) {
      const T* xp = x.plane(in, ic);
      for (std::size_t i = 0; i < plane; ++i) sum += xp[i];
    }
    const T mean = sum / m;
    T var_sum = T(0);
    for (int in = 0; in < x.n; ++in) {
      const T* xp = x.plane(in, ic);
      for (std::size_t i = 0; i < plane; ++i) {
        const T d = xp[i] - mean;
        var_sum += d * d;
      }
    }
    const T var = var_sum / m;
    const T inv_std = T(1) / std::sqrt(var + p.eps);
    const T g = p.gamma[ic], b = p.beta[ic];
    for (int in = 0; in < x.n; ++in) {
      const T* xp = x.plane(in, ic);
      T* op = out.plane(in, ic);
      T* ch = cache ? cache->xhat.data() + (static_cast<std::size_t>(in) * x.c + ic) * plane
                    : nullptr;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = (xp[i] - mean) * inv_std;
        if (ch) ch[i] = xh;
        op[i] = g * xh + b;
      }
    }
    if (cache) cache->inv_std[ic] = inv_std;
    p.running_mean[ic] = p.momentum * p.running_mean[ic] + (T(1) - p.momentum) * mean;
    p.running_var[ic] = p.momentum * p.running_var[ic] + (T(1) - p.momentum) * var;
  }
  return out;
}

template <typename T>
Tensor4<T> batchnorm_backward(const BatchNormCache<T>& cache, BatchNormView<T> p,
                              const Tensor4<T>& grad_out) {
  if (!cache.train_mode) {
    throw ContractError("batchnorm_backward requires a train-mode cache");
  }
  if (grad_out.n != cache.n || grad_out.c != cache.c || grad_out.h != cache.h ||
      grad_out.w != cache.w) {
    throw ShapeError("batchnorm_backward: grad_out " + grad_out.shape_str() +
                     " does not match cached shape " +
                     dims4(cache.n, cache.c, cache.h, cache.w));
  }
  Tensor4<T> gx(cache.n, cache.c, cache.h, cache.w);
  const std::size_t plane = static_cast<std::size_t>(cache.h) * cache.w;
  const T m = static_cast<T>(static_cast<std::size_t>(cache.n) * plane);
  for (int ic = 0; ic < cache.c; ++ic) {
    T sum_dy = T(0), sum_dy_xhat = T(0);
    for (int in = 0; in < cache.n; ++in) {
      const T* gp = grad_out.plane(in, ic);
      const T* xh = cache.xhat.data() + (static_cast<std::size_t>(in) * cache.c + ic) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += gp[i];
        sum_dy_xhat += gp[i] * xh[i];
      }
    }
    p.grad_gamma[ic] += sum_dy_xhat;
    p.grad_beta[ic] += sum_dy;
    const T coef = cache.gamma[ic] * cache.inv_std[ic] / m;
    for (int in = 0; in < cache.n; ++in) {
      const T* gp = grad_out.plane(in, ic);
      const T* xh = cache.xhat.data() + (static_cast<std::size_t>(in) * cache.c + ic) * plane;
      T* gxp = gx.plane(in, ic);
      for (std::size_t i = 0; i < plane; ++i) {
        gxp[i] = coef * (m * gp[i] - sum_dy - xh[i] * sum_dy_xhat);
      }
    }
  }
  return gx;
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
  Tensor4<T> out = Tensor4<T>::like(x);
  for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
  return out;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& x, const Tensor4<T>& grad_out) {
  if (!x.same_shape(grad_out)) {
    throw ShapeError("relu_backward: x " + x.shape_str() + " vs grad_out " +
                     grad_out.shape_str());
  }
  Tensor4<T> gx = Tensor4<T>::like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    gx.data[i] = x.data[i] > T(0) ? grad_out.data[i] : T(0);
  }
  return gx;
}

template <typename T>
Tensor4<T> maxpool2x2_forward(const Tensor4<T>& x, PoolCache* cache) {
  if (x.h % 2 != 0 || x.w % 2 != 0) {
    throw ShapeError("maxpool2x2_forward requires even spatial dims, got " +
                     x.shape_str());
  }
  const int oh = x.h / 2, ow = x.w / 2;
  Tensor4<T> out(x.n, x.c, oh, ow);
  if (cache) {
    cache->n = x.n;
    cache->c = x.c;
    cache->h = x.h;
    cache->w = x.w;
    cache->argmax.assign(out.size(), 0);
  }
  for (int in = 0; in < x.n; ++in) {
    for (int ic = 0; ic < x.c; ++ic) {
      const T* xp = x.plane(in, ic);
      T* op = out.plane(in, ic);
      const std::size_t plane_base = (static_cast<std::size_t>(in) * x.c + ic) *
                                     static_cast<std::size_t>(x.h) * x.w;
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          const int si = 2 * i, sj = 2 * j;
          std::size_t best = static_cast<std::size_t>(si) * x.w + sj;
          T bestv = xp[best];
          const std::size_t cand[3] = {best + 1, best + x.w, best + x.w + 1};
          for (std::size_t k = 0; k < 3; ++k) {
            if (xp[cand[k]] > bestv) {
              bestv = xp[cand[k]];
              best = cand[k];
            }
          }
          op[static_cast<std::size_t>(i) * ow + j] = bestv;
          if (cache) {
            cache->argmax[out.offset(in, ic, i, j)] =
                static_cast<std::uint32_t>(plane_base + best);
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> maxpool2x2_backward(const PoolCache& cache, const Tensor4<T>& grad_out) {
  const int oh = cache.h / 2, ow = cache.w / 2;
  if (grad_out.n != cache.n || grad_out.c != cache.c || grad_out.h != oh ||
      grad_out.w != ow) {
    throw ShapeError("maxpool2x2_backward: grad_out " + grad_out.shape_str() +
                     " does not match pooled shape " + dims4(cache.n, cache.c, oh, ow));
  }
  Tensor4<T> gx(cache.n, cache.c, cache.h, cache.w);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    gx.data[cache.argmax[i]] += grad_out.data[i];
  }
  return gx;
}

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw ShapeError("concat_channels: " + a.shape_str() + " vs " + b.shape_str() +
                     " disagree on batch or spatial dims");
  }
  Tensor4<T> out(a.n, a.c + b.c, a.h, a.w);
  const std::size_t plane = static_cast<std::size_t>(a.h) * a.w;
  for (int in = 0; in < a.n; ++in) {
    for (int ic = 0; ic < a.c; ++ic) {
      std::memcpy(out.plane(in, ic), a.plane(in, ic), plane * sizeof(T));
    }
    for (int ic = 0; ic < b.c; ++ic) {
      std::memcpy(out.plane(in, a.c + ic), b.plane(in, ic), plane * sizeof(T));
    }
  }
  return out;
}

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& x, int c_first) {
  if (c_first < 1 || c_first >= x.c) {
    throw ShapeError("split_channels: cannot split " + std::to_string(x.c) +
                     " channels at " + std::to_string(c_first));
  }
  Tensor4<T> a(x.n, c_first, x.h, x.w);
  Tensor4<T> b(x.n, x.c - c_first, x.h, x.w);
  const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
  for (int in = 0; in < x.n; ++in) {
    for (int ic = 0; ic < c_first; ++ic) {
      std::memcpy(a.plane(in, ic), x.plane(in, ic), plane * sizeof(T));
    }
    for (int ic = c_first; ic < x.c; ++ic) {
      std::memcpy(b.plane(in, ic - c_first), x.plane(in, ic), plane * sizeof(T));
    }
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
Tensor4<T> center_crop(const Tensor4<T>& x, int h2, int w2) {
  if (h2 < 1 || w2 < 1 || h2 > x.h || w2 > x.w) {
    throw ShapeError("center_crop: target (" + std::to_string(h2) + "," +
                     std::to_string(w2) + ") does not fit in " + x.shape_str());
  }
  const int oy = (x.h - h2) / 2, ox = (x.w - w2) / 2;
  Tensor4<T> out(x.n, x.c, h2, w2);
  for (int in = 0; in < x.n; ++in) {
    for (int ic = 0; ic < x.c; ++ic) {
      const T* xp = x.plane(in, ic);
      T* op = out.plane(in, ic);
      for (int i = 0; i < h2; ++i) {
        std::memcpy(op + static_cast<std::size_t>(i) * w2,
                    xp + static_cast<std::size_t>(i + oy) * x.w + ox,
                    static_cast<std::size_t>(w2) * sizeof(T));
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> center_crop_backward(const Tensor4<T>& grad_out, int h, int w) {
  if (grad_out.h > h || grad_out.w > w) {
    throw ShapeError("center_crop_backward: source (" + std::to_string(h) + "," +
                     std::to_string(w) + ") smaller than crop " + grad_out.shape_str());
  }
  const int oy = (h - grad_out.h) / 2, ox = (w - grad_out.w) / 2;
  Tensor4<T> gx(grad_out.n, grad_out.c, h, w);
  for (int in = 0; in < grad_out.n; ++in) {
    for (int ic = 0; ic < grad_out.c; ++ic) {
      const T* gp = grad_out.plane(in, ic);
      T* gxp = gx.plane(in, ic);
      for (int i = 0; i < grad_out.h; ++i) {
        std::memcpy(gxp + static_cast<std::size_t>(i + oy) * w + ox,
                    gp + static_cast<std::size_t>(i) * grad_out.w,
                    static_cast<std::size_t>(grad_out.w) * sizeof(T));
      }
    }
  }
  return gx;
}

template <typename T>
Tensor4<T> upsample2x_nearest(const Tensor4<T>& x) {
  Tensor4<T> out(x.n, x.c, 2 * x.h, 2 * x.w);
  for (int in = 0; in < x.n; ++in) {
    for (int ic = 0; ic < x.c; ++ic) {
      const T* xp = x.plane(in, ic);
      T* op = out.plane(in, ic);
      for (int i = 0; i < x.h; ++i) {
        T* r0 = op + static_cast<std::size_t>(2 * i) * 2 * x.w;
        T* r1 = r0 + 2 * x.w;
        const T* src = xp + static_cast<std::size_t>(i) * x.w;
        for (int j = 0; j < x.w; ++j) {
          r0[2 * j] = r0[2 * j + 1] = src[j];
          r1[2 * j] = r1[2 * j + 1] = src[j];
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor4<T> upsample2x_nearest_backward(const Tensor4<T>& grad_out) {
  if (grad_out.h % 2 != 0 || grad_out.w % 2 != 0) {
    throw ShapeError("upsample2x_nearest_backward requires even dims, got " +
                     grad_out.shape_str());
  }
  const int ih = grad_out.h / 2, iw = grad_out.w / 2;
  Tensor4<T> gx(grad_out.n, grad_out.c, ih, iw);
  for (int in = 0; in < grad_out.n; ++in) {
    for (int ic = 0; ic < grad_out.c; ++ic) {
      const T* gp = grad_out.plane(in, ic);
      T* gxp = gx.plane(in, ic);
      for (int i = 0; i < ih; ++i) {
        const T* r0 = gp + static_cast<std::size_t>(2 * i) * grad_out.w;
        const T* r1 = r0 + grad_out.w;
        T* dst = gxp + static_cast<std::size_t>(i) * iw;
        for (int j = 0; j < iw; ++j) {
          dst[j] = r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1];
        }
      }
    }
  }
  return gx;
}

template <typename T>
void add_inplace(Tensor4<T>& dst, const Tensor4<T>& src) {
  if (!dst.same_shape(src)) {
    throw ShapeError("add_inplace: " + dst.shape_str() + " vs " + src.shape_str());
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

template <typename T>
void write_tensor_dump(const std::string& path, const Tensor4<T>& t) {
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + t.size() * 4);
  put_u32_le(bytes, static_cast<std::uint32_t>(t.n));
  put_u32_le(bytes, static_cast<std::uint32_t>(t.c));
  put_u32_le(bytes, static_cast<std::uint32_t>(t.h));
  put_u32_le(bytes, static_cast<std::uint32_t>(t.w));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const float f = static_cast<float>(t.data[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32_le(bytes, u);
  }
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open " + path + " for writing");
  const std::size_t written = std::fwrite(bytes.data(), 1, bytes.size(), fp);
  std::fclose(fp);
  if (written != bytes.size()) throw IoError("short write to " + path);
}

#define ZNET_INSTANTIATE_TENSOR(T)                                                   \
  template struct Tensor4<T>;                                                        \
  template struct ConvParams<T>;                                                     \
  template struct BatchNormParams<T>;                                                \
  template Tensor4<T> conv2d_forward<T>(const Tensor4<T>&, ConvParamsView<T>);       \
  template Tensor4<T> conv2d_backward<T>(const Tensor4<T>&, ConvParamsView<T>,       \
                                         const Tensor4<T>&);                         \
  template Tensor4<T> batchnorm_forward<T>(const Tensor4<T>&, BatchNormView<T>,      \
                                           Mode, BatchNormCache<T>*);                \
  template Tensor4<T> batchnorm_backward<T>(const BatchNormCache<T>&,                \
                                            BatchNormView<T>, const Tensor4<T>&);    \
  template Tensor4<T> relu<T>(const Tensor4<T>&);                                    \
  template Tensor4<T> relu_backward<T>(const Tensor4<T>&, const Tensor4<T>&);        \
  template Tensor4<T> maxpool2x2_forward<T>(const Tensor4<T>&, PoolCache*);          \
  template Tensor4<T> maxpool2x2_backward<T>(const PoolCache&, const Tensor4<T>&);   \
  template Tensor4<T> concat_channels<T>(const Tensor4<T>&, const Tensor4<T>&);      \
  template std::pair<Tensor4<T>, Tensor4<T>> split_channels<T>(const Tensor4<T>&,    \
                                                               int);                 \
  template Tensor4<T> center_crop<T>(const Tensor4<T>&, int, int);                   \
  template Tensor4<T> center_crop_backward<T>(const Tensor4<T>&, int, int);          \
  template Tensor4<T> upsample2x_nearest<T>(const Tensor4<T>&);                      \
  template Tensor4<T> upsample2x_nearest_backward<T>(const Tensor4<T>&);             \
  template void add_inplace<T>(Tensor4<T>&, const Tensor4<T>&);                      \
  template void write_tensor_dump<T>(const std::string&, const Tensor4<T>&);

ZNET_INSTANTIATE_TENSOR(float)
ZNET_INSTANTIATE_TENSOR(double)

#undef ZNET_INSTANTIATE_TENSOR

}  // namespace znet
