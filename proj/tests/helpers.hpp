#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "znet/rng.hpp"
#include "znet/tensor.hpp"
#include "znet/volume.hpp"

namespace test {

template <typename T>
znet::Tensor4<T> random_tensor(int n, int c, int h, int w, std::uint64_t seed,
                               double lo = -1.0, double hi = 1.0) {
  znet::Rng rng(seed);
  znet::Tensor4<T> t(n, c, h, w);
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
znet::Tensor4<T> random_binary_tensor(int n, int c, int h, int w, std::uint64_t seed,
                                      double p = 0.4) {
  znet::Rng rng(seed);
  znet::Tensor4<T> t(n, c, h, w);
  for (auto& v : t.data) v = rng.bernoulli(p) ? T(1) : T(0);
  return t;
}

template <typename T>
double dot(const znet::Tensor4<T>& a, const znet::Tensor4<T>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a.data[i]) * static_cast<double>(b.data[i]);
  }
  return s;
}

inline znet::Volume random_mask_volume(int d, int h, int w, std::uint64_t seed,
                                       double p = 0.3,
                                       std::array<double, 3> spacing = {1, 1, 1}) {
  znet::Rng rng(seed);
  znet::Volume v(d, h, w, spacing, znet::VolumeKind::mask);
  for (auto& x : v.data) x = rng.bernoulli(p) ? 1.0f : 0.0f;
  return v;
}

// Blob-style random mask: a few random balls, more like real segmentations
// than iid noise.
inline znet::Volume random_blob_volume(int d, int h, int w, std::uint64_t seed,
                                       std::array<double, 3> spacing = {1, 1, 1}) {
  znet::Rng rng(seed);
  znet::Volume v(d, h, w, spacing, znet::VolumeKind::mask);
  const int balls = 1 + static_cast<int>(rng.uniform_index(3));
  for (int b = 0; b < balls; ++b) {
    const double cz = rng.uniform(0, d - 1), cy = rng.uniform(0, h - 1),
                 cx = rng.uniform(0, w - 1);
    const double r = rng.uniform(1.0, 0.4 * std::min({d, h, w}));
    for (int z = 0; z < d; ++z) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double dz = z - cz, dy = y - cy, dx = x - cx;
          if (dz * dz + dy * dy + dx * dx <= r * r) v.at(z, y, x) = 1.0f;
        }
      }
    }
  }
  return v;
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("znet_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace test
