#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "znet/errors.hpp"

namespace znet {

enum class VolumeKind { intensity, mask };

// Rank-3 scalar grid with per-axis physical spacing in mm. Data is row-major
// (depth, height, width); spacing is stored in the same (sz, sy, sx) order.
// Mask volumes contain only {0, 1}.
struct Volume {
  int d = 0, h = 0, w = 0;
  std::array<double, 3> spacing = {1.0, 1.0, 1.0};
  VolumeKind kind = VolumeKind::intensity;
  std::vector<float> data;

  Volume() = default;
  Volume(int d_, int h_, int w_, std::array<double, 3> spacing_,
         VolumeKind kind_ = VolumeKind::intensity, float fill = 0.0f);

  std::size_t size() const { return data.size(); }
  std::size_t offset(int z, int y, int x) const {
    return (static_cast<std::size_t>(z) * h + y) * static_cast<std::size_t>(w) + x;
  }
  float& at(int z, int y, int x) { return data[offset(z, y, x)]; }
  float at(int z, int y, int x) const { return data[offset(z, y, x)]; }

  bool same_grid(const Volume& o) const { return d == o.d && h == o.h && w == o.w; }
  bool is_binary() const;
  std::size_t foreground_count() const;  // voxels equal to 1
};

// A single 2D plane, the unit the network and the per-slice preprocessing
// operate on.
struct Image2D {
  int h = 0, w = 0;
  std::vector<float> data;

  Image2D() = default;
  Image2D(int h_, int w_, float fill = 0.0f);

  std::size_t size() const { return data.size(); }
  float& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
  float at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }
};

Image2D slice_of(const Volume& v, int z);
void set_slice(Volume& v, int z, const Image2D& img);

}  // namespace znet
