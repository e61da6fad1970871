#include "znet/volume.hpp"

#include <cstring>
#include <string>

namespace znet {

Volume::Volume(int d_, int h_, int w_, std::array<double, 3> spacing_,
               VolumeKind kind_, float fill)
    : d(d_), h(h_), w(w_), spacing(spacing_), kind(kind_) {
  if (d < 1 || h < 1 || w < 1) {
    throw ShapeError("Volume dims must be >= 1, got (" + std::to_string(d) + "," +
                     std::to_string(h) + "," + std::to_string(w) + ")");
  }
  for (double s : spacing) {
    if (!(s > 0.0)) throw GeometryError("Volume spacing must be > 0");
  }
  data.assign(static_cast<std::size_t>(d) * h * w, fill);
}

bool Volume::is_binary() const {
  for (float v : data) {
    if (v != 0.0f && v != 1.0f) return false;
  }
  return true;
}

std::size_t Volume::foreground_count() const {
  std::size_t n = 0;
  for (float v : data) {
    if (v == 1.0f) ++n;
  }
  return n;
}

Image2D::Image2D(int h_, int w_, float fill) : h(h_), w(w_) {
  if (h < 1 || w < 1) {
    throw ShapeError("Image2D dims must be >= 1");
  }
  data.assign(static_cast<std::size_t>(h) * w, fill);
}

Image2D slice_of(const Volume& v, int z) {
  if (z < 0 || z >= v.d) {
    throw ShapeError("slice index " + std::to_string(z) + " out of range [0," +
                     std::to_string(v.d) + ")");
  }
  Image2D img(v.h, v.w);
  std::memcpy(img.data.data(), v.data.data() + v.offset(z, 0, 0),
              img.size() * sizeof(float));
  return img;
}

void set_slice(Volume& v, int z, const Image2D& img) {
  if (z < 0 || z >= v.d || img.h != v.h || img.w != v.w) {
    throw ShapeError("set_slice: slice does not fit volume");
  }
  std::memcpy(v.data.data() + v.offset(z, 0, 0), img.data.data(),
              img.size() * sizeof(float));
}

}  // namespace znet
