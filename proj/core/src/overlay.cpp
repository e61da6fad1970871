#include "znet/overlay.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace znet {

namespace {

// 4-connectivity 2D boundary of a binary slice.
bool is_boundary(const Image2D& mask, int y, int x) {
  if (mask.at(y, x) != 1.0f) return false;
  return y == 0 || y == mask.h - 1 || x == 0 || x == mask.w - 1 ||
         mask.at(y - 1, x) == 0.0f || mask.at(y + 1, x) == 0.0f ||
         mask.at(y, x - 1) == 0.0f || mask.at(y, x + 1) == 0.0f;
}

}  // namespace

ImageRGB render_overlay(const Image2D& intensity, const Image2D* pred_mask,
                        const Image2D* ref_mask) {
  float lo = intensity.data[0], hi = intensity.data[0];
  for (float v : intensity.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const float range = hi > lo ? hi - lo : 1.0f;
  ImageRGB img(intensity.h, intensity.w);
  for (int y = 0; y < intensity.h; ++y) {
    for (int x = 0; x < intensity.w; ++x) {
      const auto g = static_cast<unsigned char>(
          255.0f * (intensity.at(y, x) - lo) / range);
      unsigned char r = g, gr = g, b = g;
      if (ref_mask && is_boundary(*ref_mask, y, x)) {
        r = 255;
        gr = 0;
        b = 0;
      }
      if (pred_mask && is_boundary(*pred_mask, y, x)) {
        r = 0;
        gr = 255;
        b = 0;
      }
      const std::size_t o = (static_cast<std::size_t>(y) * img.w + x) * 3;
      img.data[o] = r;
      img.data[o + 1] = gr;
      img.data[o + 2] = b;
    }
  }
  return img;
}

void write_ppm(const std::string& path, const ImageRGB& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P6\n" << img.w << " " << img.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace znet
