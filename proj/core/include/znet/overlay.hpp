#pragma once

#include <string>
#include <vector>

#include "znet/volume.hpp"

namespace znet {

struct ImageRGB {
  int h = 0, w = 0;
  std::vector<unsigned char> data;  // 3 bytes per pixel, row-major

  ImageRGB() = default;
  ImageRGB(int h_, int w_) : h(h_), w(w_) {
    data.assign(static_cast<std::size_t>(h) * w * 3, 0);
  }
};

// Grayscale background with mask boundaries drawn on top: prediction in
// green, reference (when given) in red.
ImageRGB render_overlay(const Image2D& intensity, const Image2D* pred_mask,
                        const Image2D* ref_mask);

// Binary P6 portable pixmap.
void write_ppm(const std::string& path, const ImageRGB& img);

}  // namespace znet
