#include "znet/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "znet/rng.hpp"

namespace znet {

namespace {

constexpr int kBins = 256;

// src = floor(dst * src_len / dst_len): the monotone nearest-neighbor index
// map used by every resample path.
inline int map_index(int dst, int src_len, int dst_len) {
  return static_cast<int>(static_cast<std::int64_t>(dst) * src_len / dst_len);
}

int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

Image2D clahe(const Image2D& slice, const ClaheConfig& cfg) {
  if (cfg.clip_limit <= 0.0) {
    throw ConfigError("clahe clip_limit must be > 0");
  }
  if (cfg.tiles_y < 1 || cfg.tiles_x < 1) {
    throw ConfigError("clahe tile counts must be >= 1");
  }
  const int h = slice.h, w = slice.w;
  float lo = slice.data[0], hi = slice.data[0];
  for (float v : slice.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  auto bin_of = [&](float v) {
    if (range <= 0.0) return 0;
    const int b = static_cast<int>((static_cast<double>(v) - lo) / range * kBins);
    return clamp_int(b, 0, kBins - 1);
  };

  const int ty = std::min(cfg.tiles_y, h);
  const int tx = std::min(cfg.tiles_x, w);
  // Per-tile CDF mapping with clipped, uniformly redistributed histograms.
  std::vector<std::array<double, kBins>> maps(static_cast<std::size_t>(ty) * tx);
  std::vector<double> center_y(ty), center_x(tx);
  for (int tr = 0; tr < ty; ++tr) {
    const int r0 = tr * h / ty, r1 = (tr + 1) * h / ty;
    center_y[tr] = 0.5 * (r0 + r1 - 1);
    for (int tc = 0; tc < tx; ++tc) {
      const int c0 = tc * w / tx, c1 = (tc + 1) * w / tx;
      if (tr == 0) center_x[tc] = 0.5 * (c0 + c1 - 1);
      std::array<double, kBins> hist{};
      const double count = static_cast<double>(r1 - r0) * (c1 - c0);
      for (int y = r0; y < r1; ++y) {
        for (int x = c0; x < c1; ++x) hist[bin_of(slice.at(y, x))] += 1.0;
      }
      const double clip = cfg.clip_limit * count / kBins;
      double excess = 0.0;
      for (auto& c : hist) {
        if (c > clip) {
          excess += c - clip;
          c = clip;
        }
      }
      const double add = excess / kBins;
      double cdf = 0.0;
      auto& map = maps[static_cast<std::size_t>(tr) * tx + tc];
      for (int b = 0; b < kBins; ++b) {
        cdf += hist[b] + add;
        map[b] = cdf / count;
      }
    }
  }

  Image2D out(h, w);
  for (int y = 0; y < h; ++y) {
    // Surrounding tile rows and vertical blend weight; edge pixels clamp to
    // the nearest tile center.
    int tr0 = 0;
    while (tr0 + 1 < ty && center_y[tr0 + 1] <= y) ++tr0;
    int tr1 = tr0;
    double wy = 0.0;
    if (y > center_y[tr0] && tr0 + 1 < ty) {
      tr1 = tr0 + 1;
      wy = (y - center_y[tr0]) / (center_y[tr1] - center_y[tr0]);
    }
    for (int x = 0; x < w; ++x) {
      int tc0 = 0;
      while (tc0 + 1 < tx && center_x[tc0 + 1] <= x) ++tc0;
      int tc1 = tc0;
      double wx = 0.0;
      if (x > center_x[tc0] && tc0 + 1 < tx) {
        tc1 = tc0 + 1;
        wx = (x - center_x[tc0]) / (center_x[tc1] - center_x[tc0]);
      }
      const int b = bin_of(slice.at(y, x));
      const double m00 = maps[static_cast<std::size_t>(tr0) * tx + tc0][b];
      const double m01 = maps[static_cast<std::size_t>(tr0) * tx + tc1][b];
      const double m10 = maps[static_cast<std::size_t>(tr1) * tx + tc0][b];
      const double m11 = maps[static_cast<std::size_t>(tr1) * tx + tc1][b];
      const double top = m00 * (1.0 - wx) + m01 * wx;
      const double bot = m10 * (1.0 - wx) + m11 * wx;
      out.at(y, x) = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return out;
}

Image2D gaussian_normalize(const Image2D& slice) {
  double sum = 0.0;
  for (float v : slice.data) sum += v;
  const double mean = sum / static_cast<double>(slice.size());
  double var = 0.0;
  for (float v : slice.data) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(slice.size());
  const double std_dev = std::sqrt(var);
  Image2D out(slice.h, slice.w);
  if (std_dev < 1e-8) {
    return out;  // zeros
  }
  for (std::size_t i = 0; i < slice.size(); ++i) {
    out.data[i] = static_cast<float>((slice.data[i] - mean) / std_dev);
  }
  return out;
}

const char* uniform_method_name(UniformMethod m) {
  switch (m) {
    case UniformMethod::pad_cut: return "pad_cut";
    case UniformMethod::resize2d: return "resize2d";
    case UniformMethod::resize3d: return "resize3d";
  }
  return "?";
}

UniformMethod uniform_method_from_name(const std::string& s) {
  if (s == "pad_cut") return UniformMethod::pad_cut;
  if (s == "resize2d") return UniformMethod::resize2d;
  if (s == "resize3d") return UniformMethod::resize3d;
  throw ConfigError("unknown uniform method '" + s +
                    "' (expected pad_cut, resize2d or resize3d)");
}

std::pair<Volume, GeometryRecord> unify_pad_cut(const Volume& v, int target_h,
                                                int target_w) {
  GeometryRecord rec;
  rec.method = UniformMethod::pad_cut;
  rec.orig_d = v.d;
  rec.orig_h = v.h;
  rec.orig_w = v.w;
  rec.orig_spacing = v.spacing;
  rec.target_h = target_h;
  rec.target_w = target_w;
  rec.off_y = v.h >= target_h ? (v.h - target_h) / 2 : -((target_h - v.h) / 2);
  rec.off_x = v.w >= target_w ? (v.w - target_w) / 2 : -((target_w - v.w) / 2);

  Volume out(v.d, target_h, target_w, v.spacing, v.kind);
  for (int z = 0; z < v.d; ++z) {
    for (int y = 0; y < target_h; ++y) {
      const int sy = y + rec.off_y;
      if (sy < 0 || sy >= v.h) continue;
      for (int x = 0; x < target_w; ++x) {
        const int sx = x + rec.off_x;
        if (sx < 0 || sx >= v.w) continue;
        out.at(z, y, x) = v.at(z, sy, sx);
      }
    }
  }
  return {std::move(out), rec};
}

Volume reconstruct_pad_cut(const Volume& m, const GeometryRecord& rec) {
  if (m.d != rec.orig_d || m.h != rec.target_h || m.w != rec.target_w) {
    throw ShapeError("reconstruct_pad_cut: volume does not match record");
  }
  Volume out(rec.orig_d, rec.orig_h, rec.orig_w, rec.orig_spacing, m.kind);
  for (int z = 0; z < out.d; ++z) {
    for (int y = 0; y < out.h; ++y) {
      const int ty = y - rec.off_y;
      if (ty < 0 || ty >= rec.target_h) continue;
      for (int x = 0; x < out.w; ++x) {
        const int tx = x - rec.off_x;
        if (tx < 0 || tx >= rec.target_w) continue;
        out.at(z, y, x) = m.at(z, ty, tx);
      }
    }
  }
  return out;
}

namespace {

// Per-slice nearest-neighbor resample of the in-plane axes.
Volume resize_slices_nn(const Volume& v, int target_h, int target_w) {
  Volume out(v.d, target_h, target_w, v.spacing, v.kind);
  out.spacing[1] = v.spacing[1] * v.h / target_h;
  out.spacing[2] = v.spacing[2] * v.w / target_w;
  std::vector<int> src_y(target_h), src_x(target_w);
  for (int y = 0; y < target_h; ++y) src_y[y] = map_index(y, v.h, target_h);
  for (int x = 0; x < target_w; ++x) src_x[x] = map_index(x, v.w, target_w);
  for (int z = 0; z < v.d; ++z) {
    for (int y = 0; y < target_h; ++y) {
      const float* row = &v.data[v.offset(z, src_y[y], 0)];
      float* orow = &out.data[out.offset(z, y, 0)];
      for (int x = 0; x < target_w; ++x) orow[x] = row[src_x[x]];
    }
  }
  return out;
}

Volume resample3d_nn(const Volume& v, int nd, int nh, int nw,
                     std::array<double, 3> new_spacing) {
  Volume out(nd, nh, nw, new_spacing, v.kind);
  for (int z = 0; z < nd; ++z) {
    const int sz = map_index(z, v.d, nd);
    for (int y = 0; y < nh; ++y) {
      const int sy = map_index(y, v.h, nh);
      const float* row = &v.data[v.offset(sz, sy, 0)];
      float* orow = &out.data[out.offset(z, y, 0)];
      for (int x = 0; x < nw; ++x) orow[x] = row[map_index(x, v.w, nw)];
    }
  }
  return out;
}

Volume resample3d_trilinear(const Volume& v, int nd, int nh, int nw,
                            std::array<double, 3> new_spacing) {
  Volume out(nd, nh, nw, new_spacing, v.kind);
  auto coord = [](int i, int old_len, int new_len) {
    double c = (i + 0.5) * static_cast<double>(old_len) / new_len - 0.5;
    if (c < 0.0) c = 0.0;
    const double max = old_len - 1;
    return c > max ? max : c;
  };
  for (int z = 0; z < nd; ++z) {
    const double cz = coord(z, v.d, nd);
    const int z0 = static_cast<int>(cz);
    const int z1 = std::min(z0 + 1, v.d - 1);
    const double fz = cz - z0;
    for (int y = 0; y < nh; ++y) {
      const double cy = coord(y, v.h, nh);
      const int y0 = static_cast<int>(cy);
      const int y1 = std::min(y0 + 1, v.h - 1);
      const double fy = cy - y0;
      for (int x = 0; x < nw; ++x) {
        const double cx = coord(x, v.w, nw);
        const int x0 = static_cast<int>(cx);
        const int x1 = std::min(x0 + 1, v.w - 1);
        const double fx = cx - x0;
        const double c00 = v.at(z0, y0, x0) * (1 - fx) + v.at(z0, y0, x1) * fx;
        const double c01 = v.at(z0, y1, x0) * (1 - fx) + v.at(z0, y1, x1) * fx;
        const double c10 = v.at(z1, y0, x0) * (1 - fx) + v.at(z1, y0, x1) * fx;
        const double c11 = v.at(z1, y1, x0) * (1 - fx) + v.at(z1, y1, x1) * fx;
        const double c0 = c00 * (1 - fy) + c01 * fy;
        const double c1 = c10 * (1 - fy) + c11 * fy;
        out.at(z, y, x) = static_cast<float>(c0 * (1 - fz) + c1 * fz);
      }
    }
  }
  return out;
}

constexpr double kIsoSpacing = 0.5;

}  // namespace

std::pair<Volume, GeometryRecord> unify_resize2d(const Volume& v, int target_h,
                                                 int target_w) {
  GeometryRecord rec;
  rec.method = UniformMethod::resize2d;
  rec.orig_d = v.d;
  rec.orig_h = v.h;
  rec.orig_w = v.w;
  rec.orig_spacing = v.spacing;
  rec.target_h = target_h;
  rec.target_w = target_w;
  return {resize_slices_nn(v, target_h, target_w), rec};
}

Volume reconstruct_resize2d(const Volume& m, const GeometryRecord& rec) {
  if (m.d != rec.orig_d || m.h != rec.target_h || m.w != rec.target_w) {
    throw ShapeError("reconstruct_resize2d: volume does not match record");
  }
  Volume out = resize_slices_nn(m, rec.orig_h, rec.orig_w);
  out.spacing = rec.orig_spacing;
  return out;
}

std::pair<Volume, GeometryRecord> unify_resize3d(const Volume& v, int target_h,
                                                 int target_w) {
  GeometryRecord rec;
  rec.method = UniformMethod::resize3d;
  rec.orig_d = v.d;
  rec.orig_h = v.h;
  rec.orig_w = v.w;
  rec.orig_spacing = v.spacing;
  rec.target_h = target_h;
  rec.target_w = target_w;
  const int nd = static_cast<int>(std::llround(v.d * v.spacing[0] / kIsoSpacing));
  const int nh = static_cast<int>(std::llround(v.h * v.spacing[1] / kIsoSpacing));
  const int nw = static_cast<int>(std::llround(v.w * v.spacing[2] / kIsoSpacing));
  if (nd < 1 || nh < 1 || nw < 1) {
    throw GeometryError("resize3d produces degenerate isotropic dims");
  }
  rec.iso_d = nd;
  rec.iso_h = nh;
  rec.iso_w = nw;
  const std::array<double, 3> iso = {kIsoSpacing, kIsoSpacing, kIsoSpacing};
  Volume stage1 = v.kind == VolumeKind::mask
                      ? resample3d_nn(v, nd, nh, nw, iso)
                      : resample3d_trilinear(v, nd, nh, nw, iso);
  return {resize_slices_nn(stage1, target_h, target_w), rec};
}

Volume reconstruct_resize3d(const Volume& m, const GeometryRecord& rec) {
  if (m.d != rec.iso_d || m.h != rec.target_h || m.w != rec.target_w) {
    throw ShapeError("reconstruct_resize3d: volume does not match record");
  }
  Volume iso = resize_slices_nn(m, rec.iso_h, rec.iso_w);
  Volume out = resample3d_nn(iso, rec.orig_d, rec.orig_h, rec.orig_w,
                             rec.orig_spacing);
  out.spacing = rec.orig_spacing;
  return out;
}

std::pair<Volume, GeometryRecord> unify(const Volume& v, UniformMethod method,
                                        int target_h, int target_w) {
  switch (method) {
    case UniformMethod::pad_cut: return unify_pad_cut(v, target_h, target_w);
    case UniformMethod::resize2d: return unify_resize2d(v, target_h, target_w);
    case UniformMethod::resize3d: return unify_resize3d(v, target_h, target_w);
  }
  throw ConfigError("unknown uniform method");
}

Volume reconstruct(const Volume& m, const GeometryRecord& rec) {
  switch (rec.method) {
    case UniformMethod::pad_cut: return reconstruct_pad_cut(m, rec);
    case UniformMethod::resize2d: return reconstruct_resize2d(m, rec);
    case UniformMethod::resize3d: return reconstruct_resize3d(m, rec);
  }
  throw ConfigError("unknown uniform method in record");
}

SampledTransform sample_transform(const AugmentSpec& spec) {
  if (spec.rotation_deg < 0.0 || spec.rotation_deg > 180.0) {
    throw ConfigError("rotation_deg must be in [0, 180]");
  }
  if (!(spec.zoom_min > 0.0) || spec.zoom_max < spec.zoom_min) {
    throw ConfigError("zoom range must be positive with zoom_min <= zoom_max");
  }
  Rng rng(derive_seed(spec.seed, 0x617567ull));
  SampledTransform t;
  t.angle_deg = rng.uniform(-spec.rotation_deg, spec.rotation_deg);
  t.flip = spec.flip && rng.bernoulli(0.5);
  t.zoom = rng.uniform(spec.zoom_min, spec.zoom_max);
  return t;
}

Image2D apply_transform(const Image2D& img, const SampledTransform& t, bool nearest) {
  const int h = img.h, w = img.w;
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double rad = t.angle_deg * 3.14159265358979323846 / 180.0;
  const double ca = std::cos(rad), sa = std::sin(rad);
  Image2D out(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      // invert: un-rotate, un-zoom, un-flip about the center
      const double qy0 = i - cy, qx0 = j - cx;
      const double qy1 = -sa * qx0 + ca * qy0;
      double qx1 = ca * qx0 + sa * qy0;
      const double qy = qy1 / t.zoom;
      double qx = qx1 / t.zoom;
      if (t.flip) qx = -qx;
      const double sy = qy + cy, sx = qx + cx;
      if (nearest) {
        const int ny = static_cast<int>(std::lround(sy));
        const int nx = static_cast<int>(std::lround(sx));
        if (ny >= 0 && ny < h && nx >= 0 && nx < w) out.at(i, j) = img.at(ny, nx);
      } else {
        const int y0 = static_cast<int>(std::floor(sy));
        const int x0 = static_cast<int>(std::floor(sx));
        const double fy = sy - y0, fx = sx - x0;
        double acc = 0.0;
        const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx),
                               fy * fx};
        const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
        const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
        for (int k = 0; k < 4; ++k) {
          if (ys[k] >= 0 && ys[k] < h && xs[k] >= 0 && xs[k] < w) {
            acc += wts[k] * img.at(ys[k], xs[k]);
          }
        }
        out.at(i, j) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::pair<Image2D, Image2D> augment(const Image2D& slice, const Image2D& mask,
                                    const AugmentSpec& spec) {
  if (slice.h != mask.h || slice.w != mask.w) {
    throw ShapeError("augment: slice and mask dims differ");
  }
  const SampledTransform t = sample_transform(spec);
  return {apply_transform(slice, t, /*nearest=*/false),
          apply_transform(mask, t, /*nearest=*/true)};
}

Image2D flip_horizontal(const Image2D& img) {
  Image2D out(img.h, img.w);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) out.at(y, x) = img.at(y, img.w - 1 - x);
  }
  return out;
}

}  // namespace znet
