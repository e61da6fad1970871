#include "znet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "znet/rng.hpp"

namespace znet {

namespace {

// White noise on a coarse lattice, trilinearly upsampled: cheap, smooth and
// seed-deterministic.
struct SmoothNoise {
  int gd, gh, gw, cell;
  std::vector<float> grid;

  SmoothNoise(int d, int h, int w, int cell_, std::uint64_t seed) : cell(cell_) {
    gd = d / cell + 2;
    gh = h / cell + 2;
    gw = w / cell + 2;
    grid.resize(static_cast<std::size_t>(gd) * gh * gw);
    Rng rng(derive_seed(seed, 0x6e6f697365ull));
    for (auto& v : grid) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  float operator()(int z, int y, int x) const {
    const double fz = static_cast<double>(z) / cell;
    const double fy = static_cast<double>(y) / cell;
    const double fx = static_cast<double>(x) / cell;
    const int z0 = static_cast<int>(fz), y0 = static_cast<int>(fy),
              x0 = static_cast<int>(fx);
    const double tz = fz - z0, ty = fy - y0, tx = fx - x0;
    auto g = [&](int zz, int yy, int xx) {
      return grid[(static_cast<std::size_t>(zz) * gh + yy) * gw + xx];
    };
    const double c00 = g(z0, y0, x0) * (1 - tx) + g(z0, y0, x0 + 1) * tx;
    const double c01 = g(z0, y0 + 1, x0) * (1 - tx) + g(z0, y0 + 1, x0 + 1) * tx;
    const double c10 = g(z0 + 1, y0, x0) * (1 - tx) + g(z0 + 1, y0, x0 + 1) * tx;
    const double c11 =
        g(z0 + 1, y0 + 1, x0) * (1 - tx) + g(z0 + 1, y0 + 1, x0 + 1) * tx;
    const double c0 = c00 * (1 - ty) + c01 * ty;
    const double c1 = c10 * (1 - ty) + c11 * ty;
    return static_cast<float>(c0 * (1 - tz) + c1 * tz);
  }
};

}  // namespace

PhantomVolumes make_phantom(int d, int h, int w, std::array<double, 3> spacing,
                            PhantomShape shape, const PhantomParams& params,
                            std::uint64_t seed) {
  std::array<double, 3> center = params.center_vox;
  if (center[0] < 0) center[0] = d / 2;
  if (center[1] < 0) center[1] = h / 2;
  if (center[2] < 0) center[2] = w / 2;

  std::array<double, 3> semi = params.semi_axes_vox;
  if (shape == PhantomShape::sphere) {
    semi = {params.radius_vox, params.radius_vox, params.radius_vox};
  }
  for (double a : semi) {
    if (a < 0.0) throw GeometryError("phantom semi-axes must be >= 0");
  }
  const int dims[3] = {d, h, w};
  for (int k = 0; k < 3; ++k) {
    if (center[k] - semi[k] < -0.5 || center[k] + semi[k] > dims[k] - 0.5) {
      throw GeometryError("phantom shape exceeds volume dims along axis " +
                          std::to_string(k));
    }
  }

  Volume mask(d, h, w, spacing, VolumeKind::mask);
  Volume intensity(d, h, w, spacing, VolumeKind::intensity);
  const SmoothNoise noise(d, h, w, std::max(1, params.noise_cell), seed);

  // Degenerate axes (radius 0) select exactly the center lattice point.
  const double az = std::max(semi[0], 1e-12);
  const double ay = std::max(semi[1], 1e-12);
  const double ax = std::max(semi[2], 1e-12);
  for (int z = 0; z < d; ++z) {
    const double dz = (z - center[0]) / az;
    for (int y = 0; y < h; ++y) {
      const double dy = (y - center[1]) / ay;
      for (int x = 0; x < w; ++x) {
        const double dx = (x - center[2]) / ax;
        const bool inside = dz * dz + dy * dy + dx * dx <= 1.0;
        if (inside) mask.at(z, y, x) = 1.0f;
        intensity.at(z, y, x) = params.background_level +
                                (inside ? params.object_delta : 0.0f) +
                                params.noise_amplitude * noise(z, y, x);
      }
    }
  }
  return {std::move(intensity), std::move(mask)};
}

}  // namespace znet
