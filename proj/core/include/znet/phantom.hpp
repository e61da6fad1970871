#pragma once

#include <array>
#include <cstdint>

#include "znet/volume.hpp"

namespace znet {

enum class PhantomShape { sphere, ellipsoid };

struct PhantomParams {
  // Negative entries default to the volume's integer center voxel.
  std::array<double, 3> center_vox = {-1.0, -1.0, -1.0};
  double radius_vox = 0.0;                          // sphere, in index units
  std::array<double, 3> semi_axes_vox = {0, 0, 0};  // ellipsoid (az, ay, ax)
  float background_level = 100.0f;
  float object_delta = 100.0f;  // added on top of the background inside the mask
  float noise_amplitude = 20.0f;
  int noise_cell = 8;  // coarse noise grid period in voxels
};

struct PhantomVolumes {
  Volume intensity;
  Volume mask;
};

// Analytic solid mask plus an intensity volume (background + object delta +
// seeded smooth noise). Fully determined by the seed.
PhantomVolumes make_phantom(int d, int h, int w, std::array<double, 3> spacing,
                            PhantomShape shape, const PhantomParams& params,
                            std::uint64_t seed);

}  // namespace znet
