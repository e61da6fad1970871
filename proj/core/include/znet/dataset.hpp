#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "znet/preprocess.hpp"
#include "znet/tensor.hpp"
#include "znet/volume.hpp"

namespace znet {

// One training sample: a preprocessed axial slice and its binary mask, both
// (1, 1, h, w).
template <typename T>
struct SlicePair {
  Tensor4<T> image;
  Tensor4<T> mask;
};

struct VolumePair {
  std::string id;
  Volume image;
  Volume mask;
};

struct DatasetConfig {
  UniformMethod method = UniformMethod::resize2d;
  int target_h = 256;
  int target_w = 256;
  bool apply_clahe = true;
  ClaheConfig clahe;
  // Extra augmented copies per raw slice; magnitudes come from `augment`,
  // per-copy seeds are derived from (seed, volume, slice, copy).
  int augment_per_slice = 0;
  AugmentSpec augment;
  bool keep_empty_slices = true;
  std::uint64_t seed = 0;
};

// Unify -> CLAHE -> Gaussian-normalize each slice, pair it with its unified
// mask slice, and append the configured augmented copies. Deterministic.
template <typename T>
std::vector<SlicePair<T>> build_slice_dataset(const std::vector<VolumePair>& vols,
                                              const DatasetConfig& cfg);

// The prediction-time half of the same pipeline: unify + CLAHE + normalize
// an intensity volume, returning the geometry needed for reconstruction.
struct PreprocessedVolume {
  Volume processed;
  GeometryRecord rec;
};
PreprocessedVolume preprocess_intensity(const Volume& v, const DatasetConfig& cfg);

template <typename T>
Tensor4<T> tensor_from_image(const Image2D& img);

template <typename T>
Image2D image_from_tensor(const Tensor4<T>& t, int item = 0, int channel = 0);

}  // namespace znet
