#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "znet/volume.hpp"

namespace znet {

struct ClaheConfig {
  double clip_limit = 2.0;  // multiple of the uniform per-bin count
  int tiles_y = 8;
  int tiles_x = 8;
};

// Contrast-limited adaptive histogram equalization with 256 bins, uniform
// redistribution of the clipped excess and bilinear blending between the
// four surrounding tile mappings. Output values lie in [0, 1].
Image2D clahe(const Image2D& slice, const ClaheConfig& cfg = {});

// (x - mean) / std over the slice; an almost-constant slice (std < 1e-8)
// maps to all zeros.
Image2D gaussian_normalize(const Image2D& slice);

// --- uniform-size methods --------------------------------------------------------

enum class UniformMethod { pad_cut, resize2d, resize3d };

const char* uniform_method_name(UniformMethod m);
UniformMethod uniform_method_from_name(const std::string& s);

// Everything needed to invert a uniform-size transform.
struct GeometryRecord {
  UniformMethod method = UniformMethod::pad_cut;
  int orig_d = 0, orig_h = 0, orig_w = 0;
  std::array<double, 3> orig_spacing = {1.0, 1.0, 1.0};
  // pad_cut: per in-plane axis; >= 0 means that many leading voxels were
  // cropped, < 0 means -off leading voxels were padded.
  int off_y = 0, off_x = 0;
  // resize3d: intermediate isotropic grid dims.
  int iso_d = 0, iso_h = 0, iso_w = 0;
  int target_h = 0, target_w = 0;
};

// Per axial slice: center-crop axes larger than the target, zero-pad axes
// smaller. Depth is untouched. Lossless for masks confined to the retained
// region.
std::pair<Volume, GeometryRecord> unify_pad_cut(const Volume& v, int target_h = 256,
                                                int target_w = 256);
Volume reconstruct_pad_cut(const Volume& m, const GeometryRecord& rec);

// Per axial slice nearest-neighbor resample with the monotone index map
// src = floor(dst * src_len / dst_len); reconstruction resamples back.
std::pair<Volume, GeometryRecord> unify_resize2d(const Volume& v, int target_h = 256,
                                                 int target_w = 256);
Volume reconstruct_resize2d(const Volume& m, const GeometryRecord& rec);

// Resample to an isotropic 0.5 mm grid (nearest neighbor for masks,
// trilinear for intensities), then 2D-resize each slice to the target.
// Reconstruction inverts both stages with nearest neighbor.
std::pair<Volume, GeometryRecord> unify_resize3d(const Volume& v, int target_h = 256,
                                                 int target_w = 256);
Volume reconstruct_resize3d(const Volume& m, const GeometryRecord& rec);

std::pair<Volume, GeometryRecord> unify(const Volume& v, UniformMethod method,
                                        int target_h = 256, int target_w = 256);
Volume reconstruct(const Volume& m, const GeometryRecord& rec);

// --- augmentation ---------------------------------------------------------------

struct AugmentSpec {
  double rotation_deg = 15.0;  // angle sampled uniformly in [-deg, +deg]
  bool flip = true;            // horizontal flip with probability 1/2
  double zoom_min = 0.9;
  double zoom_max = 1.1;
  std::uint64_t seed = 0;
};

struct SampledTransform {
  double angle_deg = 0.0;
  bool flip = false;
  double zoom = 1.0;
};

SampledTransform sample_transform(const AugmentSpec& spec);

// Rotation and zoom about the image center, optional horizontal flip.
// Intensities are sampled bilinearly, masks with nearest neighbor; samples
// falling outside the source are zero.
Image2D apply_transform(const Image2D& img, const SampledTransform& t, bool nearest);

// Applies one sampled transform to both the slice and its mask.
std::pair<Image2D, Image2D> augment(const Image2D& slice, const Image2D& mask,
                                    const AugmentSpec& spec);

Image2D flip_horizontal(const Image2D& img);

}  // namespace znet
