#include "znet/dataset.hpp"

#include "znet/rng.hpp"

namespace znet {

template <typename T>
Tensor4<T> tensor_from_image(const Image2D& img) {
  Tensor4<T> t(1, 1, img.h, img.w);
  for (std::size_t i = 0; i < img.size(); ++i) t.data[i] = static_cast<T>(img.data[i]);
  return t;
}

template <typename T>
Image2D image_from_tensor(const Tensor4<T>& t, int item, int channel) {
  Image2D img(t.h, t.w);
  const T* p = t.plane(item, channel);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<float>(p[i]);
  return img;
}

namespace {

bool slice_has_foreground(const Image2D& mask) {
  for (float v : mask.data) {
    if (v == 1.0f) return true;
  }
  return false;
}

Image2D prepare_intensity_slice(const Image2D& raw, const DatasetConfig& cfg) {
  if (cfg.apply_clahe) {
    return gaussian_normalize(clahe(raw, cfg.clahe));
  }
  return gaussian_normalize(raw);
}

}  // namespace

template <typename T>
std::vector<SlicePair<T>> build_slice_dataset(const std::vector<VolumePair>& vols,
                                              const DatasetConfig& cfg) {
  std::vector<SlicePair<T>> out;
  for (std::size_t vi = 0; vi < vols.size(); ++vi) {
    const VolumePair& vp = vols[vi];
    if (!vp.image.same_grid(vp.mask)) {
      throw ConfigError("dataset volume '" + vp.id + "': image and mask dims differ");
    }
    auto [uimg, rec_img] = unify(vp.image, cfg.method, cfg.target_h, cfg.target_w);
    auto [umask, rec_mask] = unify(vp.mask, cfg.method, cfg.target_h, cfg.target_w);
    (void)rec_img;
    (void)rec_mask;
    if (!uimg.same_grid(umask)) {
      throw ConfigError("dataset volume '" + vp.id +
                        "': unified image/mask grids differ");
    }
    for (int z = 0; z < uimg.d; ++z) {
      const Image2D mask_slice = slice_of(umask, z);
      if (!cfg.keep_empty_slices && !slice_has_foreground(mask_slice)) continue;
      const Image2D img_slice = prepare_intensity_slice(slice_of(uimg, z), cfg);
      out.push_back({tensor_from_image<T>(img_slice), tensor_from_image<T>(mask_slice)});
      for (int k = 1; k <= cfg.augment_per_slice; ++k) {
        AugmentSpec spec = cfg.augment;
        spec.seed = derive_seed(cfg.seed, (vi << 20) | static_cast<std::uint64_t>(z),
                                static_cast<std::uint64_t>(k));
        auto [aimg, amask] = augment(img_slice, mask_slice, spec);
        out.push_back({tensor_from_image<T>(aimg), tensor_from_image<T>(amask)});
      }
    }
  }
  return out;
}

PreprocessedVolume preprocess_intensity(const Volume& v, const DatasetConfig& cfg) {
  auto [unified, rec] = unify(v, cfg.method, cfg.target_h, cfg.target_w);
  Volume processed = unified;
  for (int z = 0; z < unified.d; ++z) {
    set_slice(processed, z, prepare_intensity_slice(slice_of(unified, z), cfg));
  }
  return {std::move(processed), rec};
}

template std::vector<SlicePair<float>> build_slice_dataset<float>(
    const std::vector<VolumePair>&, const DatasetConfig&);
template std::vector<SlicePair<double>> build_slice_dataset<double>(
    const std::vector<VolumePair>&, const DatasetConfig&);
template Tensor4<float> tensor_from_image<float>(const Image2D&);
template Tensor4<double> tensor_from_image<double>(const Image2D&);
template Image2D image_from_tensor<float>(const Tensor4<float>&, int, int);
template Image2D image_from_tensor<double>(const Tensor4<double>&, int, int);

}  // namespace znet
