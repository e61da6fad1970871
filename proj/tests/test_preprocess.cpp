#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "helpers.hpp"
#include "znet/metaimage.hpp"
#include "znet/phantom.hpp"
#include "znet/preprocess.hpp"

using namespace znet;

namespace {

Volume random_intensity(int d, int h, int w, std::array<double, 3> spacing,
                        std::uint64_t seed) {
  Rng rng(seed);
  Volume v(d, h, w, spacing);
  for (auto& x : v.data) x = static_cast<float>(rng.uniform(-100.0, 400.0));
  return v;
}

void write_raw(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

double mask_dice(const Volume& a, const Volume& b) {
  std::size_t ca = 0, cb = 0, inter = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a.data[i] == 1.0f;
    cb += b.data[i] == 1.0f;
    inter += a.data[i] == 1.0f && b.data[i] == 1.0f;
  }
  return 100.0 * 2.0 * static_cast<double>(inter) / static_cast<double>(ca + cb);
}

}  // namespace

TEST_CASE("mhd reader maps (x,y,z) header order to (d,h,w)") {
  test::TempDir tmp("mhd_order");
  // DimSize 2 3 4 means w=2, h=3, d=4
  std::vector<unsigned char> raw(2 * 3 * 4 * 2);
  for (std::size_t i = 0; i < raw.size() / 2; ++i) {
    raw[2 * i] = static_cast<unsigned char>(i);  // little-endian shorts 0..23
    raw[2 * i + 1] = 0;
  }
  write_raw(tmp.str() + "/v.raw", raw);
  std::ofstream h(tmp.str() + "/v.mhd");
  h << "ObjectType = Image\nNDims = 3\nDimSize = 2 3 4\n"
       "ElementSpacing = 0.27 0.5 2.2\nElementType = MET_SHORT\n"
       "ElementDataFile = v.raw\n";
  h.close();
  const Volume v = load_mhd(tmp.str() + "/v.mhd");
  CHECK(v.d == 4);
  CHECK(v.h == 3);
  CHECK(v.w == 2);
  CHECK(v.spacing == std::array<double, 3>{2.2, 0.5, 0.27});
  CHECK(v.at(0, 0, 0) == 0.0f);
  CHECK(v.at(0, 0, 1) == 1.0f);   // x fastest
  CHECK(v.at(0, 1, 0) == 2.0f);   // then y
  CHECK(v.at(1, 0, 0) == 6.0f);   // then z
  CHECK(v.at(3, 2, 1) == 23.0f);
}

TEST_CASE("mhd reader accepts ElementSize as a spacing alias") {
  test::TempDir tmp("mhd_esize");
  write_raw(tmp.str() + "/v.raw", {7});
  std::ofstream h(tmp.str() + "/v.mhd");
  h << "NDims = 3\nDimSize = 1 1 1\nElementType = MET_UCHAR\n"
       "ElementSize = 0.5 0.75 3.25\nElementDataFile = v.raw\n";
  h.close();
  const Volume v = load_mhd(tmp.str() + "/v.mhd");
  CHECK(v.spacing == std::array<double, 3>{3.25, 0.75, 0.5});
  CHECK(v.at(0, 0, 0) == 7.0f);
}

TEST_CASE("mhd reader honors the MSB byte-order flag") {
  test::TempDir tmp("mhd_msb");
  std::vector<unsigned char> raw = {0x01, 0x02};  // big-endian 0x0102 = 258
  write_raw(tmp.str() + "/v.raw", raw);
  std::ofstream h(tmp.str() + "/v.mhd");
  h << "NDims = 3\nDimSize = 1 1 1\nElementType = MET_USHORT\n"
       "BinaryDataByteOrderMSB = True\nElementDataFile = v.raw\n";
  h.close();
  const Volume v = load_mhd(tmp.str() + "/v.mhd");
  CHECK(v.at(0, 0, 0) == 258.0f);
}

TEST_CASE("mhd reader rejects bad headers with the offending key") {
  test::TempDir tmp("mhd_bad");
  write_raw(tmp.str() + "/v.raw", {0, 0, 0, 0});

  auto header = [&](const std::string& body) {
    std::ofstream h(tmp.str() + "/v.mhd");
    h << body;
  };

  header("NDims = 2\nDimSize = 2 2\nElementDataFile = v.raw\n");
  CHECK_THROWS_WITH_AS(load_mhd(tmp.str() + "/v.mhd"), doctest::Contains("NDims"),
                       ParseError);

  header("NDims = 3\nDimSize = 2 2 2\nElementType = MET_DOUBLE\n"
         "ElementDataFile = v.raw\n");
  CHECK_THROWS_WITH_AS(load_mhd(tmp.str() + "/v.mhd"),
                       doctest::Contains("ElementType"), ParseError);

  // 8 voxels promised, 4 bytes of MET_UCHAR present
  header("NDims = 3\nDimSize = 2 2 2\nElementType = MET_UCHAR\n"
         "ElementDataFile = v.raw\n");
  CHECK_THROWS_WITH_AS(load_mhd(tmp.str() + "/v.mhd"), doctest::Contains("bytes"),
                       ParseError);

  header("NDims = 3\nDimSize = 2 2 1\nElementType = MET_UCHAR\n"
         "ElementDataFile = LOCAL\n");
  CHECK_THROWS_AS(load_mhd(tmp.str() + "/v.mhd"), ParseError);
}

TEST_CASE("mhd write then read is the identity on dims, spacing and payload") {
  test::TempDir tmp("mhd_rt");
  const Volume v = random_intensity(3, 5, 4, {3.6, 0.63, 0.63}, 7);
  save_mhd(tmp.str() + "/v.mhd", v);
  const Volume r = load_mhd(tmp.str() + "/v.mhd");
  CHECK(r.same_grid(v));
  CHECK(r.spacing == v.spacing);
  CHECK(std::memcmp(r.data.data(), v.data.data(), v.size() * sizeof(float)) == 0);

  Volume mask(2, 3, 3, {1, 1, 1}, VolumeKind::mask);
  mask.at(0, 1, 1) = 1.0f;
  mask.at(1, 2, 2) = 1.0f;
  save_mhd(tmp.str() + "/m.mhd", mask);
  const Volume rm = load_mhd(tmp.str() + "/m.mhd", VolumeKind::mask);
  CHECK(rm.is_binary());
  CHECK(std::memcmp(rm.data.data(), mask.data.data(), mask.size() * sizeof(float)) ==
        0);
  // masks are written as one byte per voxel
  CHECK(std::filesystem::file_size(tmp.str() + "/m.raw") == mask.size());
}

TEST_CASE("clahe maps a constant slice to a constant") {
  const Image2D c(16, 16, 42.0f);
  const Image2D out = clahe(c);
  for (float v : out.data) CHECK(v == out.data[0]);
  CHECK(out.data[0] > 0.0f);
  CHECK(out.data[0] <= 1.0f);
}

TEST_CASE("clahe with one tile and a huge clip limit is global equalization") {
  Image2D img(8, 8);
  Rng rng(11);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(0.0, 1000.0));
  ClaheConfig cfg;
  cfg.clip_limit = 1e12;
  cfg.tiles_y = 1;
  cfg.tiles_x = 1;
  const Image2D out = clahe(img, cfg);

  // independent global histogram-equalization oracle
  float lo = img.data[0], hi = img.data[0];
  for (float v : img.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    const int bin = std::min(255, static_cast<int>((img.data[i] - lo) / (hi - lo) * 256));
    double cdf = 0.0;
    for (std::size_t j = 0; j < img.size(); ++j) {
      const int bj = std::min(255, static_cast<int>((img.data[j] - lo) / (hi - lo) * 256));
      if (bj <= bin) cdf += 1.0;
    }
    CHECK(out.data[i] == doctest::Approx(cdf / img.size()).epsilon(1e-9));
  }
}

TEST_CASE("clahe maps an equal-count two-level slice to 0.5 and 1.0") {
  Image2D img(4, 4);
  for (int i = 0; i < 16; ++i) img.data[i] = i < 8 ? 10.0f : 20.0f;
  ClaheConfig cfg;
  cfg.clip_limit = 1e12;
  cfg.tiles_y = 1;
  cfg.tiles_x = 1;
  const Image2D out = clahe(img, cfg);
  for (int i = 0; i < 16; ++i) {
    CHECK(out.data[i] == doctest::Approx(i < 8 ? 0.5 : 1.0).epsilon(1e-12));
  }
}

TEST_CASE("clahe output stays in [0,1] and rejects a bad clip limit") {
  Image2D img(32, 24);
  Rng rng(12);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-500.0, 500.0));
  const Image2D out = clahe(img);
  for (float v : out.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  ClaheConfig bad;
  bad.clip_limit = 0.0;
  CHECK_THROWS_AS(clahe(img, bad), ConfigError);
}

TEST_CASE("gaussian_normalize yields zero mean and unit variance") {
  Image2D img(16, 16);
  Rng rng(13);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(50.0, 150.0));
  const Image2D out = gaussian_normalize(img);
  double mean = 0.0, var = 0.0;
  for (float v : out.data) mean += v;
  mean /= out.size();
  for (float v : out.data) var += (v - mean) * (v - mean);
  var /= out.size();
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);

  const Image2D flat = gaussian_normalize(Image2D(4, 4, 3.5f));
  for (float v : flat.data) CHECK(v == 0.0f);
}

TEST_CASE("gaussian_normalize is invariant under positive affine rescaling") {
  Image2D img(8, 8);
  Rng rng(14);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  Image2D scaled(8, 8);
  for (std::size_t i = 0; i < img.size(); ++i) scaled.data[i] = 3.0f * img.data[i] + 42.0f;
  const Image2D a = gaussian_normalize(img);
  const Image2D b = gaussian_normalize(scaled);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-5));
  }
}

TEST_CASE("pad_cut crops a 512 slice to 256 with offsets (128,128)") {
  Volume v(2, 512, 512, {2.2, 0.27, 0.27});
  v.at(0, 128, 128) = 7.0f;  // lands at (0,0) after the crop
  v.at(1, 383, 383) = 9.0f;  // lands at (255,255)
  const auto [u, rec] = unify_pad_cut(v, 256, 256);
  CHECK(u.d == 2);
  CHECK(u.h == 256);
  CHECK(u.w == 256);
  CHECK(rec.off_y == 128);
  CHECK(rec.off_x == 128);
  CHECK(u.at(0, 0, 0) == 7.0f);
  CHECK(u.at(1, 255, 255) == 9.0f);
}

TEST_CASE("pad_cut leaves an already-256 volume untouched") {
  const Volume v = random_intensity(3, 256, 256, {4.0, 0.75, 0.75}, 15);
  const auto [u, rec] = unify_pad_cut(v, 256, 256);
  CHECK(rec.off_y == 0);
  CHECK(rec.off_x == 0);
  CHECK(std::memcmp(u.data.data(), v.data.data(), v.size() * sizeof(float)) == 0);
}

TEST_CASE("pad_cut pads a 200 slice with offset -28 and round trips exactly") {
  Rng rng(16);
  Volume mask(2, 200, 200, {3.6, 0.63, 0.63}, VolumeKind::mask);
  for (auto& v : mask.data) v = rng.bernoulli(0.3) ? 1.0f : 0.0f;
  const auto [u, rec] = unify_pad_cut(mask, 256, 256);
  CHECK(rec.off_y == -28);
  CHECK(rec.off_x == -28);
  const Volume back = reconstruct_pad_cut(u, rec);
  CHECK(back.same_grid(mask));
  CHECK(back.spacing == mask.spacing);
  CHECK(std::memcmp(back.data.data(), mask.data.data(),
                    mask.size() * sizeof(float)) == 0);
}

TEST_CASE("pad_cut round trip is exact for masks confined to the center") {
  Volume mask(3, 320, 320, {3.6, 0.63, 0.63}, VolumeKind::mask);
  // blob inside the central 256x256 window ([32, 288))
  for (int z = 0; z < 3; ++z) {
    for (int y = 100; y < 220; ++y) {
      for (int x = 90; x < 230; ++x) mask.at(z, y, x) = 1.0f;
    }
  }
  const auto [u, rec] = unify_pad_cut(mask, 256, 256);
  const Volume back = reconstruct_pad_cut(u, rec);
  CHECK(mask_dice(back, mask) == 100.0);
}

TEST_CASE("resize2d 4->2 picks source rows {0,2}") {
  Volume v(1, 4, 4, {1, 1, 1});
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) v.at(0, y, x) = static_cast<float>(10 * y + x);
  }
  const auto [u, rec] = unify_resize2d(v, 2, 2);
  CHECK(u.at(0, 0, 0) == 0.0f);
  CHECK(u.at(0, 0, 1) == 2.0f);
  CHECK(u.at(0, 1, 0) == 20.0f);
  CHECK(u.at(0, 1, 1) == 22.0f);
  CHECK(rec.orig_h == 4);
}

TEST_CASE("resize2d identity when already at target size") {
  const Volume v = random_intensity(2, 64, 64, {1, 0.5, 0.5}, 17);
  const auto [u, rec] = unify_resize2d(v, 64, 64);
  CHECK(std::memcmp(u.data.data(), v.data.data(), v.size() * sizeof(float)) == 0);
  const Volume back = reconstruct_resize2d(u, rec);
  CHECK(std::memcmp(back.data.data(), v.data.data(), v.size() * sizeof(float)) == 0);
}

TEST_CASE("nearest-neighbor index map is monotone") {
  // via resize: a monotone source produces a monotone output
  Volume v(1, 1, 97, {1, 1, 1});
  for (int x = 0; x < 97; ++x) v.at(0, 0, x) = static_cast<float>(x);
  const auto [u, rec] = unify_resize2d(v, 1, 41);
  (void)rec;
  for (int x = 1; x < 41; ++x) CHECK(u.at(0, 0, x) >= u.at(0, 0, x - 1));
  const auto [u2, rec2] = unify_resize2d(v, 1, 181);
  (void)rec2;
  for (int x = 1; x < 181; ++x) CHECK(u2.at(0, 0, x) >= u2.at(0, 0, x - 1));
}

TEST_CASE("resize2d round trip on a centered disk keeps vDSC at 95%+") {
  Volume mask(1, 320, 320, {3.6, 0.63, 0.63}, VolumeKind::mask);
  for (int y = 0; y < 320; ++y) {
    for (int x = 0; x < 320; ++x) {
      if ((y - 160) * (y - 160) + (x - 160) * (x - 160) <= 80 * 80) {
        mask.at(0, y, x) = 1.0f;
      }
    }
  }
  const auto [u, rec] = unify_resize2d(mask, 256, 256);
  CHECK(u.is_binary());
  const Volume back = reconstruct_resize2d(u, rec);
  CHECK(back.is_binary());
  CHECK(mask_dice(back, mask) >= 95.0);
}

TEST_CASE("resize3d computes isotropic dims from spacing") {
  const Volume v = random_intensity(18, 64, 64, {4.0, 0.75, 0.75}, 18);
  const auto [u, rec] = unify_resize3d(v, 64, 64);
  (void)u;
  CHECK(rec.iso_d == 144);  // round(18 * 4.0 / 0.5)
  CHECK(rec.iso_h == 96);   // round(64 * 0.75 / 0.5)
  CHECK(rec.iso_w == 96);
}

TEST_CASE("resize3d stage 1 is the identity on an isotropic 0.5mm volume") {
  const Volume v = random_intensity(6, 32, 32, {0.5, 0.5, 0.5}, 19);
  const auto [u3, rec3] = unify_resize3d(v, 32, 32);
  CHECK(rec3.iso_d == 6);
  CHECK(rec3.iso_h == 32);
  CHECK(rec3.iso_w == 32);
  const auto [u2, rec2] = unify_resize2d(v, 32, 32);
  (void)rec2;
  CHECK(std::memcmp(u3.data.data(), u2.data.data(), u2.size() * sizeof(float)) == 0);
}

TEST_CASE("resize3d round trip restores dims and spacing bit-exactly") {
  Rng rng(20);
  Volume mask(10, 40, 40, {3.3, 0.7, 0.7}, VolumeKind::mask);
  for (int z = 3; z < 7; ++z) {
    for (int y = 10; y < 30; ++y) {
      for (int x = 12; x < 28; ++x) mask.at(z, y, x) = 1.0f;
    }
  }
  const auto [u, rec] = unify_resize3d(mask, 64, 64);
  CHECK(u.is_binary());
  const Volume back = reconstruct_resize3d(u, rec);
  CHECK(back.d == 10);
  CHECK(back.h == 40);
  CHECK(back.w == 40);
  CHECK(back.spacing == mask.spacing);
  CHECK(back.is_binary());
}

TEST_CASE("resize3d loses no more than resize2d gains on an anisotropic phantom") {
  const PhantomParams params{{-1, -1, -1}, 7.0, {0, 0, 0}, 100.0f, 100.0f, 0.0f, 8};
  const auto pv = make_phantom(16, 96, 96, {3.6, 0.63, 0.63}, PhantomShape::sphere,
                               params, 21);
  auto round_trip = [&](UniformMethod m) {
    const auto [u, rec] = unify(pv.mask, m, 64, 64);
    return mask_dice(reconstruct(u, rec), pv.mask);
  };
  const double d2 = round_trip(UniformMethod::resize2d);
  const double d3 = round_trip(UniformMethod::resize3d);
  CHECK(d3 <= d2);  // two interpolation stages against one
}

TEST_CASE("trilinear intensity path differs from mask path but keeps range") {
  const Volume v = random_intensity(5, 20, 20, {2.0, 1.0, 1.0}, 22);
  const auto [u, rec] = unify_resize3d(v, 32, 32);
  (void)rec;
  float lo = v.data[0], hi = v.data[0];
  for (float x : v.data) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (float x : u.data) {
    CHECK(x >= lo);
    CHECK(x <= hi);  // interpolation is a convex combination
  }
}

TEST_CASE("augment identity spec is the identity") {
  Image2D img(16, 16);
  Image2D mask(16, 16);
  Rng rng(23);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  for (auto& v : mask.data) v = rng.bernoulli(0.4) ? 1.0f : 0.0f;
  AugmentSpec spec;
  spec.rotation_deg = 0.0;
  spec.flip = false;
  spec.zoom_min = spec.zoom_max = 1.0;
  const auto [ai, am] = augment(img, mask, spec);
  CHECK(std::memcmp(ai.data.data(), img.data.data(), img.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(am.data.data(), mask.data.data(), mask.size() * sizeof(float)) ==
        0);
}

TEST_CASE("flip applied twice is the identity") {
  Image2D img(7, 9);
  Rng rng(24);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const Image2D twice = flip_horizontal(flip_horizontal(img));
  CHECK(std::memcmp(twice.data.data(), img.data.data(), img.size() * sizeof(float)) ==
        0);
}

TEST_CASE("augmented masks stay binary under any sampled transform") {
  Image2D img(24, 24);
  Image2D mask(24, 24);
  Rng rng(25);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  for (int y = 8; y < 16; ++y) {
    for (int x = 6; x < 18; ++x) mask.at(y, x) = 1.0f;
  }
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    AugmentSpec spec;
    spec.seed = seed;
    const auto [ai, am] = augment(img, mask, spec);
    (void)ai;
    for (float v : am.data) CHECK((v == 0.0f || v == 1.0f));
  }
}

TEST_CASE("augment is deterministic per seed and validates its spec") {
  Image2D img(12, 12, 1.0f);
  Image2D mask(12, 12, 0.0f);
  mask.at(6, 6) = 1.0f;
  AugmentSpec spec;
  spec.seed = 99;
  const auto [a1, m1] = augment(img, mask, spec);
  const auto [a2, m2] = augment(img, mask, spec);
  CHECK(std::memcmp(a1.data.data(), a2.data.data(), a1.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(m1.data.data(), m2.data.data(), m1.size() * sizeof(float)) == 0);

  AugmentSpec bad;
  bad.zoom_min = 1.2;
  bad.zoom_max = 0.8;
  CHECK_THROWS_AS(sample_transform(bad), ConfigError);
  bad = AugmentSpec{};
  bad.rotation_deg = 270.0;
  CHECK_THROWS_AS(sample_transform(bad), ConfigError);
}

TEST_CASE("phantom sphere voxel count matches the brute-force lattice count") {
  PhantomParams params;
  params.radius_vox = 9.0;
  const auto pv =
      make_phantom(20, 64, 64, {2.2, 0.27, 0.27}, PhantomShape::sphere, params, 31);
  // independent lattice count around the default integer center
  std::size_t count = 0;
  const double cz = 10, cy = 32, cx = 32;
  for (int z = 0; z < 20; ++z) {
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const double dz = z - cz, dy = y - cy, dx = x - cx;
        if (dz * dz + dy * dy + dx * dx <= 81.0) ++count;
      }
    }
  }
  CHECK(pv.mask.foreground_count() == count);
  CHECK(count > 0);
  CHECK(pv.intensity.same_grid(pv.mask));
}

TEST_CASE("phantom radius 0 marks exactly the center voxel") {
  PhantomParams params;
  params.radius_vox = 0.0;
  const auto pv = make_phantom(9, 9, 9, {1, 1, 1}, PhantomShape::sphere, params, 32);
  CHECK(pv.mask.foreground_count() == 1);
  CHECK(pv.mask.at(4, 4, 4) == 1.0f);
}

TEST_CASE("phantom generation is seed-deterministic") {
  PhantomParams params;
  params.semi_axes_vox = {3.0, 10.0, 12.0};
  const auto a =
      make_phantom(10, 40, 40, {3.6, 0.63, 0.63}, PhantomShape::ellipsoid, params, 33);
  const auto b =
      make_phantom(10, 40, 40, {3.6, 0.63, 0.63}, PhantomShape::ellipsoid, params, 33);
  const auto c =
      make_phantom(10, 40, 40, {3.6, 0.63, 0.63}, PhantomShape::ellipsoid, params, 34);
  CHECK(std::memcmp(a.intensity.data.data(), b.intensity.data.data(),
                    a.intensity.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(a.mask.data.data(), b.mask.data.data(),
                    a.mask.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(a.intensity.data.data(), c.intensity.data.data(),
                    a.intensity.size() * sizeof(float)) != 0);
}

TEST_CASE("phantom rejects shapes that exceed the volume") {
  PhantomParams params;
  params.radius_vox = 30.0;
  CHECK_THROWS_AS(make_phantom(10, 40, 40, {1, 1, 1}, PhantomShape::sphere, params, 35),
                  GeometryError);
}

TEST_CASE("unify preserves binarity along every mask path") {
  const PhantomParams params{{-1, -1, -1}, 0.0, {4.0, 14.0, 11.0}, 100.0f, 100.0f,
                             0.0f,          8};
  const auto pv = make_phantom(14, 72, 72, {3.3, 0.7, 0.7}, PhantomShape::ellipsoid,
                               params, 36);
  for (UniformMethod m :
       {UniformMethod::pad_cut, UniformMethod::resize2d, UniformMethod::resize3d}) {
    const auto [u, rec] = unify(pv.mask, m, 48, 48);
    CHECK(u.is_binary());
    const Volume back = reconstruct(u, rec);
    CHECK(back.is_binary());
    CHECK(back.d == pv.mask.d);
    CHECK(back.h == pv.mask.h);
    CHECK(back.w == pv.mask.w);
    CHECK(back.spacing == pv.mask.spacing);
  }
}
