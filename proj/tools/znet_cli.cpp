// Command-line front end wiring the engine into reproducible pipelines:
// phantom generation, training, prediction, evaluation and the uniform-size
// round-trip simulation.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "znet/dataset.hpp"
#include "znet/keyvalue.hpp"
#include "znet/metaimage.hpp"
#include "znet/metrics.hpp"
#include "znet/model.hpp"
#include "znet/overlay.hpp"
#include "znet/phantom.hpp"
#include "znet/rng.hpp"
#include "znet/train.hpp"

namespace fs = std::filesystem;
using namespace znet;

namespace {

// Shared flag values; empty optionals fall back to config-file values, which
// fall back to defaults.
struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<long> seed;
  std::optional<std::string> method;
  std::optional<long> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool method_flag = true) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed, "RNG seed (overrides config)");
  if (method_flag) {
    cmd->add_option("--method", f.method,
                    "uniform-size method: pad_cut | resize2d | resize3d");
  }
  cmd->add_option("--threads", f.threads, "kernel threads (default 1)");
}

KeyValueFile load_config(const CommonFlags& f) {
  KeyValueFile kv;
  if (!f.config_path.empty()) kv = KeyValueFile::parse_file(f.config_path);
  if (!f.out_dir.empty()) kv.set("out_dir", f.out_dir);
  if (f.seed) kv.set_int("seed", *f.seed);
  if (f.method) kv.set("method", *f.method);
  if (f.threads) kv.set_int("threads", *f.threads);
  return kv;
}

std::string require_out_dir(const KeyValueFile& kv) {
  const std::string out = kv.get_or("out_dir", "");
  if (out.empty()) throw ConfigError("out_dir is required (flag --out-dir)");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out);
  }
  return out;
}

// Every run persists its fully resolved configuration next to its outputs.
void persist_config(KeyValueFile kv, const std::string& command,
                    const std::string& out_dir) {
  kv.set("command", command);
  kv.write_file(out_dir + "/resolved_config.txt");
}

void apply_threads(const KeyValueFile& kv) {
  set_num_threads(static_cast<int>(kv.as_int_or("threads", 1)));
}

// --- dataset directory scanning ---------------------------------------------------

constexpr const char* kMaskSuffix = "_segmentation";

struct CasePaths {
  std::string id;
  fs::path image;
  fs::path mask;  // may be empty
};

bool is_mask_stem(const std::string& stem) {
  return stem.size() > std::string(kMaskSuffix).size() &&
         stem.ends_with(kMaskSuffix);
}

// Image volumes are `<id>.mhd`, masks `<id>_segmentation.mhd`.
std::vector<CasePaths> scan_cases(const std::string& dir, bool need_mask) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("data directory '" + dir + "' does not exist");
  }
  std::vector<CasePaths> cases;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".mhd") continue;
    const std::string stem = entry.path().stem().string();
    if (is_mask_stem(stem)) continue;
    CasePaths c;
    c.id = stem;
    c.image = entry.path();
    const fs::path mask = entry.path().parent_path() / (stem + kMaskSuffix + ".mhd");
    if (fs::exists(mask)) {
      c.mask = mask;
    } else if (need_mask) {
      throw ConfigError("missing mask file " + mask.string());
    }
    cases.push_back(std::move(c));
  }
  std::sort(cases.begin(), cases.end(),
            [](const CasePaths& a, const CasePaths& b) { return a.id < b.id; });
  if (cases.empty()) {
    throw ConfigError("no .mhd volumes found in '" + dir + "'");
  }
  return cases;
}

std::vector<fs::path> scan_masks(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("data directory '" + dir + "' does not exist");
  }
  std::vector<fs::path> masks;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".mhd") continue;
    if (is_mask_stem(entry.path().stem().string())) masks.push_back(entry.path());
  }
  std::sort(masks.begin(), masks.end());
  if (masks.empty()) {
    throw ConfigError("no *" + std::string(kMaskSuffix) + ".mhd masks found in '" +
                      dir + "'");
  }
  return masks;
}

std::string trailing_digits(const std::string& id) {
  std::size_t i = id.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(id[i - 1]))) --i;
  return id.substr(i);
}

// --- config -> typed structs --------------------------------------------------------

ZNetConfig net_config_from(const KeyValueFile& kv) {
  ZNetConfig cfg;
  cfg.depth = static_cast<int>(kv.as_int_or("depth", 5));
  cfg.base_channels = static_cast<int>(kv.as_int_or("base_channels", 32));
  const int size = static_cast<int>(kv.as_int_or("input_size", 256));
  cfg.input_h = static_cast<int>(kv.as_int_or("input_h", size));
  cfg.input_w = static_cast<int>(kv.as_int_or("input_w", size));
  cfg.in_channels = 1;
  cfg.skip_align = skip_align_from_name(kv.get_or("skip_align", "pool"));
  cfg.precision_bits = 32;
  cfg.validate();
  return cfg;
}

DatasetConfig dataset_config_from(const KeyValueFile& kv, const ZNetConfig& net) {
  DatasetConfig ds;
  ds.method = uniform_method_from_name(kv.get_or("method", "resize2d"));
  ds.target_h = net.input_h;
  ds.target_w = net.input_w;
  ds.apply_clahe = kv.as_bool_or("apply_clahe", true);
  ds.clahe.clip_limit = kv.as_double_or("clahe_clip", 2.0);
  ds.clahe.tiles_y = static_cast<int>(kv.as_int_or("clahe_tiles", 8));
  ds.clahe.tiles_x = ds.clahe.tiles_y;
  ds.augment_per_slice = static_cast<int>(kv.as_int_or("augment_per_slice", 0));
  ds.augment.rotation_deg = kv.as_double_or("rotation_deg", 15.0);
  ds.augment.flip = kv.as_bool_or("flip", true);
  ds.augment.zoom_min = kv.as_double_or("zoom_min", 0.9);
  ds.augment.zoom_max = kv.as_double_or("zoom_max", 1.1);
  ds.keep_empty_slices = kv.as_bool_or("keep_empty_slices", true);
  ds.seed = static_cast<std::uint64_t>(kv.as_int_or("seed", 0));
  return ds;
}

// --- phantom ------------------------------------------------------------------------

struct PhantomGeometry {
  int index;
  int d, h, w;
  std::array<double, 3> spacing;  // (sz, sy, sx)
};

// The five study geometries the engine mimics by default.
const std::vector<PhantomGeometry> kStudyGeometries = {
    {5, 42, 512, 512, {2.20, 0.27, 0.27}},
    {15, 20, 320, 320, {3.60, 0.63, 0.63}},
    {25, 18, 256, 256, {4.00, 0.75, 0.75}},
    {35, 23, 256, 256, {3.30, 0.70, 0.70}},
    {45, 24, 320, 320, {3.60, 0.63, 0.63}},
};

const std::vector<PhantomGeometry> kSmallGeometries = {
    {5, 6, 64, 64, {3.60, 0.63, 0.63}},
    {15, 5, 48, 48, {4.00, 0.75, 0.75}},
    {25, 7, 80, 80, {2.20, 0.27, 0.27}},
};

int cmd_phantom(const CommonFlags& flags) {
  const KeyValueFile kv = load_config(flags);
  const std::string out_dir = require_out_dir(kv);
  apply_threads(kv);
  const std::uint64_t seed = static_cast<std::uint64_t>(kv.as_int_or("seed", 0));
  const long count = kv.as_int_or("count", 5);
  if (count < 1) throw ConfigError("count must be >= 1");
  const std::string preset = kv.get_or("geometries", "studyset");
  const auto& geoms = preset == "small" ? kSmallGeometries
                      : preset == "studyset"
                          ? kStudyGeometries
                          : throw ConfigError("geometries must be studyset or small");
  const double semi_z = kv.as_double_or("semi_z_mm", 15.0);
  const double semi_y = kv.as_double_or("semi_y_mm", 25.0);
  const double semi_x = kv.as_double_or("semi_x_mm", 25.0);
  const double jitter = kv.as_double_or("jitter", 0.08);

  for (long i = 0; i < count; ++i) {
    const PhantomGeometry& g = geoms[i % geoms.size()];
    const int index = i < static_cast<long>(geoms.size())
                          ? g.index
                          : 50 + static_cast<int>(i);
    Rng rng(derive_seed(seed, 0x7068616eull, static_cast<std::uint64_t>(i)));
    PhantomParams params;
    // semi-axes in voxels from the mm request, with a small seeded jitter;
    // clamped so the shape always fits the volume regardless of geometry
    const double jmax_z = 1.0;
    const double jmax_y = 3.0 / g.spacing[1];
    const double jmax_x = 3.0 / g.spacing[2];
    auto fit = [](double want, int dim, double jmax) {
      const double limit = dim / 2.0 - 0.5 - jmax;
      return std::max(0.5, std::min(want, limit));
    };
    params.semi_axes_vox = {
        fit(semi_z / g.spacing[0] * (1.0 + jitter * rng.uniform(-1.0, 1.0)), g.d,
            jmax_z),
        fit(semi_y / g.spacing[1] * (1.0 + jitter * rng.uniform(-1.0, 1.0)), g.h,
            jmax_y),
        fit(semi_x / g.spacing[2] * (1.0 + jitter * rng.uniform(-1.0, 1.0)), g.w,
            jmax_x)};
    params.center_vox = {g.d / 2 + jmax_z * rng.uniform(-1.0, 1.0),
                         g.h / 2 + jmax_y * rng.uniform(-1.0, 1.0),
                         g.w / 2 + jmax_x * rng.uniform(-1.0, 1.0)};
    params.noise_amplitude = static_cast<float>(kv.as_double_or("noise_amplitude", 20.0));
    const PhantomVolumes pv =
        make_phantom(g.d, g.h, g.w, g.spacing, PhantomShape::ellipsoid, params,
                     derive_seed(seed, 0x766f78ull, static_cast<std::uint64_t>(i)));
    char id[16];
    std::snprintf(id, sizeof(id), "Case%02d", index);
    save_mhd(out_dir + "/" + id + ".mhd", pv.intensity);
    save_mhd(out_dir + "/" + id + kMaskSuffix + ".mhd", pv.mask);
    std::cout << "wrote " << id << " (" << g.d << "x" << g.h << "x" << g.w << ")\n";
  }
  persist_config(kv, "phantom", out_dir);
  return 0;
}

// --- train --------------------------------------------------------------------------

std::vector<std::string> val_index_list(const KeyValueFile& kv) {
  if (!kv.has("val_indices")) return {"05", "15", "25", "35", "45"};
  return kv.as_string_list("val_indices");
}

int cmd_train(const CommonFlags& flags, const std::string& data_dir_flag,
              const std::string& resume_flag) {
  KeyValueFile kv = load_config(flags);
  if (!data_dir_flag.empty()) kv.set("data_dir", data_dir_flag);
  if (!resume_flag.empty()) kv.set("resume", resume_flag);
  const std::string out_dir = require_out_dir(kv);
  apply_threads(kv);
  const std::string data_dir = kv.get_or("data_dir", "");
  if (data_dir.empty()) throw ConfigError("data_dir is required");

  const std::string resume = kv.get_or("resume", "");
  ZNetConfig net_cfg = resume.empty() ? net_config_from(kv)
                                      : read_checkpoint_config(resume);

  const auto val_ids = val_index_list(kv);
  auto is_validation = [&](const std::string& id) {
    const std::string digits = trailing_digits(id);
    return std::find(val_ids.begin(), val_ids.end(), digits) != val_ids.end();
  };

  std::vector<VolumePair> train_vols;
  int held_out = 0;
  for (const CasePaths& c : scan_cases(data_dir, /*need_mask=*/true)) {
    if (is_validation(c.id)) {
      ++held_out;
      continue;
    }
    train_vols.push_back({c.id, load_mhd(c.image.string()),
                          load_mhd(c.mask.string(), VolumeKind::mask)});
  }
  if (train_vols.empty()) {
    throw ConfigError("no training volumes left after holding out the validation "
                      "indices");
  }

  const DatasetConfig ds_cfg = dataset_config_from(kv, net_cfg);
  const auto dataset = build_slice_dataset<float>(train_vols, ds_cfg);

  TrainConfig tc;
  tc.batch_size = static_cast<int>(kv.as_int_or("batch_size", 8));
  tc.epochs = static_cast<int>(kv.as_int_or("epochs", 10));
  tc.seed = ds_cfg.seed;
  tc.shuffle = kv.as_bool_or("shuffle", true);
  tc.checkpoint_every = static_cast<int>(kv.as_int_or("checkpoint_every", 1));
  tc.dice.smooth = kv.as_double_or("dice_smooth", 1.0);
  tc.out_dir = out_dir;

  AdamState opt;
  opt.lr = kv.as_double_or("lr", 0.001);

  ZNet<float> model(net_cfg, tc.seed);
  if (!resume.empty()) {
    const CheckpointMeta meta = load_checkpoint(resume, net_cfg, model.store());
    opt.t = meta.adam_t;
    tc.start_epoch = static_cast<int>(meta.epochs_completed);
    tc.start_step = meta.adam_t;
  }

  persist_config(kv, "train", out_dir);
  const TrainLog log = train(model, opt, dataset, tc);
  std::cout << "trained " << log.steps.size() << " steps over "
            << log.epoch_mean.size() << " epochs on " << dataset.size()
            << " slices (" << train_vols.size() << " volumes, " << held_out
            << " held out)\n";
  if (!log.epoch_mean.empty()) {
    std::printf("final epoch mean loss %.6f\n", log.epoch_mean.back());
  }
  std::cout << "checkpoint: " << out_dir << "/checkpoint.znck\n";
  return 0;
}

// --- predict ------------------------------------------------------------------------

int cmd_predict(const CommonFlags& flags, const std::string& checkpoint_flag,
                const std::string& input_dir_flag, const std::string& ref_dir_flag,
                bool overlay_flag) {
  KeyValueFile kv = load_config(flags);
  if (!checkpoint_flag.empty()) kv.set("checkpoint", checkpoint_flag);
  if (!input_dir_flag.empty()) kv.set("input_dir", input_dir_flag);
  if (!ref_dir_flag.empty()) kv.set("ref_dir", ref_dir_flag);
  if (overlay_flag) kv.set("overlay", "true");
  const std::string out_dir = require_out_dir(kv);
  apply_threads(kv);

  const std::string ckpt = kv.get_or("checkpoint", "");
  if (ckpt.empty()) throw ConfigError("checkpoint is required");
  const std::string input_dir = kv.get_or("input_dir", "");
  if (input_dir.empty()) throw ConfigError("input_dir is required");
  const bool overlay = kv.as_bool_or("overlay", false);
  const std::string ref_dir = kv.get_or("ref_dir", "");

  const ZNetConfig net_cfg = read_checkpoint_config(ckpt);
  ZNet<float> model(net_cfg, 0);
  load_checkpoint(ckpt, net_cfg, model.store());
  const DatasetConfig ds_cfg = dataset_config_from(kv, net_cfg);
  const int batch = static_cast<int>(kv.as_int_or("batch_size", 8));

  for (const CasePaths& c : scan_cases(input_dir, /*need_mask=*/false)) {
    const Volume raw = load_mhd(c.image.string());
    const PreprocessedVolume pre = preprocess_intensity(raw, ds_cfg);
    const Volume probs = predict_probabilities(model, pre.processed, batch);
    const Volume mask_unified = binarize(probs);
    const Volume mask = reconstruct(mask_unified, pre.rec);
    save_mhd(out_dir + "/" + c.id + kMaskSuffix + ".mhd", mask);
    std::cout << "predicted " << c.id << " (" << mask.foreground_count()
              << " voxels)\n";
    if (overlay) {
      std::optional<Volume> ref;
      fs::path ref_path;
      if (!ref_dir.empty()) {
        ref_path = fs::path(ref_dir) / (c.id + kMaskSuffix + ".mhd");
      } else if (!c.mask.empty()) {
        ref_path = c.mask;
      }
      if (!ref_path.empty() && fs::exists(ref_path)) {
        ref = load_mhd(ref_path.string(), VolumeKind::mask);
      }
      const fs::path odir = fs::path(out_dir) / "overlays" / c.id;
      fs::create_directories(odir);
      for (int z = 0; z < raw.d; ++z) {
        const Image2D intensity = slice_of(raw, z);
        const Image2D pred_slice = slice_of(mask, z);
        std::optional<Image2D> ref_slice;
        if (ref) ref_slice = slice_of(*ref, z);
        const ImageRGB img = render_overlay(intensity, &pred_slice,
                                            ref_slice ? &*ref_slice : nullptr);
        char name[32];
        std::snprintf(name, sizeof(name), "slice_%03d.ppm", z);
        write_ppm((odir / name).string(), img);
      }
    }
  }
  persist_config(kv, "predict", out_dir);
  return 0;
}

// --- evaluate / simulate ---------------------------------------------------------------

int cmd_evaluate(const CommonFlags& flags, const std::string& pred_dir_flag,
                 const std::string& ref_dir_flag) {
  KeyValueFile kv = load_config(flags);
  if (!pred_dir_flag.empty()) kv.set("pred_dir", pred_dir_flag);
  if (!ref_dir_flag.empty()) kv.set("ref_dir", ref_dir_flag);
  const std::string out_dir = require_out_dir(kv);
  apply_threads(kv);
  const std::string pred_dir = kv.get_or("pred_dir", "");
  const std::string ref_dir = kv.get_or("ref_dir", "");
  if (pred_dir.empty() || ref_dir.empty()) {
    throw ConfigError("pred_dir and ref_dir are required");
  }
  HausdorffOptions hopt;
  hopt.percentile95 = kv.as_bool_or("hd_percentile95", false);

  std::vector<Volume> preds, refs;
  std::vector<std::string> ids;
  for (const fs::path& p : scan_masks(pred_dir)) {
    const fs::path ref = fs::path(ref_dir) / p.filename();
    if (!fs::exists(ref)) {
      throw ConfigError("no reference mask for " + p.filename().string());
    }
    preds.push_back(load_mhd(p.string(), VolumeKind::mask));
    refs.push_back(load_mhd(ref.string(), VolumeKind::mask));
    std::string id = p.stem().string();
    id.resize(id.size() - std::string(kMaskSuffix).size());
    ids.push_back(id);
  }
  std::vector<EvalCase> cases;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cases.push_back({ids[i], &preds[i], &refs[i]});
  }
  const MetricReport report = evaluate(cases, hopt);
  std::cout << report_table(report);
  std::ofstream csv(out_dir + "/report.csv");
  if (!csv) throw IoError("cannot write report.csv");
  csv << report_csv(report);
  persist_config(kv, "evaluate", out_dir);
  return 0;
}

int cmd_simulate(const CommonFlags& flags, const std::string& data_dir_flag,
                 const std::string& methods_flag) {
  KeyValueFile kv = load_config(flags);
  if (!data_dir_flag.empty()) kv.set("data_dir", data_dir_flag);
  if (!methods_flag.empty()) kv.set("methods", methods_flag);
  const std::string out_dir = require_out_dir(kv);
  apply_threads(kv);
  const std::string data_dir = kv.get_or("data_dir", "");
  if (data_dir.empty()) throw ConfigError("data_dir is required");
  const int target = static_cast<int>(kv.as_int_or("input_size", 256));

  std::vector<UniformMethod> methods;
  if (kv.has("methods")) {
    for (const std::string& name : kv.as_string_list("methods")) {
      methods.push_back(uniform_method_from_name(name));
    }
  } else if (kv.has("method")) {
    methods.push_back(uniform_method_from_name(kv.get("method")));
  } else {
    methods = {UniformMethod::pad_cut, UniformMethod::resize2d,
               UniformMethod::resize3d};
  }

  std::vector<Volume> masks;
  for (const fs::path& p : scan_masks(data_dir)) {
    masks.push_back(load_mhd(p.string(), VolumeKind::mask));
  }
  const auto rows = simulate_uniform(masks, methods, target, target);
  std::cout << simulation_table(rows);
  std::ofstream csv(out_dir + "/simulate.csv");
  if (!csv) throw IoError("cannot write simulate.csv");
  csv << simulation_csv(rows);
  persist_config(kv, "simulate", out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Z-net prostate segmentation engine"};
  app.require_subcommand(1);

  CommonFlags phantom_flags, train_flags, predict_flags, eval_flags, sim_flags;
  std::string data_dir, resume, checkpoint, input_dir, ref_dir, pred_dir, methods;
  bool overlay = false;

  CLI::App* phantom = app.add_subcommand("phantom", "generate synthetic volumes");
  add_common_flags(phantom, phantom_flags, /*method_flag=*/false);

  CLI::App* train_cmd = app.add_subcommand("train", "train a Z-net");
  add_common_flags(train_cmd, train_flags);
  train_cmd->add_option("--data-dir", data_dir, "directory of paired volumes");
  train_cmd->add_option("--resume", resume, "checkpoint to resume from");

  CLI::App* predict = app.add_subcommand("predict", "segment volumes");
  add_common_flags(predict, predict_flags);
  predict->add_option("--checkpoint", checkpoint, "trained checkpoint");
  predict->add_option("--input-dir", input_dir, "volumes to segment");
  predict->add_option("--ref-dir", ref_dir, "reference masks for overlays");
  predict->add_flag("--overlay", overlay, "write per-slice overlay pixmaps");

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score predicted masks");
  add_common_flags(evaluate_cmd, eval_flags, /*method_flag=*/false);
  evaluate_cmd->add_option("--pred-dir", pred_dir, "predicted masks");
  evaluate_cmd->add_option("--ref-dir", ref_dir, "reference masks");

  CLI::App* simulate = app.add_subcommand("simulate", "uniform-size round-trip study");
  add_common_flags(simulate, sim_flags);
  simulate->add_option("--data-dir", data_dir, "directory holding ground-truth masks");
  simulate->add_option("--methods", methods, "comma-separated method list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(phantom_flags);
    if (train_cmd->parsed()) return cmd_train(train_flags, data_dir, resume);
    if (predict->parsed()) {
      return cmd_predict(predict_flags, checkpoint, input_dir, ref_dir, overlay);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(eval_flags, pred_dir, ref_dir);
    if (simulate->parsed()) return cmd_simulate(sim_flags, data_dir, methods);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
