#include "znet/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "znet/rng.hpp"

namespace znet {

namespace {

void append_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path + " for appending");
  out << text;
  if (!out) throw IoError("write to " + path + " failed");
}

std::string loss_line(std::uint64_t step, int epoch, double loss) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%llu,%d,%.9g\n",
                static_cast<unsigned long long>(step), epoch, loss);
  return buf;
}

}  // namespace

template <typename T>
TrainLog train(ZNet<T>& model, AdamState& opt, const std::vector<SlicePair<T>>& data,
               const TrainConfig& tc) {
  if (data.empty()) throw ConfigError("train: dataset is empty");
  if (tc.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (tc.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  const ZNetConfig& cfg = model.config();
  for (const auto& sp : data) {
    if (sp.image.h != cfg.input_h || sp.image.w != cfg.input_w ||
        sp.image.c != cfg.in_channels || !sp.image.same_shape(sp.mask)) {
      throw ShapeError("train: slice " + sp.image.shape_str() +
                       " does not match model input");
    }
  }

  TrainLog log;
  std::uint64_t step = tc.start_step;
  const std::string log_path =
      tc.out_dir.empty() ? "" : tc.out_dir + "/train_log.txt";
  const std::string ckpt_path =
      tc.out_dir.empty() ? "" : tc.out_dir + "/checkpoint.znck";

  auto save = [&](int epochs_completed) {
    if (ckpt_path.empty()) return;
    save_checkpoint(ckpt_path, cfg, model.store(),
                    {opt.t, static_cast<std::uint32_t>(epochs_completed)});
  };

  for (int e = tc.start_epoch; e < tc.start_epoch + tc.epochs; ++e) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (tc.shuffle) {
      Rng rng(derive_seed(tc.seed, 0x65706f6368ull, static_cast<std::uint64_t>(e)));
      shuffle(order, rng);
    }
    std::string epoch_text;
    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += tc.batch_size) {
      const std::size_t bsz =
          std::min<std::size_t>(tc.batch_size, order.size() - pos);
      Tensor4<T> x(static_cast<int>(bsz), cfg.in_channels, cfg.input_h, cfg.input_w);
      Tensor4<T> y(static_cast<int>(bsz), cfg.in_channels, cfg.input_h, cfg.input_w);
      const std::size_t item = x.size() / bsz;
      for (std::size_t b = 0; b < bsz; ++b) {
        const SlicePair<T>& sp = data[order[pos + b]];
        std::copy(sp.image.data.begin(), sp.image.data.end(),
                  x.data.begin() + b * item);
        std::copy(sp.mask.data.begin(), sp.mask.data.end(),
                  y.data.begin() + b * item);
      }
      Tensor4<T> pred = model.forward(x, Mode::train);
      const DiceResult dl = dice_loss(pred, y, tc.dice);
      if (!std::isfinite(dl.mean)) {
        throw NumericError("non-finite loss at step " + std::to_string(step + 1) +
                           " (epoch " + std::to_string(e) + ", batch " +
                           std::to_string(epoch_batches) + ")");
      }
      Tensor4<T> grad = dice_loss_backward(pred, y, tc.dice);
      model.backward(grad);
      adam_step(model.store(), opt);
      ++step;
      log.steps.push_back({step, e, dl.mean});
      epoch_text += loss_line(step, e, dl.mean);
      epoch_sum += dl.mean;
      ++epoch_batches;
    }
    const double mean = epoch_batches ? epoch_sum / epoch_batches : 0.0;
    log.epoch_mean.push_back(mean);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "# epoch %d mean %.9g\n", e, mean);
    epoch_text += buf;
    log.text += epoch_text;
    if (!log_path.empty()) append_text(log_path, epoch_text);
    const int completed = e + 1;
    if (tc.checkpoint_every > 0 &&
        (completed - tc.start_epoch) % tc.checkpoint_every == 0) {
      save(completed);
    }
  }
  save(tc.start_epoch + tc.epochs);
  return log;
}

template <typename T>
Volume predict_probabilities(ZNet<T>& model, const Volume& vol, int batch_size) {
  const ZNetConfig& cfg = model.config();
  if (vol.h != cfg.input_h || vol.w != cfg.input_w) {
    throw ShapeError("predict: volume slices " + std::to_string(vol.h) + "x" +
                     std::to_string(vol.w) + " do not match model input " +
                     std::to_string(cfg.input_h) + "x" + std::to_string(cfg.input_w));
  }
  if (cfg.in_channels != 1) {
    throw ShapeError("predict expects a single-channel model");
  }
  if (batch_size < 1) throw ConfigError("predict: batch_size must be >= 1");
  Volume probs(vol.d, vol.h, vol.w, vol.spacing, VolumeKind::intensity);
  const std::size_t plane = static_cast<std::size_t>(vol.h) * vol.w;
  for (int z0 = 0; z0 < vol.d; z0 += batch_size) {
    const int bsz = std::min(batch_size, vol.d - z0);
    Tensor4<T> x(bsz, 1, vol.h, vol.w);
    for (int b = 0; b < bsz; ++b) {
      const float* src = vol.data.data() + vol.offset(z0 + b, 0, 0);
      T* dst = x.plane(b, 0);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<T>(src[i]);
    }
    const Tensor4<T> pred = model.forward(x, Mode::eval);
    for (int b = 0; b < bsz; ++b) {
      const T* src = pred.plane(b, 0);
      float* dst = probs.data.data() + probs.offset(z0 + b, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(src[i]);
    }
  }
  return probs;
}

Volume binarize(const Volume& probs, double threshold) {
  Volume mask(probs.d, probs.h, probs.w, probs.spacing, VolumeKind::mask);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mask.data[i] = static_cast<double>(probs.data[i]) > threshold ? 1.0f : 0.0f;
  }
  return mask;
}

template TrainLog train<float>(ZNet<float>&, AdamState&,
                               const std::vector<SlicePair<float>>&,
                               const TrainConfig&);
template TrainLog train<double>(ZNet<double>&, AdamState&,
                                const std::vector<SlicePair<double>>&,
                                const TrainConfig&);
template Volume predict_probabilities<float>(ZNet<float>&, const Volume&, int);
template Volume predict_probabilities<double>(ZNet<double>&, const Volume&, int);

}  // namespace znet
