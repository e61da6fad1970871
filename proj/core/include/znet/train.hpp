#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "znet/dataset.hpp"
#include "znet/loss.hpp"
#include "znet/model.hpp"
#include "znet/optimizer.hpp"
#include "znet/volume.hpp"

namespace znet {

struct TrainConfig {
  int batch_size = 8;
  int epochs = 1;
  std::uint64_t seed = 0;
  bool shuffle = true;
  int checkpoint_every = 1;  // epochs between checkpoints; <= 0: final only
  // Resume position; the shuffle of epoch e depends only on (seed, e), so a
  // run resumed at an epoch boundary continues the original trajectory.
  int start_epoch = 0;
  std::uint64_t start_step = 0;
  std::string out_dir;  // when set: appends train_log.txt, writes checkpoint.znck
  DiceConfig dice;
};

struct TrainLog {
  struct StepRecord {
    std::uint64_t step = 0;
    int epoch = 0;
    double loss = 0.0;
  };
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean;  // per epoch completed in this run
  std::string text;                // exact bytes appended to the log file
};

// Mini-batch loop: per epoch, seeded shuffle, batch, forward (train mode),
// Dice loss, backward, Adam step. Emits `step,epoch,loss` lines plus a
// per-epoch summary line; aborts with NumericError on a non-finite loss.
template <typename T>
TrainLog train(ZNet<T>& model, AdamState& opt, const std::vector<SlicePair<T>>& data,
               const TrainConfig& tc);

// Per-slice eval-mode forward over a whole preprocessed volume, stacked into
// a probability volume.
template <typename T>
Volume predict_probabilities(ZNet<T>& model, const Volume& vol, int batch_size = 8);

// p > threshold -> 1, else 0 (a probability of exactly 0.5 maps to 0).
Volume binarize(const Volume& probs, double threshold = 0.5);

}  // namespace znet
