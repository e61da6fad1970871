#pragma once

#include <vector>

#include "znet/tensor.hpp"

namespace znet {

struct DiceConfig {
  double smooth = 1.0;  // keeps the denominator positive when both are empty
};

struct DiceResult {
  std::vector<double> per_item;
  double mean = 0.0;
};

// Soft Dice loss per batch item:
//   1 - (2 * sum(z*y) + s) / (sum(z) + sum(y) + s)
// z holds predictions in [0, 1], y a binary mask; the batch loss is the mean
// over items. Non-binary y raises ContractError.
template <typename T>
DiceResult dice_loss(const Tensor4<T>& z, const Tensor4<T>& y,
                     const DiceConfig& cfg = {});

// Analytic gradient of the mean Dice loss w.r.t. z.
template <typename T>
Tensor4<T> dice_loss_backward(const Tensor4<T>& z, const Tensor4<T>& y,
                              const DiceConfig& cfg = {});

}  // namespace znet
