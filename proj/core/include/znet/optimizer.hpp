#pragma once

#include <cstdint>

#include "znet/model.hpp"

namespace znet {

// Adam hyperparameters and the shared step counter.
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update over every trainable entry; gradients are
// zeroed afterwards. Throws ContractError if a trainable entry is missing
// its gradient array.
template <typename T>
void adam_step(ParamStore<T>& store, AdamState& state);

}  // namespace znet
