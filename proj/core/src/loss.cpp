#include "znet/loss.hpp"

#include <cmath>
#include <string>

namespace znet {

namespace {

template <typename T>
void check_dice_inputs(const Tensor4<T>& z, const Tensor4<T>& y,
                       const DiceConfig& cfg) {
  if (!z.same_shape(y)) {
    throw ShapeError("dice_loss: prediction " + z.shape_str() + " vs mask " +
                     y.shape_str());
  }
  if (cfg.smooth < 0.0) {
    throw ConfigError("dice smoothing must be >= 0");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.data[i] != T(0) && y.data[i] != T(1)) {
      throw ContractError("dice_loss: mask is not binary at flat index " +
                          std::to_string(i));
    }
  }
}

}  // namespace

template <typename T>
DiceResult dice_loss(const Tensor4<T>& z, const Tensor4<T>& y, const DiceConfig& cfg) {
  check_dice_inputs(z, y, cfg);
  DiceResult res;
  res.per_item.reserve(z.n);
  const std::size_t item = static_cast<std::size_t>(z.c) * z.h * z.w;
  double total = 0.0;
  for (int in = 0; in < z.n; ++in) {
    const T* zp = z.data.data() + static_cast<std::size_t>(in) * item;
    const T* yp = y.data.data() + static_cast<std::size_t>(in) * item;
    double inter = 0.0, sum_z = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < item; ++i) {
      inter += static_cast<double>(zp[i]) * static_cast<double>(yp[i]);
      sum_z += static_cast<double>(zp[i]);
      sum_y += static_cast<double>(yp[i]);
    }
    const double den = sum_z + sum_y + cfg.smooth;
    if (den == 0.0) {
      throw ContractError("dice_loss: empty prediction and mask require s > 0");
    }
    const double loss = 1.0 - (2.0 * inter + cfg.smooth) / den;
    res.per_item.push_back(loss);
    total += loss;
  }
  res.mean = total / static_cast<double>(z.n);
  return res;
}

template <typename T>
Tensor4<T> dice_loss_backward(const Tensor4<T>& z, const Tensor4<T>& y,
                              const DiceConfig& cfg) {
  check_dice_inputs(z, y, cfg);
  Tensor4<T> grad = Tensor4<T>::like(z);
  const std::size_t item = static_cast<std::size_t>(z.c) * z.h * z.w;
  const double inv_n = 1.0 / static_cast<double>(z.n);
  for (int in = 0; in < z.n; ++in) {
    const T* zp = z.data.data() + static_cast<std::size_t>(in) * item;
    const T* yp = y.data.data() + static_cast<std::size_t>(in) * item;
    T* gp = grad.data.data() + static_cast<std::size_t>(in) * item;
    double inter = 0.0, sum_z = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < item; ++i) {
      inter += static_cast<double>(zp[i]) * static_cast<double>(yp[i]);
      sum_z += static_cast<double>(zp[i]);
      sum_y += static_cast<double>(yp[i]);
    }
    const double num = 2.0 * inter + cfg.smooth;
    const double den = sum_z + sum_y + cfg.smooth;
    if (den == 0.0) {
      throw ContractError("dice_loss: empty prediction and mask require s > 0");
    }
    // d/dz_j [1 - num/den] = -(2*y_j*den - num) / den^2
    const double inv_den2 = 1.0 / (den * den);
    for (std::size_t i = 0; i < item; ++i) {
      const double g =
          -(2.0 * static_cast<double>(yp[i]) * den - num) * inv_den2;
      gp[i] = static_cast<T>(g * inv_n);
    }
  }
  return grad;
}

template DiceResult dice_loss<float>(const Tensor4<float>&, const Tensor4<float>&,
                                     const DiceConfig&);
template DiceResult dice_loss<double>(const Tensor4<double>&, const Tensor4<double>&,
                                      const DiceConfig&);
template Tensor4<float> dice_loss_backward<float>(const Tensor4<float>&,
                                                  const Tensor4<float>&,
                                                  const DiceConfig&);
template Tensor4<double> dice_loss_backward<double>(const Tensor4<double>&,
                                                    const Tensor4<double>&,
                                                    const DiceConfig&);

}  // namespace znet
