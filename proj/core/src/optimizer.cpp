#include "znet/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace znet {

template <typename T>
void adam_step(ParamStore<T>& store, AdamState& state) {
  for (const auto& e : store.entries()) {
    if (e.trainable &&
        (e.grad.size() != e.count() || e.adam_m.size() != e.count() ||
         e.adam_v.size() != e.count())) {
      throw ContractError("adam_step: missing gradient or moment arrays for '" +
                          e.name + "'");
    }
  }
  state.t += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (auto& e : store.entries()) {
    if (!e.trainable) continue;
    for (std::size_t i = 0; i < e.count(); ++i) {
      const double g = static_cast<double>(e.grad[i]);
      const double m = b1 * static_cast<double>(e.adam_m[i]) + (1.0 - b1) * g;
      const double v = b2 * static_cast<double>(e.adam_v[i]) + (1.0 - b2) * g * g;
      e.adam_m[i] = static_cast<T>(m);
      e.adam_v[i] = static_cast<T>(v);
      const double m_hat = m / corr1;
      const double v_hat = v / corr2;
      e.value[i] = static_cast<T>(static_cast<double>(e.value[i]) -
                                  state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
    std::fill(e.grad.begin(), e.grad.end(), T(0));
  }
}

template void adam_step<float>(ParamStore<float>&, AdamState&);
template void adam_step<double>(ParamStore<double>&, AdamState&);

}  // namespace znet
