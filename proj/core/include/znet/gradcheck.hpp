#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

namespace znet {

// One flat coordinate block to verify: the live values the function reads,
// and the analytic gradient computed beforehand by a backward pass.
struct GradCheckParam {
  std::string name;
  double* values = nullptr;
  const double* analytic = nullptr;
  std::size_t count = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central finite differences against analytic gradients, 64-bit only.
// Perturbs every coordinate by +-step (default 1e-5) and compares
// (f(x+h) - f(x-h)) / 2h with the analytic entry using the relative error
// |a - b| / max(1, |a|, |b|). Throws ContractError if f evaluates non-finite.
GradCheckReport grad_check(std::span<const GradCheckParam> params,
                           const std::function<double()>& f,
                           double step = 1e-5);

}  // namespace znet
