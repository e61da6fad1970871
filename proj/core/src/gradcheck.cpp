#include "znet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "znet/errors.hpp"

namespace znet {

GradCheckReport grad_check(std::span<const GradCheckParam> params,
                           const std::function<double()>& f, double step) {
  GradCheckReport report;
  for (const GradCheckParam& p : params) {
    for (std::size_t i = 0; i < p.count; ++i) {
      const double saved = p.values[i];
      p.values[i] = saved + step;
      const double f_plus = f();
      p.values[i] = saved - step;
      const double f_minus = f();
      p.values[i] = saved;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
        throw ContractError("grad_check: non-finite function value at " + p.name +
                            "[" + std::to_string(i) + "]");
      }
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double analytic = p.analytic[i];
      const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace znet
