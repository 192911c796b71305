#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eda {

/// y = coefficient * x^exponent fitted by least squares on (log x, log y).
struct PowerLawFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_squared = 0.0;
  double stderr_exponent = 0.0;
  std::size_t points = 0;
};

inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
  const auto n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : pts) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_power_law: points must be strictly positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    const double dx = std::log(x) - mx;
    const double dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: x values must not all coincide");

  PowerLawFit fit;
  fit.points = pts.size();
  fit.exponent = sxy / sxx;
  fit.coefficient = std::exp(my - fit.exponent * mx);
  double sse = 0.0;
  for (const auto& [x, y] : pts) {
    const double resid = std::log(y) - (my + fit.exponent * (std::log(x) - mx));
    sse += resid * resid;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  fit.stderr_exponent = std::sqrt(std::max(0.0, sse / (n - 2.0)) / sxx);
  return fit;
}

}  // namespace eda
