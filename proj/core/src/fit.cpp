#include "stark/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stark {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  LineFit fit;
  fit.points = n;
  if (n < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  fit.intercept = my - fit.slope * mx;
  return fit;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(lx, ly);
}

LineFit fit_loglog_envelope(std::span<const double> x, std::span<const double> y, std::size_t window) {
  if (window <= 1) return fit_loglog(x, y);
  std::vector<double> cx;
  std::vector<double> cy;
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t start = 0; start + window <= n; start += window) {
    double peak = 0.0;
    for (std::size_t i = start; i < start + window; ++i) {
      if (std::isfinite(y[i])) peak = std::max(peak, y[i]);
    }
    cx.push_back(std::sqrt(x[start] * x[start + window - 1]));
    cy.push_back(peak);
  }
  return fit_loglog(cx, cy);
}

}  // namespace stark
