#pragma once

#include <cstddef>
#include <span>

namespace stark {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept. NaN slope for < 2 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares of log y against log x, skipping non-positive or
/// non-finite entries.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// fit_loglog of the upper envelope: consecutive blocks of `window` points
/// are replaced by their maximum (placed at the block's geometric centre).
LineFit fit_loglog_envelope(std::span<const double> x, std::span<const double> y, std::size_t window);

}  // namespace stark
