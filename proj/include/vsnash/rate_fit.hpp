#pragma once

#include <cstddef>
#include <vector>

namespace vsnash {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
  std::size_t dropped = 0;  // non-positive errors skipped in the window
};

/// Least-squares fit of ln(errors[k]) = intercept + slope * k over
/// k in [k_lo, k_hi] (clipped to the sequence). Non-positive entries are
/// skipped and counted in `dropped`; fewer than 3 usable points is an error.
RateFit fit_linear_rate(const std::vector<double>& errors, std::size_t k_lo, std::size_t k_hi);

}  // namespace vsnash
