#include "vsnash/rate_fit.hpp"

#include "vsnash/types.hpp"

#include <algorithm>
#include <cmath>

namespace vsnash {

RateFit fit_linear_rate(const std::vector<double>& errors, std::size_t k_lo, std::size_t k_hi) {
  if (k_hi < k_lo) throw Error(ErrorCategory::InvalidParameter, "fit window is empty");
  RateFit fit;
  std::vector<double> ks, ys;
  const std::size_t hi = std::min(k_hi, errors.empty() ? 0 : errors.size() - 1);
  for (std::size_t k = k_lo; k <= hi && k < errors.size(); ++k) {
    if (errors[k] > 0.0 && std::isfinite(errors[k])) {
      ks.push_back(static_cast<double>(k));
      ys.push_back(std::log(errors[k]));
    } else {
      ++fit.dropped;
    }
  }
  fit.points = ks.size();
  if (fit.points < 3)
    throw Error(ErrorCategory::InvalidParameter, "rate fit needs at least 3 positive points");

  const Eigen::Map<const Vector> kv(ks.data(), static_cast<Index>(ks.size()));
  const Eigen::Map<const Vector> yv(ys.data(), static_cast<Index>(ys.size()));
  const double kbar = kv.mean();
  const double ybar = yv.mean();
  const double sxx = (kv.array() - kbar).square().sum();
  const double sxy = ((kv.array() - kbar) * (yv.array() - ybar)).sum();
  const double syy = (yv.array() - ybar).square().sum();
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * kbar;
  const double sse = ((yv.array() - fit.intercept - fit.slope * kv.array())).square().sum();
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.slope_stderr = std::sqrt(std::max(sse, 0.0) / static_cast<double>(fit.points - 2) / sxx);
  return fit;
}

}  // namespace vsnash
