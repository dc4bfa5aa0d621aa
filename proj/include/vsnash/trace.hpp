#pragma once

#include "vsnash/counters.hpp"
#include "vsnash/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace vsnash {

/// State of one run at iterate x_k, before iteration k executes.
struct IterationRecord {
  std::uint64_t k = 0;
  std::uint64_t batch = 0;  // N_k drawn at x_k
  std::uint64_t tau = 0;    // consensus rounds of iteration k (distributed scheme)
  SampleCounter counters;   // work spent to reach x_k
  // ||x_k - x*||^2 for gradient-response schemes, ||x_k - x*|| for best response.
  // NaN when no reference equilibrium was supplied.
  double error = std::numeric_limits<double>::quiet_NaN();
  double consensus_error = std::numeric_limits<double>::quiet_NaN();
  double tracking_gap = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  std::vector<IterationRecord> records;  // k = 0 .. K-1
  StrategyProfile final_profile;         // x_K
  SampleCounter final_counters;
  double final_error = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t iterations() const { return records.size(); }

  /// Errors at x_0 .. x_K (K + 1 values).
  std::vector<double> errors() const {
    std::vector<double> e;
    e.reserve(records.size() + 1);
    for (const auto& r : records) e.push_back(r.error);
    e.push_back(final_error);
    return e;
  }
};

}  // namespace vsnash
