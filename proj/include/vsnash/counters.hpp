#pragma once

#include <cstdint>

namespace vsnash {

/// Exact work counters owned by a single run. Only that run's loop writes them.
struct SampleCounter {
  std::uint64_t total_samples = 0;
  std::uint64_t prox_evals = 0;
  std::uint64_t comm_rounds = 0;
  std::uint64_t inner_solves = 0;

  bool operator==(const SampleCounter&) const = default;
};

}  // namespace vsnash
