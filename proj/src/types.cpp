#include "vsnash/types.hpp"

#include <utility>

namespace vsnash {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Contract: return "contract";
    case ErrorCategory::InvalidParameter: return "invalid-parameter";
    case ErrorCategory::NotStronglyMonotone: return "not-strongly-monotone";
    case ErrorCategory::InvalidStep: return "invalid-step";
    case ErrorCategory::NonConvergence: return "non-convergence";
    case ErrorCategory::Divergence: return "divergence";
    case ErrorCategory::NoGeometricMixing: return "no-geometric-mixing";
    case ErrorCategory::Disconnected: return "disconnected-graph";
    case ErrorCategory::InnerSolveFailure: return "inner-solve-failure";
    case ErrorCategory::Config: return "config";
  }
  return "unknown";
}

BlockLayout::BlockLayout(std::vector<Index> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), "layout needs at least one player");
  offsets_.reserve(dims_.size());
  for (Index d : dims_) {
    require(d > 0, "player dimension must be positive");
    offsets_.push_back(total_);
    total_ += d;
  }
}

BlockLayout BlockLayout::scalar(Index players) {
  return BlockLayout(std::vector<Index>(static_cast<std::size_t>(players), 1));
}

StrategyProfile::StrategyProfile(BlockLayout layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  require(values_.size() == layout_.total(),
          "profile length " + std::to_string(values_.size()) +
              " does not match layout dimension " + std::to_string(layout_.total()));
}

StrategyProfile StrategyProfile::zeros(const BlockLayout& layout) {
  return StrategyProfile(layout, Vector::Zero(layout.total()));
}

}  // namespace vsnash
