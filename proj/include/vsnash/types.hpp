#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsnash {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCategory {
  Contract,             // dimension mismatch, index out of range
  InvalidParameter,     // parameter outside its admissible range
  NotStronglyMonotone,  // game rejected by the monotonicity validator
  InvalidStep,          // step size outside (0, 2 eta / L^2) or similar
  NonConvergence,       // deterministic oracle ran out of iterations
  Divergence,           // non-finite iterate
  NoGeometricMixing,    // beta >= 1
  Disconnected,         // communication graph not connected
  InnerSolveFailure,    // best-response subproblem did not converge
  Config,               // malformed experiment configuration
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

/// Throws Error(Contract) with `what` unless `cond`.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCategory::Contract, what);
}

/// Per-player block structure of a concatenated strategy vector.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<Index> dims);

  /// N scalar players.
  static BlockLayout scalar(Index players);

  Index players() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index i) const { return dims_.at(static_cast<std::size_t>(i)); }
  Index offset(Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }
  Index total() const { return total_; }
  const std::vector<Index>& dims() const { return dims_; }

  template <typename Derived>
  auto block(Eigen::MatrixBase<Derived>& x, Index i) const {
    return x.segment(offset(i), dim(i));
  }
  template <typename Derived>
  auto block(const Eigen::MatrixBase<Derived>& x, Index i) const {
    return x.segment(offset(i), dim(i));
  }

  bool operator==(const BlockLayout& o) const { return dims_ == o.dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
  Index total_ = 0;
};

/// Concatenated player decisions x = (x_1, ..., x_N).
class StrategyProfile {
 public:
  StrategyProfile() = default;
  StrategyProfile(BlockLayout layout, Vector values);

  static StrategyProfile zeros(const BlockLayout& layout);

  const BlockLayout& layout() const { return layout_; }
  const Vector& flat() const { return values_; }
  Vector& flat() { return values_; }

  Index players() const { return layout_.players(); }
  Vector block(Index i) const { return layout_.block(values_, i); }

 private:
  BlockLayout layout_;
  Vector values_;
};

}  // namespace vsnash
