#pragma once

#include "vsnash/counters.hpp"
#include "vsnash/types.hpp"

#include <cmath>
#include <type_traits>
#include <variant>
#include <vector>

namespace vsnash {

struct ZeroRegularizer {};

/// lambda * ||x||_1
struct L1Regularizer {
  double weight = 0.0;
};

/// Indicator of the box [lo, hi].
struct BoxIndicator {
  Vector lo;
  Vector hi;
};

/// Closed convex regularizer with a closed-form prox. Construct through the
/// factories below so the invariants (lo <= hi, weight >= 0) are checked.
class Regularizer {
 public:
  using Variant = std::variant<ZeroRegularizer, L1Regularizer, BoxIndicator>;

  Regularizer() = default;

  static Regularizer zero();
  static Regularizer l1(double weight);
  static Regularizer box(Vector lo, Vector hi);
  /// Same scalar bounds on every coordinate of a `dim`-vector.
  static Regularizer box(Index dim, double lo, double hi);

  const Variant& variant() const { return v_; }
  bool is_box() const { return std::holds_alternative<BoxIndicator>(v_); }
  const BoxIndicator* as_box() const { return std::get_if<BoxIndicator>(&v_); }

  /// Value r(x); +inf outside the box for the indicator.
  double value(const Eigen::Ref<const Vector>& x) const;

  /// Whether x lies in dom(r).
  bool contains(const Eigen::Ref<const Vector>& x) const;

 private:
  explicit Regularizer(Variant v) : v_(std::move(v)) {}
  Variant v_{ZeroRegularizer{}};
};

namespace detail {
void check_box_dim(const BoxIndicator& b, Index n);
}

/// prox_{alpha r}(x) = argmin_y r(y) + ||y - x||^2 / (2 alpha).
template <typename Derived>
Vector prox_apply(const Regularizer& r, const Eigen::MatrixBase<Derived>& x, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCategory::InvalidParameter, "prox step must be positive");
  return std::visit(
      [&](const auto& reg) -> Vector {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, ZeroRegularizer>) {
          return x;
        } else if constexpr (std::is_same_v<T, L1Regularizer>) {
          const double t = alpha * reg.weight;
          return x.unaryExpr([t](double v) {
            const double m = std::abs(v) - t;
            return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
          });
        } else {
          detail::check_box_dim(reg, x.size());
          return x.cwiseMax(reg.lo).cwiseMin(reg.hi);
        }
      },
      r.variant());
}

/// Blockwise prox of the separable r(x) = (r_i(x_i))_i. Counts as one
/// proximal evaluation in `counter` whatever the number of players.
Vector prox_profile(const std::vector<Regularizer>& regs, const BlockLayout& layout,
                    const Eigen::Ref<const Vector>& x, double alpha,
                    SampleCounter* counter = nullptr);

StrategyProfile prox_profile(const std::vector<Regularizer>& regs, const StrategyProfile& x,
                             double alpha, SampleCounter* counter = nullptr);

}  // namespace vsnash
