#include "vsnash/prox.hpp"

#include <limits>

namespace vsnash {

Regularizer Regularizer::zero() { return Regularizer(ZeroRegularizer{}); }

Regularizer Regularizer::l1(double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorCategory::InvalidParameter, "L1 weight must be >= 0");
  return Regularizer(L1Regularizer{weight});
}

Regularizer Regularizer::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size() && lo.size() > 0, "box bounds must have equal positive length");
  if (!(lo.array() <= hi.array()).all())
    throw Error(ErrorCategory::InvalidParameter, "box requires lo <= hi componentwise");
  if (!lo.allFinite() || !hi.allFinite())
    throw Error(ErrorCategory::InvalidParameter, "box bounds must be finite");
  return Regularizer(BoxIndicator{std::move(lo), std::move(hi)});
}

Regularizer Regularizer::box(Index dim, double lo, double hi) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

double Regularizer::value(const Eigen::Ref<const Vector>& x) const {
  return std::visit(
      [&](const auto& reg) -> double {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, ZeroRegularizer>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, L1Regularizer>) {
          return reg.weight * x.lpNorm<1>();
        } else {
          return contains(x) ? 0.0 : std::numeric_limits<double>::infinity();
        }
      },
      v_);
}

bool Regularizer::contains(const Eigen::Ref<const Vector>& x) const {
  if (const auto* b = as_box()) {
    detail::check_box_dim(*b, x.size());
    return (x.array() >= b->lo.array()).all() && (x.array() <= b->hi.array()).all();
  }
  return true;
}

namespace detail {
void check_box_dim(const BoxIndicator& b, Index n) {
  require(b.lo.size() == n, "box dimension " + std::to_string(b.lo.size()) +
                                " does not match vector dimension " + std::to_string(n));
}
}  // namespace detail

Vector prox_profile(const std::vector<Regularizer>& regs, const BlockLayout& layout,
                    const Eigen::Ref<const Vector>& x, double alpha, SampleCounter* counter) {
  require(static_cast<Index>(regs.size()) == layout.players(),
          "one regularizer per player required");
  require(x.size() == layout.total(), "profile dimension mismatch");
  Vector out(x.size());
  for (Index i = 0; i < layout.players(); ++i)
    layout.block(out, i) = prox_apply(regs[static_cast<std::size_t>(i)], layout.block(x, i), alpha);
  if (counter) ++counter->prox_evals;
  return out;
}

StrategyProfile prox_profile(const std::vector<Regularizer>& regs, const StrategyProfile& x,
                             double alpha, SampleCounter* counter) {
  return StrategyProfile(x.layout(), prox_profile(regs, x.layout(), x.flat(), alpha, counter));
}

}  // namespace vsnash
