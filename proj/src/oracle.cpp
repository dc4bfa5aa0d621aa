#include "vsnash/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vsnash {

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t iteration, std::uint64_t player) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(iteration), hi(iteration), lo(player), hi(player),
                    0x5eed5eedu};
  return std::mt19937_64(seq);
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) {
  // splitmix64 finalizer over (seed, r)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (r + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

NoiseModel NoiseModel::zero() { return NoiseModel{}; }

NoiseModel NoiseModel::gaussian(double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu))
    throw Error(ErrorCategory::InvalidParameter, "noise bound nu must be finite and >= 0");
  NoiseModel m;
  m.kind_ = nu > 0.0 ? Kind::Gaussian : Kind::Zero;
  m.nu_ = nu;
  return m;
}

NoiseModel NoiseModel::gaussian_per_player(Vector nu_players) {
  if (!nu_players.allFinite() || (nu_players.array() < 0.0).any())
    throw Error(ErrorCategory::InvalidParameter, "per-player noise bounds must be finite and >= 0");
  NoiseModel m;
  m.kind_ = nu_players.isZero(0.0) ? Kind::Zero : Kind::Gaussian;
  m.nu_players_ = std::move(nu_players);
  return m;
}

Vector NoiseModel::player_nu(const BlockLayout& layout) const {
  if (nu_players_.size() > 0) {
    require(nu_players_.size() == layout.players(), "per-player noise does not match player count");
    return nu_players_;
  }
  Vector out(layout.players());
  for (Index i = 0; i < layout.players(); ++i)
    out(i) = nu_ * std::sqrt(static_cast<double>(layout.dim(i)) / static_cast<double>(layout.total()));
  return out;
}

double NoiseModel::total_nu(const BlockLayout& layout) const {
  if (nu_players_.size() == 0) return nu_;
  return player_nu(layout).norm();
}

Vector NoiseModel::batch_block_noise(const BlockLayout& layout, Index i, std::uint64_t batch,
                                     std::mt19937_64& engine) const {
  const Index d = layout.dim(i);
  if (is_zero()) return Vector::Zero(d);
  const double nu_i = player_nu(layout)(i);
  const double sigma = nu_i / std::sqrt(static_cast<double>(d) * static_cast<double>(batch));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(d);
  for (Index j = 0; j < d; ++j) w(j) = sigma * normal(engine);
  return w;
}

std::uint64_t robust_ceil(double v) {
  if (!std::isfinite(v) || v > 4.0e18)
    throw Error(ErrorCategory::InvalidParameter, "batch size overflow");
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-12 * std::max(1.0, std::abs(v))) v = r;
  const double c = std::ceil(v);
  return c < 1.0 ? 1 : static_cast<std::uint64_t>(c);
}

namespace {
void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " must lie in (0, 1), got " << v;
    throw Error(ErrorCategory::InvalidParameter, os.str());
  }
}
}  // namespace

BatchSchedule BatchSchedule::geometric_pgr(double rho) {
  check_unit_interval(rho, "rho");
  return BatchSchedule(GeometricPgr{rho});
}

BatchSchedule BatchSchedule::geometric_dist(double beta) {
  check_unit_interval(beta, "beta");
  return BatchSchedule(GeometricDist{beta});
}

BatchSchedule BatchSchedule::geometric_pbr(double m_max, double c_r, double eta_br) {
  check_unit_interval(eta_br, "eta_br");
  if (!(m_max > 0.0) || !(c_r > 0.0))
    throw Error(ErrorCategory::InvalidParameter, "M_max and C_r must be positive");
  return BatchSchedule(GeometricPbr{m_max, c_r, eta_br});
}

BatchSchedule BatchSchedule::constant(std::uint64_t m) {
  if (m < 1) throw Error(ErrorCategory::InvalidParameter, "constant batch must be >= 1");
  return BatchSchedule(Constant{m});
}

std::uint64_t BatchSchedule::size(std::uint64_t k) const {
  const double kk = static_cast<double>(k);
  return std::visit(
      [&](const auto& s) -> std::uint64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeometricPgr>) {
          return robust_ceil(std::pow(s.rho, -(kk + 1.0)));
        } else if constexpr (std::is_same_v<T, GeometricDist>) {
          return robust_ceil(std::pow(s.beta, -(kk + 1.0) / 2.0));
        } else if constexpr (std::is_same_v<T, GeometricPbr>) {
          return robust_ceil(s.m_max * s.m_max * s.c_r * s.c_r / std::pow(s.eta_br, 2.0 * kk));
        } else {
          return s.m;
        }
      },
      v_);
}

std::uint64_t BatchSchedule::cumulative(std::uint64_t K) const {
  std::uint64_t total = 0;
  for (std::uint64_t k = 0; k < K; ++k) total += size(k);
  return total;
}

}  // namespace vsnash
