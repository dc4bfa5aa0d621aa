#pragma once

#include "vsnash/counters.hpp"
#include "vsnash/game.hpp"
#include "vsnash/types.hpp"

#include <cstdint>
#include <random>
#include <variant>

namespace vsnash {

/// Independent engine for the named stream (seed, iteration, player). Streams
/// never depend on the order in which players or iterations are visited.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t iteration, std::uint64_t player);

/// Seed of replication `r` derived from an experiment seed.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r);

/// Additive zero-mean noise on the concatenated gradient.
///
/// Gaussian noise is isotropic within each player block with E||w_i||^2 = nu_i^2
/// exactly. The average of `batch` i.i.d. draws is again Gaussian with
/// E||w_i||^2 = nu_i^2 / batch, and it is sampled from that law directly.
class NoiseModel {
 public:
  enum class Kind { Zero, Gaussian };

  static NoiseModel zero();
  /// Total bound nu spread evenly over all coordinates: nu_i^2 = nu^2 n_i / n.
  static NoiseModel gaussian(double nu);
  /// Per-player bounds nu_i.
  static NoiseModel gaussian_per_player(Vector nu_players);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }

  /// nu_i for every player of `layout`.
  Vector player_nu(const BlockLayout& layout) const;
  /// nu with nu^2 = sum_i nu_i^2.
  double total_nu(const BlockLayout& layout) const;

  /// Mean of `batch` draws of player i's noise.
  Vector batch_block_noise(const BlockLayout& layout, Index i, std::uint64_t batch,
                           std::mt19937_64& engine) const;

 private:
  Kind kind_ = Kind::Zero;
  double nu_ = 0.0;
  Vector nu_players_;
};

/// Deterministic batch-size rule k -> N_k.
class BatchSchedule {
 public:
  struct GeometricPgr { double rho; };                         // ceil(rho^-(k+1))
  struct GeometricDist { double beta; };                       // ceil(beta^-(k+1)/2)
  struct GeometricPbr { double m_max, c_r, eta_br; };          // ceil(M^2 C_r^2 / eta^2k)
  struct Constant { std::uint64_t m; };
  using Variant = std::variant<GeometricPgr, GeometricDist, GeometricPbr, Constant>;

  static BatchSchedule geometric_pgr(double rho);
  static BatchSchedule geometric_dist(double beta);
  static BatchSchedule geometric_pbr(double m_max, double c_r, double eta_br);
  static BatchSchedule constant(std::uint64_t m);

  const Variant& variant() const { return v_; }

  /// N_k; throws InvalidParameter when the value does not fit in 63 bits.
  std::uint64_t size(std::uint64_t k) const;

  /// sum_{k=0}^{K-1} N_k.
  std::uint64_t cumulative(std::uint64_t K) const;

 private:
  explicit BatchSchedule(Variant v) : v_(v) {}
  Variant v_;
};

inline std::uint64_t schedule_size(const BatchSchedule& s, std::uint64_t k) { return s.size(k); }

/// ceil(v), snapping values within 1e-12 relative of an integer onto it so
/// that e.g. 0.5^-5 is 32 and not 33.
std::uint64_t robust_ceil(double v);

/// G(x) + w_bar with w_bar the mean of `batch` noise draws from the streams
/// (seed, iteration, i). Adds `batch` to counter.total_samples.
template <typename Game>
Vector sample_batch_gradient(const Game& game, const Eigen::Ref<const Vector>& x,
                             std::uint64_t batch, const NoiseModel& noise, std::uint64_t seed,
                             std::uint64_t iteration, SampleCounter* counter = nullptr) {
  require(batch >= 1, "batch size must be at least 1");
  Vector g = game.gradient(x);
  if (!noise.is_zero()) {
    const BlockLayout& layout = game.layout();
    for (Index i = 0; i < layout.players(); ++i) {
      auto eng = stream_engine(seed, iteration, static_cast<std::uint64_t>(i));
      layout.block(g, i) += noise.batch_block_noise(layout, i, batch, eng);
    }
  }
  if (counter) counter->total_samples += batch;
  return g;
}

}  // namespace vsnash
