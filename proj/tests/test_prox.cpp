#include "vsnash/prox.hpp"

#include <doctest.h>

#include <random>

using namespace vsnash;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector random_vector(std::mt19937_64& eng, Index n, double scale = 3.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(eng);
  return v;
}

}  // namespace

TEST_CASE("prox_apply closed forms") {
  CHECK((prox_apply(Regularizer::l1(1.0), vec({2.0, -0.3}), 0.5) - vec({1.5, 0.0})).norm() == 0.0);
  const Regularizer box = Regularizer::box(vec({0, 0}), vec({1, 1}));
  for (double alpha : {0.01, 1.0, 100.0})
    CHECK((prox_apply(box, vec({1.7, -0.2}), alpha) - vec({1.0, 0.0})).norm() == 0.0);
  CHECK((prox_apply(Regularizer::zero(), vec({3.1, 4.2}), 7.0) - vec({3.1, 4.2})).norm() == 0.0);
}

TEST_CASE("prox_apply rejects bad input") {
  CHECK_THROWS_AS(prox_apply(Regularizer::zero(), vec({1.0}), 0.0), Error);
  CHECK_THROWS_AS(prox_apply(Regularizer::box(vec({0, 0}), vec({1, 1})), vec({1.0}), 1.0), Error);
  CHECK_THROWS_AS(Regularizer::box(vec({1}), vec({0})), Error);
  CHECK_THROWS_AS(Regularizer::l1(-1.0), Error);
}

TEST_CASE("prox_profile applies blockwise and counts one evaluation") {
  const BlockLayout layout = BlockLayout::scalar(2);
  SampleCounter counter;

  const std::vector<Regularizer> zeros(2, Regularizer::zero());
  CHECK(prox_profile(zeros, layout, vec({0.3, -7.0}), 0.4, &counter) == vec({0.3, -7.0}));

  const std::vector<Regularizer> boxes(2, Regularizer::box(1, 0.0, 1.0));
  CHECK(prox_profile(boxes, layout, vec({2.0, -1.0}), 0.3, &counter) == vec({1.0, 0.0}));

  const std::vector<Regularizer> mixed{Regularizer::zero(), Regularizer::l1(1.0)};
  CHECK(prox_profile(mixed, layout, vec({5.0, 0.4}), 0.5, &counter) == vec({5.0, 0.0}));
  CHECK(counter.prox_evals == 3);

  // Ten players still count as a single composite evaluation.
  const BlockLayout big = BlockLayout::scalar(10);
  SampleCounter c2;
  prox_profile(std::vector<Regularizer>(10, Regularizer::l1(0.1)), big, Vector::Ones(10), 1.0, &c2);
  CHECK(c2.prox_evals == 1);
}

TEST_CASE("prox is nonexpansive for every variant") {
  std::mt19937_64 eng(11);
  const Index n = 6;
  const std::vector<Regularizer> regs{
      Regularizer::zero(), Regularizer::l1(0.7),
      Regularizer::box(n, -0.5, 1.5)};
  for (const auto& r : regs) {
    for (int t = 0; t < 500; ++t) {
      const Vector x = random_vector(eng, n), y = random_vector(eng, n);
      const double alpha = std::uniform_real_distribution<double>(0.01, 5.0)(eng);
      CHECK((prox_apply(r, x, alpha) - prox_apply(r, y, alpha)).norm() <= (x - y).norm() + 1e-15);
    }
  }
}

TEST_CASE("box prox is idempotent on feasible points") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const Regularizer box = Regularizer::box(4, -1.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    Vector x(4);
    for (Index i = 0; i < 4; ++i) x(i) = u(eng);
    CHECK(prox_apply(box, x, 0.3) == x);
    CHECK(box.contains(x));
  }
}

TEST_CASE("L1 prox satisfies the subgradient optimality condition") {
  std::mt19937_64 eng(3);
  const double lambda = 0.8;
  const Regularizer r = Regularizer::l1(lambda);
  for (int t = 0; t < 200; ++t) {
    const Vector x = random_vector(eng, 5, 1.0);
    const double alpha = std::uniform_real_distribution<double>(0.05, 2.0)(eng);
    const Vector y = prox_apply(r, x, alpha);
    // 0 in lambda * d|y_j| + (y_j - x_j) / alpha, coordinatewise.
    for (Index j = 0; j < 5; ++j) {
      const double g = -(y(j) - x(j)) / alpha;  // must be a subgradient of lambda |.| at y_j
      if (y(j) > 0.0) CHECK(std::abs(g - lambda) <= 1e-12);
      else if (y(j) < 0.0) CHECK(std::abs(g + lambda) <= 1e-12);
      else CHECK(std::abs(g) <= lambda + 1e-12);
    }
  }
}

TEST_CASE("prox works on Eigen expressions") {
  const Vector a = vec({1.0, -2.0});
  const Vector out = prox_apply(Regularizer::l1(1.0), 2.0 * a, 0.5);
  CHECK(out == vec({1.5, -3.5}));
}

TEST_CASE("regularizer value and domain") {
  const Regularizer box = Regularizer::box(2, 0.0, 1.0);
  CHECK(box.value(vec({0.5, 0.5})) == 0.0);
  CHECK(std::isinf(box.value(vec({1.5, 0.5}))));
  CHECK(Regularizer::l1(2.0).value(vec({1.0, -3.0})) == doctest::Approx(8.0));
  CHECK(Regularizer::zero().contains(vec({1e30})));
}
