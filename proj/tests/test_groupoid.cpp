#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjpoisson/errors.hpp"
#include "hjpoisson/groupoid.hpp"
#include "test_support.hpp"

using namespace hjpoisson;
using hjpoisson::testing::random_vec;

TEST_CASE("unit fiber") {
  CHECK(source({Vec3::Zero(), Vec3(1, 1, 2)}) == Vec3(1, 1, 2));
  CHECK(target({Vec3::Zero(), Vec3(3, 2, 0)}) == Vec3(3, 2, 0));
  const GroupoidPoint u0 = unit(Vec3::Zero());
  CHECK(u0.x.isZero(0.0));
  CHECK(u0.p.isZero(0.0));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec3 mu = random_vec(rng, 50.0);
    const GroupoidPoint u = unit(mu);
    CHECK(u.x.isZero(0.0));
    CHECK(source(u) == mu);
    CHECK(target(u) == mu);
  }
}

TEST_CASE("axis direction is fixed") {
  const GroupoidPoint g{Vec3(0.3, 0, 0), Vec3(1, 0, 0)};
  CHECK((source(g) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((target(g) - Vec3(1, 0, 0)).norm() < 1e-15);

  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_vec(rng, 3.0);
    const Vec3 p = 1.7 * x;
    CHECK((source({x, p}) - p).norm() < 1e-13 * (1 + p.norm()));
    CHECK((target({x, p}) - p).norm() < 1e-13 * (1 + p.norm()));
  }
}

TEST_CASE("source and target share the Casimir") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const GroupoidPoint g{random_vec(rng, 3.0), random_vec(rng, 5.0)};
    CHECK(std::abs(casimir(source(g)) - casimir(target(g))) < 1e-12 * (1 + casimir(source(g))));
  }
}

TEST_CASE("source is Poisson and target anti-Poisson") {
  std::mt19937_64 rng(14);
  double worst_source = 0.0, worst_target = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupoidPoint g{random_vec(rng, 0.5), random_vec(rng, 3.0)};
    worst_source = std::max(worst_source, pushforward_check(MomentumMap::Source, g, 1e-6));
    worst_target = std::max(worst_target, pushforward_check(MomentumMap::Target, g, 1e-6));
  }
  MESSAGE("pushforward residuals: source " << worst_source << ", target " << worst_target);
  CHECK(worst_source <= 1e-5);
  CHECK(worst_target <= 1e-5);

  for (const Vec3& mu : {Vec3(0, 0, 0), Vec3(1, 1, 2)}) {
    CHECK(pushforward_residual(MomentumMap::Source, unit(mu), momentum_map_jacobian(MomentumMap::Source, unit(mu))) <
          1e-15);
    CHECK(pushforward_residual(MomentumMap::Target, unit(mu), momentum_map_jacobian(MomentumMap::Target, unit(mu))) <
          1e-15);
  }
}

TEST_CASE("swapped assignment fails the pushforward check") {
  // Source checked with the anti-Poisson sign must fail: the check discriminates.
  const GroupoidPoint g{Vec3(0.2, -0.1, 0.3), Vec3(1, 2, -1)};
  const auto jac = momentum_map_jacobian_fd(MomentumMap::Source, g, 1e-6);
  CHECK(pushforward_residual(MomentumMap::Target, g, jac) > 0.1);
}

TEST_CASE("closed-form Jacobian agrees with finite differences, second-order convergence") {
  std::mt19937_64 rng(15);
  for (MomentumMap map : {MomentumMap::Source, MomentumMap::Target}) {
    for (int i = 0; i < 30; ++i) {
      const GroupoidPoint g{random_vec(rng, 2.5), random_vec(rng, 3.0)};
      const MomentumJacobian exact = momentum_map_jacobian(map, g);
      CHECK((momentum_map_jacobian_fd(map, g, 1e-6) - exact).cwiseAbs().maxCoeff() < 1e-7);
      const double e1 = (momentum_map_jacobian_fd(map, g, 2e-2) - exact).cwiseAbs().maxCoeff();
      const double e2 = (momentum_map_jacobian_fd(map, g, 1e-2) - exact).cwiseAbs().maxCoeff();
      const double ratio = e1 / e2;
      CHECK(ratio > 3.5);
      CHECK(ratio < 4.5);
    }
  }
}

TEST_CASE("chart violations are reported") {
  const GroupoidPoint g{Vec3(0, 0, 3.2), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(source(g), ChartViolation);
  CHECK_THROWS_AS(target(g), ChartViolation);
  CHECK_THROWS_AS(pushforward_check(MomentumMap::Source, g, 1e-6), ChartViolation);
}
