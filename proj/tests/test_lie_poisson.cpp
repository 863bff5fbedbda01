#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjpoisson/errors.hpp"
#include "hjpoisson/lie_poisson.hpp"
#include "test_support.hpp"

#include <numbers>

using namespace hjpoisson;
using hjpoisson::testing::random_vec;

TEST_CASE("hat") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));
  Mat3 e3;
  e3 << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  CHECK(hat(Vec3(0, 0, 1)) == e3);
  const Vec3 v(1, 2, 3);
  CHECK((hat(v) * v).isZero(0.0));

  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = random_vec(rng, 5), b = random_vec(rng, 5);
    CHECK((hat(a) * b - a.cross(b)).norm() < 1e-14);
    CHECK((hat(a) * b + hat(b) * a).norm() < 1e-13);
    CHECK((hat(a) + hat(a).transpose()).isZero(0.0));
    CHECK((hat(2.0 * a + b) - (2.0 * hat(a) + hat(b))).norm() < 1e-14);
  }
}

TEST_CASE("exp_so3") {
  CHECK(exp_so3(Vec3::Zero()) == Mat3::Identity());
  Mat3 quarter;
  quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((exp_so3(Vec3(0, 0, std::numbers::pi / 2)) - quarter).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = exp_so3(random_vec(rng, kChartRadius));
    CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(exp_so3(Vec3(std::numbers::pi, 0, 0)), ChartViolation);
}

TEST_CASE("dexp basic values") {
  CHECK(dexp(Vec3::Zero()) == Mat3::Identity());
  const Vec3 x(0.3, 0, 0);
  CHECK((dexp(x) * x - x).norm() < 1e-16);
  CHECK_THROWS_AS(dexp(Vec3(0, 4, 0)), ChartViolation);
}

TEST_CASE("dexp relates chart velocity to left-translated velocity") {
  // exp(y(s)) = exp(s xi) exp(x)  =>  J(x) y'(0) = xi.
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_vec(rng, 1.0);
    const Vec3 xi = random_vec(rng, 1.0);
    const Mat3 rx = exp_so3(x);
    const double eps = 1e-4;
    Vec3 yprime;
    for (int c = 0; c < 3; ++c) {
      auto y = [&](double s) { return hjpoisson::testing::log_so3(exp_so3(s * xi) * rx)[c]; };
      yprime[c] = hjpoisson::testing::derivative5(y, 0.0, eps);
    }
    worst = std::max(worst, (dexp(x) * yprime - xi).cwiseAbs().maxCoeff());
  }
  MESSAGE("dexp finite-difference residual " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("dexp series and closed form agree around the switch") {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vec3 dir = random_vec(rng, 1.0).normalized();
    const double theta = kDexpSeriesThreshold * std::pow(10.0, -0.5 + i / 200.0);
    const Vec3 x = theta * dir;
    worst = std::max(worst, (dexp(x) - hjpoisson::testing::dexp_closed_form(x)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("dexp_apply_derivative matches finite differences") {
  std::mt19937_64 rng(5);
  for (double radius : {1e-6, 1e-3, 0.04, 0.06, 0.5, 2.0, 3.0}) {
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = radius * random_vec(rng, 1.0).normalized();
      const Vec3 v = random_vec(rng, 2.0);
      const Mat3 d = dexp_apply_derivative(x, v);
      for (int c = 0; c < 3; ++c) {
        auto f = [&](int row) {
          return [&, row](double s) {
            Vec3 xs = x;
            xs[c] += s;
            return (dexp(xs) * v)[row];
          };
        };
        for (int row = 0; row < 3; ++row) {
          const double fd = hjpoisson::testing::derivative5(f(row), 0.0, 1e-3);
          CHECK(std::abs(fd - d(row, c)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("Hamiltonian values") {
  const QuadraticHamiltonian h;
  auto [h0, g0] = h.eval(Vec3::Zero());
  CHECK(h0 == 0.0);
  CHECK(g0.isZero(0.0));

  auto [h1, g1] = h.eval(Vec3(1, 1, 2));
  CHECK(h1 == doctest::Approx(0.5 * (1 / 1.5 + 1 / 2.0 + 4 / 2.5)).epsilon(1e-15));
  CHECK(h1 == doctest::Approx(1.3833333333333333).epsilon(1e-14));
  CHECK((g1 - Vec3(2.0 / 3.0, 0.5, 0.8)).norm() < 1e-15);

  auto [h2, g2] = h.eval(Vec3(3, 2, 0));
  CHECK(h2 == doctest::Approx(4.0).epsilon(1e-15));
  CHECK((g2 - Vec3(2, 1, 0)).norm() < 1e-15);

  CHECK_THROWS_AS(QuadraticHamiltonian(Vec3(1, 0, 1)), std::invalid_argument);
}

TEST_CASE("casimir and Lie-Poisson bivector") {
  CHECK(casimir(Vec3::Zero()) == 0.0);
  CHECK(casimir(Vec3(1, 1, 2)) == 3.0);
  CHECK(lie_poisson_bivector(Vec3::Zero()).isZero(0.0));
  const Mat3 pi = lie_poisson_bivector(Vec3(0, 0, 1));
  CHECK(pi(0, 1) == -1.0);
  CHECK(pi(1, 0) == 1.0);
  CHECK(pi.row(2).isZero(0.0));
  CHECK(pi.col(2).isZero(0.0));

  const QuadraticHamiltonian h;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 mu = random_vec(rng, 10.0);
    const Mat3 b = lie_poisson_bivector(mu);
    CHECK((b + b.transpose()).isZero(0.0));
    // grad C = mu.
    CHECK((b * mu).norm() <= 1e-14 * mu.squaredNorm());
    CHECK(std::abs(mu.dot(euler_rhs(h, mu))) <= 1e-14 * mu.norm() * euler_rhs(h, mu).norm() + 1e-300);
  }
}

TEST_CASE("euler_rhs") {
  const QuadraticHamiltonian h;
  CHECK(euler_rhs(h, Vec3(1, 0, 0)).isZero(0.0));
  CHECK((euler_rhs(h, Vec3(1, 1, 0)) - Vec3(0, 0, 1.0 / 6.0)).norm() < 1e-15);
  // X_H(g) = Pi(dH, dg).
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Vec3 mu = random_vec(rng, 10.0);
    const Vec3 rhs = euler_rhs(h, mu);
    const Vec3 g = h.gradient(mu);
    CHECK((rhs - lie_poisson_bivector(mu).transpose() * g).norm() <= 1e-13 * (1 + rhs.norm()));
    const double scale = rhs.norm() * std::max(mu.norm(), g.norm());
    CHECK(std::abs(g.dot(rhs)) <= 1e-14 * scale);
    CHECK(std::abs(mu.dot(rhs)) <= 1e-14 * scale);
  }
}

TEST_CASE("rk4_rollout") {
  const QuadraticHamiltonian h;
  const auto empty = rk4_rollout(h, Vec3(1, 1, 2), 0.1, 0);
  REQUIRE(empty.size() == 1);
  CHECK(empty.states[0] == Vec3(1, 1, 2));

  const auto axis = rk4_rollout(h, Vec3(0, 2, 0), 0.37, 50);
  for (const auto& s : axis.states) CHECK(s == Vec3(0, 2, 0));

  const auto run = rk4_rollout(h, Vec3(1, 1, 2), 1e-3, 1000);
  REQUIRE(run.size() == 1001);
  CHECK(std::abs(run.hamiltonian_values.back() - run.hamiltonian_values.front()) <= 1e-9);
  for (std::size_t k = 0; k < run.size(); ++k) {
    CHECK(run.hamiltonian_values[k] == h.value(run.states[k]));
    CHECK(run.casimir_values[k] == casimir(run.states[k]));
  }
  CHECK_THROWS_AS(rk4_rollout(h, Vec3(1, 1, 2), 0.0, 3), std::invalid_argument);
}
