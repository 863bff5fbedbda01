#include "hjpoisson/lie_poisson.hpp"

#include "hjpoisson/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace hjpoisson {

namespace {

// Derivatives of the dexp coefficients lose ~eps/t^4 in closed form; the series is
// used below this angle.
constexpr double kDerivativeSeriesThreshold = 5e-2;

void require_chart(const Vec3& x, const char* where) {
  const double n = x.norm();
  if (!(n < kChartRadius)) throw ChartViolation(where, n);
}

// alpha = (1 - cos t)/t^2, beta = (t - sin t)/t^3.
void dexp_coefficients(double theta, double& alpha, double& beta) {
  if (theta < kDexpSeriesThreshold) {
    const double t2 = theta * theta;
    const double t4 = t2 * t2;
    alpha = 0.5 - t2 / 24.0 + t4 / 720.0;
    beta = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    return;
  }
  const double t2 = theta * theta;
  const double half_sin = std::sin(0.5 * theta);
  alpha = 2.0 * half_sin * half_sin / t2;
  beta = (theta - std::sin(theta)) / (t2 * theta);
}

// alpha'(t)/t and beta'(t)/t.
void dexp_coefficient_slopes(double theta, double& dalpha, double& dbeta) {
  const double t2 = theta * theta;
  if (theta < kDerivativeSeriesThreshold) {
    const double t4 = t2 * t2;
    const double t6 = t4 * t2;
    dalpha = -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0 + t6 / 453600.0;
    dbeta = -1.0 / 60.0 + t2 / 1260.0 - t4 / 60480.0 + t6 / 4989600.0;
    return;
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double t4 = t2 * t2;
  dalpha = (theta * s - 2.0 * (1.0 - c)) / t4;
  dbeta = (theta * (1.0 - c) - 3.0 * (theta - s)) / (t4 * theta);
}

}  // namespace

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 exp_so3(const Vec3& x) {
  require_chart(x, "exp_so3");
  const double theta = x.norm();
  const Mat3 k = hat(x);
  double a, b;
  if (theta < kDexpSeriesThreshold) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    a = std::sin(theta) / theta;
    b = 2.0 * half_sin * half_sin / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Mat3 dexp(const Vec3& x) {
  require_chart(x, "dexp");
  double alpha, beta;
  dexp_coefficients(x.norm(), alpha, beta);
  const Mat3 k = hat(x);
  return Mat3::Identity() + alpha * k + beta * k * k;
}

Mat3 dexp_apply_derivative(const Vec3& x, const Vec3& v) {
  require_chart(x, "dexp_apply_derivative");
  const double theta = x.norm();
  double alpha, beta, dalpha, dbeta;
  dexp_coefficients(theta, alpha, beta);
  dexp_coefficient_slopes(theta, dalpha, dbeta);
  const Vec3 xv = x.cross(v);
  const Vec3 xxv = x.cross(xv);
  Mat3 d = dalpha * xv * x.transpose() - alpha * hat(v) + dbeta * xxv * x.transpose();
  d += beta * (x.dot(v) * Mat3::Identity() + x * v.transpose() - 2.0 * v * x.transpose());
  return d;
}

QuadraticHamiltonian::QuadraticHamiltonian() : QuadraticHamiltonian(Vec3(1.5, 2.0, 2.5)) {}

QuadraticHamiltonian::QuadraticHamiltonian(const Vec3& inertia) : inertia_(inertia) {
  if (!(inertia.minCoeff() > 0.0) || !inertia.allFinite())
    throw std::invalid_argument("QuadraticHamiltonian: inertia must be positive and finite");
}

double QuadraticHamiltonian::value(const AlgebraDualPoint& mu) const {
  return 0.5 * (mu.x() * mu.x() / inertia_.x() + mu.y() * mu.y() / inertia_.y() +
                mu.z() * mu.z() / inertia_.z());
}

Vec3 QuadraticHamiltonian::gradient(const AlgebraDualPoint& mu) const {
  return mu.cwiseQuotient(inertia_);
}

double casimir(const AlgebraDualPoint& mu) { return 0.5 * mu.squaredNorm(); }

Mat3 lie_poisson_bivector(const AlgebraDualPoint& mu) { return hat(mu); }

Vec3 euler_rhs(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu) {
  return h.gradient(mu).cross(mu);
}

void TrajectoryRecord::append(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu) {
  states.push_back(mu);
  hamiltonian_values.push_back(h.value(mu));
  casimir_values.push_back(casimir(mu));
}

AlgebraDualPoint rk4_step(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu, double dt) {
  const Vec3 k1 = euler_rhs(h, mu);
  const Vec3 k2 = euler_rhs(h, mu + 0.5 * dt * k1);
  const Vec3 k3 = euler_rhs(h, mu + 0.5 * dt * k2);
  const Vec3 k4 = euler_rhs(h, mu + dt * k3);
  return mu + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryRecord rk4_rollout(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu0, double dt,
                             int n) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_rollout: dt must be positive");
  if (n < 0) throw std::invalid_argument("rk4_rollout: negative step count");
  TrajectoryRecord rec;
  rec.step_size = dt;
  rec.states.reserve(static_cast<std::size_t>(n) + 1);
  AlgebraDualPoint mu = mu0;
  rec.append(h, mu);
  for (int k = 0; k < n; ++k) {
    mu = rk4_step(h, mu, dt);
    rec.append(h, mu);
  }
  return rec;
}

}  // namespace hjpoisson
