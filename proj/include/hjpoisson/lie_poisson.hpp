#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace hjpoisson {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point mu of so*(3), identified with R^3.
using AlgebraDualPoint = Vec3;

/// Largest rotation-vector norm accepted by the exponential chart.
inline constexpr double kChartRadius = 3.14159265358979323846 - 1e-6;

/// Below this angle dexp switches to its Taylor expansion.
inline constexpr double kDexpSeriesThreshold = 1e-4;

/// Skew matrix with hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Rodrigues formula. Throws ChartViolation for |x| >= kChartRadius.
Mat3 exp_so3(const Vec3& x);

/// Left-trivialized differential of exp:
///   J(x) = I + (1 - cos t)/t^2 hat(x) + (t - sin t)/t^3 hat(x)^2,  t = |x|.
/// exp(x + d) = exp(J(x) d) exp(x) to first order in d.
Mat3 dexp(const Vec3& x);

/// Derivative of x -> dexp(x) * v, as a 3x3 matrix acting on dx.
Mat3 dexp_apply_derivative(const Vec3& x, const Vec3& v);

/// H(mu) = 1/2 sum mu_i^2 / I_i on so*(3).
class QuadraticHamiltonian {
 public:
  /// Default inertia (1.5, 2, 2.5).
  QuadraticHamiltonian();
  explicit QuadraticHamiltonian(const Vec3& inertia);

  const Vec3& inertia() const { return inertia_; }
  double value(const AlgebraDualPoint& mu) const;
  Vec3 gradient(const AlgebraDualPoint& mu) const;
  std::pair<double, Vec3> eval(const AlgebraDualPoint& mu) const { return {value(mu), gradient(mu)}; }

 private:
  Vec3 inertia_;
};

/// C(mu) = 1/2 |mu|^2.
double casimir(const AlgebraDualPoint& mu);

/// Bracket matrix Pi_ab = {mu_a, mu_b} = -mu . (e_a x e_b), which is hat(mu).
Mat3 lie_poisson_bivector(const AlgebraDualPoint& mu);

/// X_H(g) = Pi(dH, dg), so mu' = Pi(mu)^T grad H(mu) = grad H(mu) x mu.
Vec3 euler_rhs(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu);

struct TrajectoryRecord {
  double step_size = 0.0;
  std::vector<AlgebraDualPoint> states;
  std::vector<double> hamiltonian_values;
  std::vector<double> casimir_values;

  void append(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu);
  std::size_t size() const { return states.size(); }
};

/// One classical RK4 step of euler_rhs.
AlgebraDualPoint rk4_step(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu, double dt);

/// n RK4 steps of size dt; record holds n + 1 states.
TrajectoryRecord rk4_rollout(const QuadraticHamiltonian& h, const AlgebraDualPoint& mu0, double dt,
                             int n);

}  // namespace hjpoisson
