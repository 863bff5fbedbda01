#include "hjpoisson/groupoid.hpp"

#include <stdexcept>

namespace hjpoisson {

namespace {

// dexp(y)^{-T} p; exact on the unit fiber.
Vec3 transpose_inverse_apply(const Vec3& y, const Vec3& p) {
  if (y.isZero(0.0)) {
    (void)dexp(y);
    return p;
  }
  return dexp(y).transpose().partialPivLu().solve(p);
}

Vec3 chart_argument(MomentumMap map, const Vec3& x) {
  return map == MomentumMap::Source ? Vec3(-x) : Vec3(x);
}

}  // namespace

AlgebraDualPoint source(const GroupoidPoint& g) { return transpose_inverse_apply(-g.x, g.p); }

AlgebraDualPoint target(const GroupoidPoint& g) { return transpose_inverse_apply(g.x, g.p); }

AlgebraDualPoint apply(MomentumMap map, const GroupoidPoint& g) {
  return map == MomentumMap::Source ? source(g) : target(g);
}

GroupoidPoint unit(const AlgebraDualPoint& mu) { return {Vec3::Zero(), mu}; }

Vec3 momentum_map_vjp_x(MomentumMap map, const GroupoidPoint& g, const Vec3& w) {
  // For mu = J(y)^{-T} p:  d(w . mu) = -mu . (dJ(y) J(y)^{-1} w),  y = +-x.
  const Vec3 y = chart_argument(map, g.x);
  const Mat3 j = dexp(y);
  const Vec3 mu = j.transpose().partialPivLu().solve(g.p);
  const Vec3 v = j.partialPivLu().solve(w);
  const Vec3 grad_y = -dexp_apply_derivative(y, v).transpose() * mu;
  return map == MomentumMap::Source ? Vec3(-grad_y) : grad_y;
}

MomentumJacobian momentum_map_jacobian(MomentumMap map, const GroupoidPoint& g) {
  const Vec3 y = chart_argument(map, g.x);
  const Mat3 jt_inv = dexp(y).transpose().inverse();
  MomentumJacobian jac;
  for (int a = 0; a < 3; ++a)
    jac.block<1, 3>(a, 0) = momentum_map_vjp_x(map, g, Vec3::Unit(a)).transpose();
  jac.block<3, 3>(0, 3) = jt_inv;
  return jac;
}

MomentumJacobian momentum_map_jacobian_fd(MomentumMap map, const GroupoidPoint& g, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("momentum_map_jacobian_fd: fd_step must be positive");
  MomentumJacobian jac;
  for (int c = 0; c < 6; ++c) {
    GroupoidPoint plus = g, minus = g;
    if (c < 3) {
      plus.x[c] += fd_step;
      minus.x[c] -= fd_step;
    } else {
      plus.p[c - 3] += fd_step;
      minus.p[c - 3] -= fd_step;
    }
    jac.col(c) = (apply(map, plus) - apply(map, minus)) / (2.0 * fd_step);
  }
  return jac;
}

double pushforward_residual(MomentumMap map, const GroupoidPoint& g, const MomentumJacobian& jac) {
  // Canonical bivector {x_i, p_j} = delta_ij, so J Pi_can J^T = A B^T - B A^T.
  const Mat3 a = jac.leftCols<3>();
  const Mat3 b = jac.rightCols<3>();
  const Mat3 pushed = a * b.transpose() - b * a.transpose();
  const double sigma = map == MomentumMap::Source ? 1.0 : -1.0;
  const Mat3 expected = sigma * lie_poisson_bivector(apply(map, g));
  return (pushed - expected).cwiseAbs().maxCoeff();
}

double pushforward_check(MomentumMap map, const GroupoidPoint& g, double fd_step) {
  return pushforward_residual(map, g, momentum_map_jacobian_fd(map, g, fd_step));
}

}  // namespace hjpoisson
