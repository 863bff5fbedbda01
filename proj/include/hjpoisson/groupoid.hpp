#pragma once

#include "hjpoisson/lie_poisson.hpp"

namespace hjpoisson {

/// Exponential-chart coordinates on T*SO(3): rotation vector x and its conjugate momentum p.
struct GroupoidPoint {
  Vec3 x = Vec3::Zero();
  Vec3 p = Vec3::Zero();
};

enum class MomentumMap { Source, Target };

/// dexp(-x)^{-T} p. Poisson onto (so*(3), lie_poisson_bivector) for the canonical
/// bracket {x_i, p_j} = delta_ij.
AlgebraDualPoint source(const GroupoidPoint& g);

/// dexp(x)^{-T} p. Anti-Poisson.
AlgebraDualPoint target(const GroupoidPoint& g);

AlgebraDualPoint apply(MomentumMap map, const GroupoidPoint& g);

/// Identity arrow over mu.
GroupoidPoint unit(const AlgebraDualPoint& mu);

using MomentumJacobian = Eigen::Matrix<double, 3, 6>;

/// Gradient with respect to x of w . F(x, p).
Vec3 momentum_map_vjp_x(MomentumMap map, const GroupoidPoint& g, const Vec3& w);

/// Closed-form Jacobian d F / d(x, p).
MomentumJacobian momentum_map_jacobian(MomentumMap map, const GroupoidPoint& g);

/// Central-difference Jacobian d F / d(x, p).
MomentumJacobian momentum_map_jacobian_fd(MomentumMap map, const GroupoidPoint& g, double fd_step);

/// || J Pi_can J^T - sigma Pi_LP(F(g)) ||_max with sigma = +1 (source) or -1 (target).
double pushforward_residual(MomentumMap map, const GroupoidPoint& g, const MomentumJacobian& jac);

/// pushforward_residual with the finite-difference Jacobian.
double pushforward_check(MomentumMap map, const GroupoidPoint& g, double fd_step);

}  // namespace hjpoisson
