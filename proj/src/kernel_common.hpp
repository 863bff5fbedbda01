#pragma once

#include "hjpoisson/genfunc_net.hpp"

#include <stdexcept>

namespace hjpoisson::kernels::detail {

/// Residual of one point and the adjoints of (N, dN/dt, dN/dp) for d(r^2)/d(.).
struct PointAdjoint {
  bool valid = false;
  double squared = 0.0;
  double raw = 0.0;
  Eigen::Vector4d tangent = Eigen::Vector4d::Zero();
};

inline PointAdjoint residual_adjoint(const ResidualFn& residual, double t, const Vec3& p, double raw,
                                     const Eigen::Vector4d& tangent) {
  InputGradient g;
  g.value = t * raw;
  g.dt = raw + t * tangent[0];
  g.dp = t * tangent.tail<3>();
  const ResidualEval r = residual(g, t, p);
  PointAdjoint out;
  if (!r.valid) return out;
  out.valid = true;
  out.squared = r.value * r.value;
  const double rbar = 2.0 * r.value;
  // S = t N, dS/dt = N + t dN/dt, dS/dp = t dN/dp.
  out.raw = rbar * (r.d_value * t + r.d_dt);
  out.tangent[0] = rbar * r.d_dt * t;
  out.tangent.tail<3>() = rbar * t * r.d_dp;
  return out;
}

inline LossAndGradient finalize(double squared_sum, Parameters gradient, std::size_t used,
                                std::size_t dropped) {
  if (used == 0) throw std::runtime_error("loss_and_weight_grad: every collocation point was dropped");
  const double inv = 1.0 / static_cast<double>(used);
  gradient *= inv;
  return {squared_sum * inv, std::move(gradient), used, dropped};
}

}  // namespace hjpoisson::kernels::detail
