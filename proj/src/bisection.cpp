#include "hjpoisson/bisection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace hjpoisson {

namespace {

constexpr int kMaxHalvings = 20;

struct BisectionMaps {
  MomentumMap inverted;
  MomentumMap applied;
};

BisectionMaps maps_for(Composition c) {
  if (c == Composition::SourceAfterTargetInverse) return {MomentumMap::Target, MomentumMap::Source};
  return {MomentumMap::Source, MomentumMap::Target};
}

GroupoidPoint bisection_point(const GeneratingFunctionNet& net, double h, const Vec3& p) {
  return {eval_input_grad(net, h, p).dp, p};
}

}  // namespace

StepResult bisection_step(const GeneratingFunctionNet& net, double h, const AlgebraDualPoint& mu,
                          const NewtonConfig& ncfg) {
  if (!(h >= 0.0)) throw std::invalid_argument("bisection_step: h must be nonnegative");
  if (!mu.allFinite()) throw std::invalid_argument("bisection_step: non-finite state");
  if (!(ncfg.tolerance > 0.0) || ncfg.max_iterations < 1 || !(ncfg.fd_step > 0.0))
    throw std::invalid_argument("bisection_step: invalid Newton configuration");

  const BisectionMaps maps = maps_for(ncfg.composition);
  auto residual = [&](const Vec3& p, GroupoidPoint& g) {
    g = bisection_point(net, h, p);
    return Vec3(apply(maps.inverted, g) - mu);
  };

  StepDiagnostics diag;
  Vec3 p = mu;
  GroupoidPoint g;
  Vec3 f = residual(p, g);
  double norm = f.cwiseAbs().maxCoeff();
  diag.chart_max_x_norm = g.x.norm();

  while (norm > ncfg.tolerance && diag.newton_iterations < ncfg.max_iterations) {
    Mat3 jac;
    GroupoidPoint scratch;
    for (int c = 0; c < 3; ++c) {
      Vec3 plus = p, minus = p;
      plus[c] += ncfg.fd_step;
      minus[c] -= ncfg.fd_step;
      jac.col(c) = (residual(plus, scratch) - residual(minus, scratch)) / (2.0 * ncfg.fd_step);
    }
    const Vec3 direction = -jac.partialPivLu().solve(f);
    ++diag.newton_iterations;

    bool accepted = false;
    double lambda = 1.0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, lambda *= 0.5) {
      const Vec3 trial = p + lambda * direction;
      GroupoidPoint trial_g;
      Vec3 trial_f;
      try {
        trial_f = residual(trial, trial_g);
      } catch (const ChartViolation&) {
        continue;
      }
      const double trial_norm = trial_f.cwiseAbs().maxCoeff();
      if (trial_norm < norm) {
        p = trial;
        f = trial_f;
        g = trial_g;
        norm = trial_norm;
        diag.chart_max_x_norm = std::max(diag.chart_max_x_norm, g.x.norm());
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  diag.final_residual = norm;
  if (!(norm <= ncfg.tolerance)) throw NewtonFailure(diag.newton_iterations, norm);
  return {apply(maps.applied, g), diag};
}

Rollout rollout(const GeneratingFunctionNet& net, double h, const AlgebraDualPoint& mu0, int n,
                const NewtonConfig& ncfg, const QuadraticHamiltonian& ham) {
  if (n < 0) throw std::invalid_argument("rollout: negative step count");
  Rollout out;
  out.record.step_size = h;
  out.record.append(ham, mu0);
  AlgebraDualPoint mu = mu0;
  for (int k = 1; k <= n; ++k) {
    try {
      StepResult step = bisection_step(net, h, mu, ncfg);
      mu = step.mu;
      out.diagnostics.push_back(step.diagnostics);
    } catch (const std::exception& e) {
      throw RolloutAborted(k, e.what(), std::move(out.record), std::move(out.diagnostics));
    }
    out.record.append(ham, mu);
  }
  return out;
}

TrajectoryRecord oracle_trajectory(const QuadraticHamiltonian& ham, const AlgebraDualPoint& mu0, double h,
                                   int n, int substeps) {
  if (substeps < 1) throw std::invalid_argument("oracle_trajectory: substeps must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("oracle_trajectory: h must be positive");
  if (n < 0) throw std::invalid_argument("oracle_trajectory: negative step count");
  const double dt = h / substeps;
  TrajectoryRecord rec;
  rec.step_size = h;
  AlgebraDualPoint mu = mu0;
  rec.append(ham, mu);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < substeps; ++s) mu = rk4_step(ham, mu, dt);
    rec.append(ham, mu);
  }
  return rec;
}

OracleReport compare_with_oracle(const TrajectoryRecord& traj, const QuadraticHamiltonian& ham,
                                 int oracle_substeps) {
  if (oracle_substeps < 1) throw std::invalid_argument("compare_with_oracle: substeps must be >= 1");
  OracleReport rep;
  if (traj.states.empty()) return rep;
  const int n = static_cast<int>(traj.states.size()) - 1;
  const TrajectoryRecord oracle = oracle_trajectory(ham, traj.states.front(), traj.step_size, n, oracle_substeps);
  const double h0 = ham.value(traj.states.front());
  const double c0 = casimir(traj.states.front());
  for (int k = 0; k <= n; ++k) {
    const auto& mu = traj.states[static_cast<std::size_t>(k)];
    const auto& ref = oracle.states[static_cast<std::size_t>(k)];
    rep.time.push_back(k * traj.step_size);
    rep.error_norm.push_back((mu - ref).norm());
    rep.h_model.push_back(ham.value(mu));
    rep.h_oracle.push_back(oracle.hamiltonian_values[static_cast<std::size_t>(k)]);
    rep.c_model.push_back(casimir(mu));
    rep.c_oracle.push_back(oracle.casimir_values[static_cast<std::size_t>(k)]);
    rep.max_error = std::max(rep.max_error, rep.error_norm.back());
    rep.max_h_drift = std::max(rep.max_h_drift, std::abs(rep.h_model.back() - h0));
    rep.max_c_drift = std::max(rep.max_c_drift, std::abs(rep.c_model.back() - c0));
  }
  return rep;
}

}  // namespace hjpoisson
