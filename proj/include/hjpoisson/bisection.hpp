#pragma once

#include "hjpoisson/errors.hpp"
#include "hjpoisson/genfunc_net.hpp"
#include "hjpoisson/groupoid.hpp"

#include <vector>

namespace hjpoisson {

/// Which momentum map is inverted on the bisection L_h = {(dS/dp(h, p), p)}.
enum class Composition {
  /// mu' = source(tar|_L^{-1}(mu)). Advances the flow when S solves dS/dt + H(source) = 0.
  SourceAfterTargetInverse,
  /// mu' = target(sou|_L^{-1}(mu)). Runs the same bisection backwards.
  TargetAfterSourceInverse,
};

struct NewtonConfig {
  double tolerance = 1e-12;
  int max_iterations = 50;
  double fd_step = 1e-7;
  Composition composition = Composition::SourceAfterTargetInverse;
};

struct StepDiagnostics {
  int newton_iterations = 0;
  double final_residual = 0.0;
  double chart_max_x_norm = 0.0;
};

struct StepResult {
  AlgebraDualPoint mu;
  StepDiagnostics diagnostics;
};

/// One step of the Poisson map induced by the trained generating function at time h.
/// Damped Newton on F(p) = inverted_map(dS/dp(h, p), p) - mu from p = mu.
/// Throws NewtonFailure or ChartViolation.
StepResult bisection_step(const GeneratingFunctionNet& net, double h, const AlgebraDualPoint& mu,
                          const NewtonConfig& ncfg = {});

/// Thrown by rollout; carries the trajectory up to the failing step.
class RolloutAborted : public std::runtime_error {
 public:
  RolloutAborted(int step, const std::string& why, TrajectoryRecord partial,
                 std::vector<StepDiagnostics> diagnostics)
      : std::runtime_error("rollout aborted at step " + std::to_string(step) + ": " + why),
        step_(step),
        partial_(std::move(partial)),
        diagnostics_(std::move(diagnostics)) {}
  int step() const { return step_; }
  const TrajectoryRecord& partial() const { return partial_; }
  const std::vector<StepDiagnostics>& diagnostics() const { return diagnostics_; }

 private:
  int step_;
  TrajectoryRecord partial_;
  std::vector<StepDiagnostics> diagnostics_;
};

struct Rollout {
  TrajectoryRecord record;
  /// diagnostics[k] belongs to the step producing state k + 1.
  std::vector<StepDiagnostics> diagnostics;
};

Rollout rollout(const GeneratingFunctionNet& net, double h, const AlgebraDualPoint& mu0, int n,
                const NewtonConfig& ncfg = {}, const QuadraticHamiltonian& ham = {});

/// RK4 at step h / substeps, sampled every substeps steps; n + 1 states.
TrajectoryRecord oracle_trajectory(const QuadraticHamiltonian& ham, const AlgebraDualPoint& mu0, double h,
                                   int n, int substeps);

struct OracleReport {
  std::vector<double> time;
  std::vector<double> error_norm;
  std::vector<double> h_model, h_oracle;
  std::vector<double> c_model, c_oracle;
  double max_error = 0.0;
  double max_h_drift = 0.0;  // max_k |H_model(k) - H_model(0)|
  double max_c_drift = 0.0;  // max_k |C_model(k) - C_model(0)|
};

/// Compares a trajectory against oracle_trajectory from its first state.
OracleReport compare_with_oracle(const TrajectoryRecord& traj, const QuadraticHamiltonian& ham,
                                 int oracle_substeps);

}  // namespace hjpoisson
