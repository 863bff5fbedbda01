#pragma once

#include "hjpoisson/genfunc_net.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hjpoisson {

struct TrainingConfig {
  Vec3 p_lower = Vec3::Constant(-3.0);
  Vec3 p_upper = Vec3::Constant(3.0);
  double t_max = 0.15;
  int n_points = 5000;
  int n_iterations = 5000;
  int batch_size = 5000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<int> layer_sizes{4, 64, 64, 64, 1};
  std::uint64_t seed = 20240917;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// (4,64,64,64,1), 5000 points, 5000 iterations, lr 1e-3.
  static TrainingConfig desk_scale() { return {}; }
  /// (4,500,250,250,250,1), 80000 points, 10000 iterations, lr 1e-4.
  static TrainingConfig full_paper_scale();

  bool operator==(const TrainingConfig&) const = default;
};

/// JSON document with exactly the TrainingConfig field names; p_box is [[lower], [upper]].
std::string config_to_string(const TrainingConfig& cfg);
/// Rejects unknown or missing fields with FormatError::field() set.
TrainingConfig config_from_string(std::string_view text);
/// SHA-256 of the canonical serialization.
std::string config_digest(const TrainingConfig& cfg);

/// n_points pairs with p uniform in the box and t uniform in [0, t_max].
std::vector<CollocationPoint> sample_collocation(const TrainingConfig& cfg, std::mt19937_64& rng);

/// r = dS/dt + H(source(dS/dp, p)). Throws ChartViolation when |dS/dp| leaves the chart.
double hj_residual(const InputGradient& grad, double t, const Vec3& p, const QuadraticHamiltonian& h);

/// Same residual with partials; valid == false instead of throwing on chart violation.
ResidualEval hj_residual_with_partials(const InputGradient& grad, double t, const Vec3& p,
                                       const QuadraticHamiltonian& h);

ResidualFn make_hj_residual(const QuadraticHamiltonian& h);

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::int64_t step_count = 0;

  static AdamState for_net(const GeneratingFunctionNet& net);
};

/// Bias-corrected Adam step with epsilon added to sqrt(v_hat). Throws on shape mismatch.
void adam_update(AdamState& state, GeneratingFunctionNet& net, const Parameters& grad,
                 const TrainingConfig& cfg);

/// Element-by-element loop form of adam_update; bit-identical results.
void adam_update_loop(AdamState& state, GeneratingFunctionNet& net, const Parameters& grad,
                      const TrainingConfig& cfg);

struct LossRecord {
  int iteration = 0;
  double loss = 0.0;
  std::size_t dropped_points = 0;
};

struct TrainOptions {
  QuadraticHamiltonian hamiltonian;
  LossOptions loss;
  std::function<void(const LossRecord&)> on_iteration;
};

struct TrainingResult {
  GeneratingFunctionNet net;
  std::vector<LossRecord> history;
};

/// Xavier init, one up-front collocation sample, then n_iterations Adam steps on the
/// mean-square residual. history[k] is the loss before update k.
TrainingResult train(const TrainingConfig& cfg, const TrainOptions& options = {});

}  // namespace hjpoisson
