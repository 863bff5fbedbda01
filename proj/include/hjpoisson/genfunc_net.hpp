#pragma once

#include "hjpoisson/lie_poisson.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hjpoisson {

/// Weights and biases of an MLP. weights[l] maps layer l (sizes[l]) to layer l+1.
struct Parameters {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Parameters zeros(const std::vector<int>& layer_sizes);

  std::size_t size() const;
  /// Layer by layer: weights row-major, then biases.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  Parameters& operator+=(const Parameters& other);
  Parameters& operator*=(double s);
  bool same_shape(const Parameters& other) const;
  bool operator==(const Parameters& other) const;
};

/// S(t, p; W) = t * N(t, p; W) with N a tanh MLP on (t, p1, p2, p3) and a linear scalar output.
/// The factor t makes S(0, p) = 0 for every W.
struct GeneratingFunctionNet {
  std::vector<int> layer_sizes;
  Parameters params;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> training_config_digest;

  std::size_t hidden_layers() const { return layer_sizes.size() - 2; }
  bool operator==(const GeneratingFunctionNet& other) const = default;
};

/// Throws std::invalid_argument unless sizes are (4, h..., 1) with every entry positive.
void validate_layer_sizes(const std::vector<int>& layer_sizes);

/// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +...), biases zero. Deterministic in seed.
GeneratingFunctionNet init_xavier(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// All parameters zero.
GeneratingFunctionNet zero_net(const std::vector<int>& layer_sizes);

/// S and its partial derivatives with respect to t and p.
struct InputGradient {
  double value = 0.0;
  double dt = 0.0;
  Vec3 dp = Vec3::Zero();
};

/// Raw MLP output N(t, p).
double eval_raw(const GeneratingFunctionNet& net, double t, const Vec3& p);

double eval_s(const GeneratingFunctionNet& net, double t, const Vec3& p);

/// Exact input derivatives by forward-mode propagation of the 4 input tangents.
InputGradient eval_input_grad(const GeneratingFunctionNet& net, double t, const Vec3& p);

/// A residual value together with its partials in the InputGradient entries.
/// valid == false drops the point from the loss (e.g. chart violation).
struct ResidualEval {
  double value = 0.0;
  double d_value = 0.0;
  double d_dt = 0.0;
  Vec3 d_dp = Vec3::Zero();
  bool valid = true;
};

/// Must be safe to call concurrently.
using ResidualFn = std::function<ResidualEval(const InputGradient&, double t, const Vec3& p)>;

struct CollocationPoint {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
};

struct LossAndGradient {
  double loss = 0.0;
  Parameters gradient;
  std::size_t used_points = 0;
  std::size_t dropped_points = 0;
};

enum class Kernel { Serial, Parallel };

struct LossOptions {
  Kernel kernel = Kernel::Parallel;
  /// Points per work unit of the parallel kernel. Results depend on this value but not on the
  /// thread count.
  int chunk_size = 16;
};

/// L(W) = mean over valid points of residual^2, with its exact gradient in W.
/// Throws std::invalid_argument on an empty batch and std::runtime_error if every point is dropped.
LossAndGradient loss_and_weight_grad(const GeneratingFunctionNet& net,
                                     std::span<const CollocationPoint> batch,
                                     const ResidualFn& residual, const LossOptions& options = {});

namespace kernels {

/// Reference: one point at a time, plain loops.
LossAndGradient loss_grad_serial(const GeneratingFunctionNet& net,
                                 std::span<const CollocationPoint> batch, const ResidualFn& residual);

/// Chunked batched GEMM kernel, chunks distributed with OpenMP and reduced in chunk order.
LossAndGradient loss_grad_parallel(const GeneratingFunctionNet& net,
                                   std::span<const CollocationPoint> batch,
                                   const ResidualFn& residual, int chunk_size);

}  // namespace kernels

}  // namespace hjpoisson
