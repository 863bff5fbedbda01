#include "kernel_common.hpp"

#include <vector>

namespace hjpoisson::kernels {

LossAndGradient loss_grad_serial(const GeneratingFunctionNet& net,
                                 std::span<const CollocationPoint> batch, const ResidualFn& residual) {
  const auto& weights = net.params.weights;
  const auto& biases = net.params.biases;
  const std::size_t layers = weights.size();

  Parameters grad = Parameters::zeros(net.layer_sizes);
  double squared_sum = 0.0;
  std::size_t used = 0, dropped = 0;

  // inputs[l], input_tangents[l]: activations entering layer l and their 4 input tangents.
  // pre_tangents[l]: tangents of the pre-activation of layer l.
  std::vector<Eigen::VectorXd> inputs(layers);
  std::vector<Eigen::MatrixXd> input_tangents(layers);
  std::vector<Eigen::MatrixXd> pre_tangents(layers);

  for (const CollocationPoint& pt : batch) {
    inputs[0].resize(4);
    inputs[0] << pt.t, pt.p.x(), pt.p.y(), pt.p.z();
    input_tangents[0] = Eigen::MatrixXd::Identity(4, 4);

    double raw = 0.0;
    Eigen::Vector4d raw_tangent = Eigen::Vector4d::Zero();
    for (std::size_t l = 0; l < layers; ++l) {
      const Eigen::VectorXd a = weights[l] * inputs[l] + biases[l];
      pre_tangents[l] = weights[l] * input_tangents[l];
      if (l + 1 == layers) {
        raw = a[0];
        raw_tangent = pre_tangents[l].row(0).transpose();
        break;
      }
      inputs[l + 1] = a.array().tanh().matrix();
      const Eigen::VectorXd s = (1.0 - inputs[l + 1].array().square()).matrix();
      input_tangents[l + 1].resize(s.size(), 4);
      for (int k = 0; k < 4; ++k)
        input_tangents[l + 1].col(k) = s.cwiseProduct(pre_tangents[l].col(k));
    }

    const detail::PointAdjoint adj = detail::residual_adjoint(residual, pt.t, pt.p, raw, raw_tangent);
    if (!adj.valid) {
      ++dropped;
      continue;
    }
    ++used;
    squared_sum += adj.squared;

    Eigen::VectorXd abar(1);
    abar[0] = adj.raw;
    Eigen::MatrixXd adotbar = adj.tangent.transpose();
    for (std::size_t l = layers; l-- > 0;) {
      grad.weights[l] += abar * inputs[l].transpose() + adotbar * input_tangents[l].transpose();
      grad.biases[l] += abar;
      if (l == 0) break;
      Eigen::VectorXd zbar = weights[l].transpose() * abar;
      const Eigen::MatrixXd zdotbar = weights[l].transpose() * adotbar;
      // z = tanh(a), s = 1 - z^2, zdot_k = s * adot_k.
      const Eigen::VectorXd& z = inputs[l];
      const Eigen::VectorXd s = (1.0 - z.array().square()).matrix();
      Eigen::VectorXd sbar = Eigen::VectorXd::Zero(z.size());
      adotbar.resize(z.size(), 4);
      for (int k = 0; k < 4; ++k) {
        adotbar.col(k) = s.cwiseProduct(zdotbar.col(k));
        sbar += zdotbar.col(k).cwiseProduct(pre_tangents[l - 1].col(k));
      }
      zbar -= 2.0 * z.cwiseProduct(sbar);
      abar = s.cwiseProduct(zbar);
    }
  }
  return detail::finalize(squared_sum, std::move(grad), used, dropped);
}

}  // namespace hjpoisson::kernels
