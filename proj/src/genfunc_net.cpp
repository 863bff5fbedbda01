#include "hjpoisson/genfunc_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace hjpoisson {

Parameters Parameters::zeros(const std::vector<int>& layer_sizes) {
  Parameters out;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    out.weights.push_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    out.biases.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
  return out;
}

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

Eigen::VectorXd Parameters::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) flat[k++] = w(i, j);
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) flat[k++] = biases[l][i];
  }
  return flat;
}

void Parameters::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != size())
    throw std::invalid_argument("Parameters::assign: size mismatch");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = flat[k++];
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l][i] = flat[k++];
  }
}

Parameters& Parameters::operator+=(const Parameters& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

Parameters& Parameters::operator*=(double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= s;
    biases[l] *= s;
  }
  return *this;
}

bool Parameters::same_shape(const Parameters& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols() ||
        biases[l].size() != other.biases[l].size())
      return false;
  }
  return true;
}

bool Parameters::operator==(const Parameters& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

void validate_layer_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("layer_sizes needs at least input and output");
  if (layer_sizes.front() != 4)
    throw std::invalid_argument("layer_sizes must start with 4 inputs (t, p1, p2, p3)");
  if (layer_sizes.back() != 1) throw std::invalid_argument("layer_sizes must end with a scalar output");
  for (int n : layer_sizes)
    if (n <= 0) throw std::invalid_argument("layer_sizes entries must be positive, got " + std::to_string(n));
}

GeneratingFunctionNet init_xavier(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  validate_layer_sizes(layer_sizes);
  GeneratingFunctionNet net;
  net.layer_sizes = layer_sizes;
  net.params = Parameters::zeros(layer_sizes);
  net.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer_sizes[l] + layer_sizes[l + 1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto& w = net.params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  }
  return net;
}

GeneratingFunctionNet zero_net(const std::vector<int>& layer_sizes) {
  validate_layer_sizes(layer_sizes);
  GeneratingFunctionNet net;
  net.layer_sizes = layer_sizes;
  net.params = Parameters::zeros(layer_sizes);
  return net;
}

namespace {

// N and dN/d(t, p1, p2, p3).
struct RawForward {
  double value;
  Eigen::Vector4d tangent;
};

RawForward forward_raw(const GeneratingFunctionNet& net, double t, const Vec3& p) {
  Eigen::VectorXd z(4);
  z << t, p.x(), p.y(), p.z();
  Eigen::MatrixXd zdot = Eigen::MatrixXd::Identity(4, 4);
  const std::size_t layers = net.params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = net.params.weights[l];
    Eigen::VectorXd a = w * z + net.params.biases[l];
    Eigen::MatrixXd adot = w * zdot;
    if (l + 1 == layers) return {a[0], adot.row(0).transpose()};
    z = a.array().tanh().matrix();
    const Eigen::ArrayXd s = 1.0 - z.array().square();
    zdot = (adot.array().colwise() * s).matrix();
  }
  return {0.0, Eigen::Vector4d::Zero()};
}

}  // namespace

double eval_raw(const GeneratingFunctionNet& net, double t, const Vec3& p) {
  return forward_raw(net, t, p).value;
}

double eval_s(const GeneratingFunctionNet& net, double t, const Vec3& p) {
  return t * forward_raw(net, t, p).value;
}

InputGradient eval_input_grad(const GeneratingFunctionNet& net, double t, const Vec3& p) {
  const RawForward f = forward_raw(net, t, p);
  InputGradient g;
  g.value = t * f.value;
  g.dt = f.value + t * f.tangent[0];
  g.dp = t * f.tangent.tail<3>();
  return g;
}

LossAndGradient loss_and_weight_grad(const GeneratingFunctionNet& net,
                                     std::span<const CollocationPoint> batch,
                                     const ResidualFn& residual, const LossOptions& options) {
  if (batch.empty()) throw std::invalid_argument("loss_and_weight_grad: empty batch");
  if (options.kernel == Kernel::Serial) return kernels::loss_grad_serial(net, batch, residual);
  return kernels::loss_grad_parallel(net, batch, residual, options.chunk_size);
}

}  // namespace hjpoisson
