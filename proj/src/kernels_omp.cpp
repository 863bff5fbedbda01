#include "kernel_common.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace hjpoisson::kernels {

namespace {

// tanh through a vectorized exp; within a few ulp of std::tanh in absolute terms.
Eigen::ArrayXXd tanh_vectorized(const Eigen::ArrayXXd& a) {
  const Eigen::ArrayXXd e = (-2.0 * a.abs()).exp();
  return a.sign() * (1.0 - e) / (1.0 + e);
}

struct ChunkResult {
  double squared_sum = 0.0;
  Parameters grad;
  std::size_t used = 0;
  std::size_t dropped = 0;
};

// Columns [0, B) hold values, columns [B (k + 1), B (k + 2)) the k-th input tangent.
void process_chunk(const GeneratingFunctionNet& net, std::span<const CollocationPoint> pts,
                   const ResidualFn& residual, ChunkResult& out) {
  const auto& weights = net.params.weights;
  const auto& biases = net.params.biases;
  const std::size_t layers = weights.size();
  const Eigen::Index b = static_cast<Eigen::Index>(pts.size());

  std::vector<Eigen::MatrixXd> stacked(layers);   // layer inputs with tangents
  std::vector<Eigen::MatrixXd> pre_tangents(layers);

  stacked[0] = Eigen::MatrixXd::Zero(4, 5 * b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const CollocationPoint& pt = pts[static_cast<std::size_t>(j)];
    stacked[0].col(j) << pt.t, pt.p.x(), pt.p.y(), pt.p.z();
  }
  for (Eigen::Index k = 0; k < 4; ++k) stacked[0].block(k, b * (k + 1), 1, b).setOnes();

  Eigen::MatrixXd y;
  for (std::size_t l = 0; l < layers; ++l) {
    y.noalias() = weights[l] * stacked[l];
    if (l + 1 == layers) break;
    const Eigen::Index n = y.rows();
    stacked[l + 1].resize(n, 5 * b);
    auto z = stacked[l + 1].leftCols(b);
    z = tanh_vectorized((y.leftCols(b).colwise() + biases[l]).array()).matrix();
    const Eigen::ArrayXXd s = 1.0 - z.array().square();
    pre_tangents[l] = y.rightCols(4 * b);
    for (Eigen::Index k = 0; k < 4; ++k)
      stacked[l + 1].middleCols(b * (k + 1), b) = (s * pre_tangents[l].middleCols(b * k, b).array()).matrix();
  }

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, 5 * b);
  const double out_bias = biases.back()[0];
  for (Eigen::Index j = 0; j < b; ++j) {
    const CollocationPoint& pt = pts[static_cast<std::size_t>(j)];
    Eigen::Vector4d tangent;
    for (Eigen::Index k = 0; k < 4; ++k) tangent[k] = y(0, b * (k + 1) + j);
    const detail::PointAdjoint adj =
        detail::residual_adjoint(residual, pt.t, pt.p, y(0, j) + out_bias, tangent);
    if (!adj.valid) {
      ++out.dropped;
      continue;
    }
    ++out.used;
    out.squared_sum += adj.squared;
    g(0, j) = adj.raw;
    for (Eigen::Index k = 0; k < 4; ++k) g(0, b * (k + 1) + j) = adj.tangent[k];
  }

  out.grad = Parameters::zeros(net.layer_sizes);
  Eigen::MatrixXd gbar;
  for (std::size_t l = layers; l-- > 0;) {
    out.grad.weights[l].noalias() = g * stacked[l].transpose();
    out.grad.biases[l] = g.leftCols(b).rowwise().sum();
    if (l == 0) break;
    gbar.noalias() = weights[l].transpose() * g;
    const auto z = stacked[l].leftCols(b).array();
    const Eigen::ArrayXXd s = 1.0 - z.square();
    Eigen::ArrayXXd sbar = Eigen::ArrayXXd::Zero(z.rows(), b);
    for (Eigen::Index k = 0; k < 4; ++k)
      sbar += gbar.middleCols(b * (k + 1), b).array() * pre_tangents[l - 1].middleCols(b * k, b).array();
    g.resize(gbar.rows(), 5 * b);
    g.leftCols(b) = (s * (gbar.leftCols(b).array() - 2.0 * z * sbar)).matrix();
    for (Eigen::Index k = 0; k < 4; ++k)
      g.middleCols(b * (k + 1), b) = (s * gbar.middleCols(b * (k + 1), b).array()).matrix();
  }
}

}  // namespace

LossAndGradient loss_grad_parallel(const GeneratingFunctionNet& net,
                                   std::span<const CollocationPoint> batch,
                                   const ResidualFn& residual, int chunk_size) {
  if (chunk_size <= 0) throw std::invalid_argument("loss_grad_parallel: chunk_size must be positive");
  const std::size_t chunk = static_cast<std::size_t>(chunk_size);
  const std::size_t n_chunks = (batch.size() + chunk - 1) / chunk;
  // Partials are summed in chunk order, so the wave size only bounds memory.
  const std::size_t wave = std::max<std::size_t>(8, 4 * static_cast<std::size_t>(omp_get_max_threads()));

  Parameters grad = Parameters::zeros(net.layer_sizes);
  double squared_sum = 0.0;
  std::size_t used = 0, dropped = 0;
  std::vector<ChunkResult> partial(std::min(wave, n_chunks));

  for (std::size_t first = 0; first < n_chunks; first += wave) {
    const std::size_t count = std::min(wave, n_chunks - first);
    bool failed = false;
    std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t begin = (first + c) * chunk;
      const std::size_t len = std::min(chunk, batch.size() - begin);
      partial[c] = ChunkResult{};
      try {
        process_chunk(net, batch.subspan(begin, len), residual, partial[c]);
      } catch (const std::exception& e) {
#pragma omp critical(hjp_kernel_failure)
        {
          failed = true;
          failure = e.what();
        }
      }
    }
    if (failed) throw std::runtime_error("loss_grad_parallel: " + failure);
    for (std::size_t c = 0; c < count; ++c) {
      squared_sum += partial[c].squared_sum;
      grad += partial[c].grad;
      used += partial[c].used;
      dropped += partial[c].dropped;
    }
  }
  return detail::finalize(squared_sum, std::move(grad), used, dropped);
}

}  // namespace hjpoisson::kernels
