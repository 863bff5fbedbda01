#include "hjpoisson/hj_training.hpp"

#include "hjpoisson/errors.hpp"
#include "hjpoisson/groupoid.hpp"
#include "hjpoisson/weights_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace hjpoisson {

using nlohmann::json;

void TrainingConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("training config field '" + field + "': " + why);
  };
  if (!p_lower.allFinite() || !p_upper.allFinite() || !(p_lower.array() < p_upper.array()).all())
    fail("p_box", "lower corner must be finite and strictly below upper corner");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) fail("t_max", "must be positive");
  if (n_points <= 0) fail("n_points", "must be positive");
  if (n_iterations < 0) fail("n_iterations", "must be nonnegative");
  if (batch_size <= 0 || batch_size > n_points) fail("batch_size", "must be in [1, n_points]");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) fail("adam_beta1", "must lie in (0, 1)");
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) fail("adam_beta2", "must lie in (0, 1)");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon", "must be positive");
  try {
    validate_layer_sizes(layer_sizes);
  } catch (const std::invalid_argument& e) {
    fail("layer_sizes", e.what());
  }
}

TrainingConfig TrainingConfig::full_paper_scale() {
  TrainingConfig cfg;
  cfg.n_points = 80000;
  cfg.batch_size = 80000;
  cfg.n_iterations = 10000;
  cfg.learning_rate = 1e-4;
  cfg.layer_sizes = {4, 500, 250, 250, 250, 1};
  return cfg;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

const std::set<std::string>& config_fields() {
  static const std::set<std::string> fields{
      "p_box", "t_max", "n_points", "n_iterations", "batch_size", "learning_rate",
      "adam_beta1", "adam_beta2", "adam_epsilon", "layer_sizes", "seed"};
  return fields;
}

Vec3 vec_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw FormatError("config field '" + field + "' needs 3 reals", field);
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError("config field '" + field + "' needs 3 reals", field);
    v[i] = j[i].get<double>();
  }
  return v;
}

template <typename T>
T number_field(const json& doc, const std::string& field) {
  const json& v = doc.at(field);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw FormatError("config field '" + field + "' must be an integer", field);
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned())
        throw FormatError("config field '" + field + "' must be nonnegative", field);
    }
  } else {
    if (!v.is_number()) throw FormatError("config field '" + field + "' must be a number", field);
  }
  return v.get<T>();
}

}  // namespace

std::string config_to_string(const TrainingConfig& cfg) {
  json doc;
  doc["p_box"] = json::array({vec_json(cfg.p_lower), vec_json(cfg.p_upper)});
  doc["t_max"] = cfg.t_max;
  doc["n_points"] = cfg.n_points;
  doc["n_iterations"] = cfg.n_iterations;
  doc["batch_size"] = cfg.batch_size;
  doc["learning_rate"] = cfg.learning_rate;
  doc["adam_beta1"] = cfg.adam_beta1;
  doc["adam_beta2"] = cfg.adam_beta2;
  doc["adam_epsilon"] = cfg.adam_epsilon;
  doc["layer_sizes"] = cfg.layer_sizes;
  doc["seed"] = cfg.seed;
  return doc.dump(2) + "\n";
}

TrainingConfig config_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!config_fields().contains(key)) throw FormatError("config: unknown field '" + key + "'", key);
  }
  for (const std::string& field : config_fields()) {
    if (!doc.contains(field)) throw FormatError("config: missing field '" + field + "'", field);
  }

  TrainingConfig cfg;
  const json& box = doc.at("p_box");
  if (!box.is_array() || box.size() != 2)
    throw FormatError("config field 'p_box' must be [[lower], [upper]]", "p_box");
  cfg.p_lower = vec_from_json(box[0], "p_box");
  cfg.p_upper = vec_from_json(box[1], "p_box");
  cfg.t_max = number_field<double>(doc, "t_max");
  cfg.n_points = number_field<int>(doc, "n_points");
  cfg.n_iterations = number_field<int>(doc, "n_iterations");
  cfg.batch_size = number_field<int>(doc, "batch_size");
  cfg.learning_rate = number_field<double>(doc, "learning_rate");
  cfg.adam_beta1 = number_field<double>(doc, "adam_beta1");
  cfg.adam_beta2 = number_field<double>(doc, "adam_beta2");
  cfg.adam_epsilon = number_field<double>(doc, "adam_epsilon");
  cfg.seed = number_field<std::uint64_t>(doc, "seed");
  const json& sizes = doc.at("layer_sizes");
  if (!sizes.is_array()) throw FormatError("config field 'layer_sizes' must be an array", "layer_sizes");
  cfg.layer_sizes.clear();
  for (const json& s : sizes) {
    if (!s.is_number_integer()) throw FormatError("config field 'layer_sizes' must hold integers", "layer_sizes");
    cfg.layer_sizes.push_back(s.get<int>());
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    std::string field;
    if (auto a = msg.find('\''); a != std::string::npos) {
      auto b = msg.find('\'', a + 1);
      field = msg.substr(a + 1, b - a - 1);
    }
    throw FormatError(msg, field);
  }
  return cfg;
}

std::string config_digest(const TrainingConfig& cfg) { return sha256_hex(config_to_string(cfg)); }

std::vector<CollocationPoint> sample_collocation(const TrainingConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CollocationPoint> pts(static_cast<std::size_t>(cfg.n_points));
  for (CollocationPoint& pt : pts) {
    pt.t = cfg.t_max * unit(rng);
    for (int i = 0; i < 3; ++i) pt.p[i] = cfg.p_lower[i] + (cfg.p_upper[i] - cfg.p_lower[i]) * unit(rng);
  }
  return pts;
}

double hj_residual(const InputGradient& grad, double t, const Vec3& p, const QuadraticHamiltonian& h) {
  (void)t;
  const double norm = grad.dp.norm();
  if (!(norm < kChartRadius)) throw ChartViolation("hj_residual", norm);
  return grad.dt + h.value(source({grad.dp, p}));
}

ResidualEval hj_residual_with_partials(const InputGradient& grad, double t, const Vec3& p,
                                       const QuadraticHamiltonian& h) {
  (void)t;
  ResidualEval r;
  if (!(grad.dp.norm() < kChartRadius)) {
    r.valid = false;
    return r;
  }
  const GroupoidPoint g{grad.dp, p};
  const AlgebraDualPoint mu = source(g);
  r.value = grad.dt + h.value(mu);
  r.d_dt = 1.0;
  r.d_dp = momentum_map_vjp_x(MomentumMap::Source, g, h.gradient(mu));
  return r;
}

ResidualFn make_hj_residual(const QuadraticHamiltonian& h) {
  return [h](const InputGradient& g, double t, const Vec3& p) { return hj_residual_with_partials(g, t, p, h); };
}

AdamState AdamState::for_net(const GeneratingFunctionNet& net) {
  return {Parameters::zeros(net.layer_sizes), Parameters::zeros(net.layer_sizes), 0};
}

namespace {

void check_adam_shapes(const AdamState& state, const GeneratingFunctionNet& net, const Parameters& grad) {
  if (!grad.same_shape(net.params) || !state.first_moment.same_shape(net.params) ||
      !state.second_moment.same_shape(net.params))
    throw std::invalid_argument("adam_update: shape mismatch between state, network and gradient");
}

struct AdamScalars {
  double b1, b2, c1, c2, lr, eps;
};

AdamScalars adam_scalars(std::int64_t step, const TrainingConfig& cfg) {
  const double k = static_cast<double>(step);
  return {cfg.adam_beta1,
          cfg.adam_beta2,
          1.0 - std::pow(cfg.adam_beta1, k),
          1.0 - std::pow(cfg.adam_beta2, k),
          cfg.learning_rate,
          cfg.adam_epsilon};
}

template <typename Block>
void adam_block(Block& w, Block& m, Block& v, const Block& g, const AdamScalars& a) {
  m.array() = a.b1 * m.array() + (1.0 - a.b1) * g.array();
  v.array() = a.b2 * v.array() + (1.0 - a.b2) * (g.array() * g.array());
  w.array() -= a.lr * (m.array() / a.c1) / ((v.array() / a.c2).sqrt() + a.eps);
}

void adam_scalar(double& w, double& m, double& v, double g, const AdamScalars& a) {
  m = a.b1 * m + (1.0 - a.b1) * g;
  v = a.b2 * v + (1.0 - a.b2) * (g * g);
  w -= a.lr * (m / a.c1) / (std::sqrt(v / a.c2) + a.eps);
}

}  // namespace

void adam_update(AdamState& state, GeneratingFunctionNet& net, const Parameters& grad,
                 const TrainingConfig& cfg) {
  check_adam_shapes(state, net, grad);
  ++state.step_count;
  const AdamScalars a = adam_scalars(state.step_count, cfg);
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    adam_block(net.params.weights[l], state.first_moment.weights[l], state.second_moment.weights[l],
               grad.weights[l], a);
    adam_block(net.params.biases[l], state.first_moment.biases[l], state.second_moment.biases[l],
               grad.biases[l], a);
  }
}

void adam_update_loop(AdamState& state, GeneratingFunctionNet& net, const Parameters& grad,
                      const TrainingConfig& cfg) {
  check_adam_shapes(state, net, grad);
  ++state.step_count;
  const AdamScalars a = adam_scalars(state.step_count, cfg);
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    auto& w = net.params.weights[l];
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        adam_scalar(w(i, j), state.first_moment.weights[l](i, j), state.second_moment.weights[l](i, j),
                    grad.weights[l](i, j), a);
    auto& b = net.params.biases[l];
    for (Eigen::Index i = 0; i < b.size(); ++i)
      adam_scalar(b[i], state.first_moment.biases[l][i], state.second_moment.biases[l][i], grad.biases[l][i], a);
  }
}

TrainingResult train(const TrainingConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  TrainingResult result;
  result.net = init_xavier(cfg.layer_sizes, cfg.seed);
  result.net.training_config_digest = config_digest(cfg);

  std::seed_seq sample_seed{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 1u};
  std::mt19937_64 sample_rng(sample_seed);
  const std::vector<CollocationPoint> points = sample_collocation(cfg, sample_rng);

  std::seed_seq batch_seed{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 2u};
  std::mt19937_64 batch_rng(batch_seed);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool full_batch = cfg.batch_size == cfg.n_points;
  std::vector<CollocationPoint> batch;

  const ResidualFn residual = make_hj_residual(options.hamiltonian);
  AdamState adam = AdamState::for_net(result.net);
  result.history.reserve(static_cast<std::size_t>(cfg.n_iterations));

  for (int it = 0; it < cfg.n_iterations; ++it) {
    std::span<const CollocationPoint> view(points);
    if (!full_batch) {
      // Partial Fisher-Yates: the first batch_size entries become a uniform subset.
      batch.clear();
      for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.batch_size); ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
        std::swap(order[k], order[pick(batch_rng)]);
        batch.push_back(points[order[k]]);
      }
      view = batch;
    }
    LossAndGradient lg = loss_and_weight_grad(result.net, view, residual, options.loss);
    const LossRecord rec{it, lg.loss, lg.dropped_points};
    if (options.on_iteration) options.on_iteration(rec);
    result.history.push_back(rec);
    if (!std::isfinite(lg.loss)) throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(it));
    adam_update(adam, result.net, lg.gradient, cfg);
  }
  return result;
}

}  // namespace hjpoisson
