#include "hjpoisson/property_checks.hpp"

#include "hjpoisson/bisection.hpp"
#include "hjpoisson/groupoid.hpp"
#include "hjpoisson/hj_training.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hjpoisson {

namespace {

Vec3 random_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 v(u(rng), u(rng), u(rng));
    if (v.norm() <= 1.0) return radius * v;
  }
}

Vec3 log_so3(const Mat3& r) {
  const double theta = std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < 1e-8) return 0.5 * w;
  return theta / (2.0 * std::sin(theta)) * w;
}

PropertyResult at_most(std::string name, double measured, double threshold) {
  return {std::move(name), measured <= threshold, measured, threshold};
}

GeneratingFunctionNet random_net(const std::vector<int>& sizes, std::uint64_t seed) {
  GeneratingFunctionNet net = init_xavier(sizes, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> n(0.0, 0.2);
  for (auto& b : net.params.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = n(rng);
  return net;
}

double identity_at_zero(const GeneratingFunctionNet& net, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vec3 mu = random_ball(rng, 4.0);
    worst = std::max(worst, std::abs(eval_s(net, 0.0, mu)));
    worst = std::max(worst, (bisection_step(net, 0.0, mu).mu - mu).cwiseAbs().maxCoeff());
  }
  return worst;
}

double casimir_drift(const GeneratingFunctionNet& net) {
  const Rollout r = rollout(net, 0.1, Vec3(1, 1, 2), 200);
  double worst = 0.0;
  for (double c : r.record.casimir_values) worst = std::max(worst, std::abs(c - r.record.casimir_values.front()));
  return worst;
}

}  // namespace

std::vector<PropertyResult> run_property_checks(const GeneratingFunctionNet* model, std::uint64_t seed) {
  std::vector<PropertyResult> out;
  std::mt19937_64 rng(seed);
  const QuadraticHamiltonian ham;

  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Mat3 r = exp_so3(random_ball(rng, kChartRadius));
      worst = std::max({worst, (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(),
                        std::abs(r.determinant() - 1.0)});
    }
    out.push_back(at_most("exp_so3_orthogonality", worst, 1e-12));
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 x = random_ball(rng, 1.0), xi = random_ball(rng, 1.0);
      const Mat3 rx = exp_so3(x);
      const double eps = 1e-4;
      Vec3 yprime;
      for (int c = 0; c < 3; ++c) {
        auto y = [&](double s) { return log_so3(exp_so3(s * xi) * rx)[c]; };
        yprime[c] = (-y(2 * eps) + 8 * y(eps) - 8 * y(-eps) + y(-2 * eps)) / (12 * eps);
      }
      worst = std::max(worst, (dexp(x) * yprime - xi).cwiseAbs().maxCoeff());
    }
    out.push_back(at_most("dexp_finite_difference", worst, 1e-6));
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 x = kDexpSeriesThreshold * std::pow(10.0, -0.5 + i / 100.0) * random_ball(rng, 1.0).normalized();
      const double t = x.norm();
      const double hs = std::sin(0.5 * t);
      const Mat3 k = hat(x);
      const Mat3 closed = Mat3::Identity() + 2 * hs * hs / (t * t) * k + (t - std::sin(t)) / (t * t * t) * k * k;
      worst = std::max(worst, (dexp(x) - closed).cwiseAbs().maxCoeff());
    }
    out.push_back(at_most("dexp_branch_agreement", worst, 1e-12));
  }
  {
    double worst_rhs = 0.0, worst_kernel = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 mu = random_ball(rng, 10.0);
      const Vec3 rhs = euler_rhs(ham, mu);
      const Vec3 g = ham.gradient(mu);
      const double scale = std::max(rhs.norm() * std::max(mu.norm(), g.norm()), 1e-300);
      worst_rhs = std::max({worst_rhs, std::abs(g.dot(rhs)) / scale, std::abs(mu.dot(rhs)) / scale});
      worst_kernel = std::max(worst_kernel, (lie_poisson_bivector(mu) * mu).norm() / std::max(mu.squaredNorm(), 1e-300));
    }
    out.push_back(at_most("euler_rhs_conserves_h_and_c", worst_rhs, 1e-14));
    out.push_back(at_most("casimir_in_bivector_kernel", worst_kernel, 1e-14));
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 mu = random_ball(rng, 50.0);
      worst = std::max({worst, (source(unit(mu)) - mu).cwiseAbs().maxCoeff(),
                        (target(unit(mu)) - mu).cwiseAbs().maxCoeff()});
    }
    out.push_back(at_most("unit_round_trip", worst, 0.0));
  }
  {
    double ws = 0.0, wt = 0.0;
    for (int i = 0; i < 100; ++i) {
      const GroupoidPoint g{random_ball(rng, 0.5), random_ball(rng, 3.0)};
      ws = std::max(ws, pushforward_check(MomentumMap::Source, g, 1e-6));
      wt = std::max(wt, pushforward_check(MomentumMap::Target, g, 1e-6));
    }
    out.push_back(at_most("source_is_poisson", ws, 1e-5));
    out.push_back(at_most("target_is_anti_poisson", wt, 1e-5));
  }

  const GeneratingFunctionNet net = random_net({4, 16, 16, 1}, seed + 1);
  out.push_back(at_most("identity_at_zero", identity_at_zero(net, rng), 0.0));
  {
    double worst = 0.0;
    std::uniform_real_distribution<double> ut(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const double t = ut(rng);
      const Vec3 p = random_ball(rng, 3.0);
      const InputGradient g = eval_input_grad(net, t, p);
      const double h = 1e-6;
      const double fd_t = (eval_s(net, t + h, p) - eval_s(net, t - h, p)) / (2 * h);
      worst = std::max(worst, std::abs(fd_t - g.dt) / std::max(1.0, std::abs(g.dt)));
      for (int c = 0; c < 3; ++c) {
        Vec3 pp = p, pm = p;
        pp[c] += h;
        pm[c] -= h;
        const double fd = (eval_s(net, t, pp) - eval_s(net, t, pm)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g.dp[c]) / std::max(1.0, std::abs(g.dp[c])));
      }
    }
    out.push_back(at_most("input_gradient_matches_finite_differences", worst, 1e-6));
  }
  {
    const GeneratingFunctionNet small = random_net({4, 8, 8, 1}, seed + 2);
    std::vector<CollocationPoint> pts;
    std::uniform_real_distribution<double> ut(0.0, 0.15);
    for (int i = 0; i < 10; ++i) pts.push_back({ut(rng), random_ball(rng, 3.0)});
    const ResidualFn residual = make_hj_residual(ham);
    const LossAndGradient lg = loss_and_weight_grad(small, pts, residual, {Kernel::Serial});
    const Eigen::VectorXd analytic = lg.gradient.flatten();
    const Eigen::VectorXd theta = small.params.flatten();
    GeneratingFunctionNet probe = small;
    auto loss_at = [&](Eigen::Index i, double v) {
      Eigen::VectorXd th = theta;
      th[i] = v;
      probe.params.assign(th);
      double s = 0.0;
      for (const auto& pt : pts) {
        const double r = hj_residual(eval_input_grad(probe, pt.t, pt.p), pt.t, pt.p, ham);
        s += r * r;
      }
      return s / static_cast<double>(pts.size());
    };
    const double floor = 1e-3 * analytic.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double e = 1e-3;
      const double fd = (-loss_at(i, theta[i] + 2 * e) + 8 * loss_at(i, theta[i] + e) - 8 * loss_at(i, theta[i] - e) +
                         loss_at(i, theta[i] - 2 * e)) / (12 * e);
      worst = std::max(worst, std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), floor}));
    }
    out.push_back(at_most("weight_gradient_matches_finite_differences", worst, 1e-6));

    std::vector<CollocationPoint> many;
    for (int i = 0; i < 300; ++i) many.push_back({ut(rng), random_ball(rng, 3.0)});
    const LossAndGradient s = loss_and_weight_grad(net, many, residual, {Kernel::Serial});
    const LossAndGradient p = loss_and_weight_grad(net, many, residual, {Kernel::Parallel});
    const Eigen::VectorXd gs = s.gradient.flatten();
    const double rel = std::max(std::abs(s.loss - p.loss) / s.loss,
                                (gs - p.gradient.flatten()).cwiseAbs().maxCoeff() / gs.cwiseAbs().maxCoeff());
    out.push_back(at_most("parallel_kernel_matches_serial", rel, 1e-12));
  }
  out.push_back(at_most("casimir_exactness_random_net", casimir_drift(net), 1e-7));

  if (model != nullptr) {
    out.push_back(at_most("model_identity_at_zero", identity_at_zero(*model, rng), 0.0));
    out.push_back(at_most("model_casimir_exactness", casimir_drift(*model), 1e-7));
  }
  return out;
}

}  // namespace hjpoisson
