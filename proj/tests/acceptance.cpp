// End-to-end acceptance run: structural properties, one desk-scale training run and its rerun.
// Prints one PASS/FAIL line per criterion; artifacts go to the directory given as argv[1].

#include "hjpoisson/bisection.hpp"
#include "hjpoisson/commands.hpp"
#include "hjpoisson/groupoid.hpp"
#include "hjpoisson/hj_training.hpp"
#include "hjpoisson/weights_io.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace hjpoisson;
using hjpoisson::testing::perturbed;
using hjpoisson::testing::random_box;
using hjpoisson::testing::random_vec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& measured) {
  std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", id, what.c_str(), measured.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& line) {
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_drift(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x - v.front()));
  return worst;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = init_xavier({4, 64, 64, 64, 1}, seed);
    try {
      const Rollout r = rollout(net, 0.1, Vec3(1, 1, 2), 1000);
      worst = std::max(worst, max_drift(r.record.casimir_values));
    } catch (const std::exception& e) {
      note(std::string("seed ") + std::to_string(seed) + ": " + e.what());
      ok = false;
    }
  }
  const double secs = seconds_since(t0);
  report(1, ok && worst <= 1e-7 && secs < 120.0, "untrained Casimir drift over 1000 steps, 5 seeds",
         "max drift " + sci(worst) + " <= 1e-7, " + sci(secs) + " s < 120 s");
}

void criterion2() {
  std::mt19937_64 rng(2);
  double ws = 0.0, wt = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupoidPoint g{random_vec(rng, 0.5), random_vec(rng, 3.0)};
    ws = std::max(ws, pushforward_check(MomentumMap::Source, g, 1e-6));
    wt = std::max(wt, pushforward_check(MomentumMap::Target, g, 1e-6));
  }
  report(2, ws <= 1e-5 && wt <= 1e-5, "source Poisson and target anti-Poisson at 100 chart points",
         "source " + sci(ws) + ", target " + sci(wt) + " <= 1e-5");
}

void criterion3() {
  std::mt19937_64 rng(3);
  const auto net = perturbed(init_xavier({4, 8, 8, 1}, 3), 4, 0.2);
  std::uniform_real_distribution<double> ut(0.0, 0.15);
  std::vector<CollocationPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({ut(rng), random_box(rng, 3.0)});
  const QuadraticHamiltonian ham;
  const Eigen::VectorXd analytic = loss_and_weight_grad(net, pts, make_hj_residual(ham)).gradient.flatten();
  const Eigen::VectorXd theta = net.params.flatten();
  GeneratingFunctionNet probe = net;
  auto loss = [&](Eigen::Index i, double v) {
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
  // Entries far below the gradient's scale are compared against that scale.
  const double floor = 1e-3 * analytic.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double fd = hjpoisson::testing::derivative5([&](double v) { return loss(i, v); }, theta[i], 1e-3);
    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), floor}));
  }
  report(3, worst <= 1e-6, "weight gradient vs central differences, (4,8,8,1), 10 points",
         "max relative error " + sci(worst) + " <= 1e-6 over " + std::to_string(theta.size()) + " parameters");
}

struct TrainingRun {
  bool ok = false;
  GeneratingFunctionNet net;
  fs::path loss_csv;
  std::vector<double> losses;
};

TrainingRun train_desk(const fs::path& dir, const std::string& name) {
  TrainingRun run;
  const fs::path config = dir / "desk_config.json";
  write_text_file(config, config_to_string(TrainingConfig::desk_scale()));
  TrainCommand cmd;
  cmd.config_path = config;
  cmd.out_model = dir / (name + ".json");
  cmd.log_every = 1000;
  std::ostringstream log;
  const int rc = cmd_train(cmd, log);
  std::istringstream lines(log.str());
  for (std::string line; std::getline(lines, line);) note(line);
  if (rc != 0) return run;
  run.ok = true;
  run.net = load_weights(cmd.out_model);
  run.loss_csv = sibling_path(cmd.out_model, "loss.csv");
  std::istringstream csv(read_text_file(run.loss_csv));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    run.losses.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  return run;
}

void criterion4(const TrainingRun& run) {
  std::mt19937_64 rng(4);
  bool identity = true;
  for (int i = 0; i < 20; ++i) {
    const auto net = perturbed(init_xavier({4, 32, 32, 1}, 40 + i), 80 + i, 0.5);
    const Vec3 mu = random_vec(rng, 5.0);
    identity = identity && bisection_step(net, 0.0, mu).mu == mu && bisection_step(run.net, 0.0, mu).mu == mu;
  }
  const QuadraticHamiltonian ham;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = random_box(rng, 3.0);
    const double hp = ham.value(p);
    worst = std::max(worst, std::abs(eval_raw(run.net, 0.0, p) + hp) / (1.0 + hp));
  }
  report(4, identity && worst <= 0.05, "h=0 identity and N(0,p) = -H(p) at 100 held-out p",
         std::string("identity ") + (identity ? "exact" : "broken") + ", max |N+H|/(1+H) " + sci(worst) +
             " <= 0.05");
}

void criterion5(const TrainingRun& run, double secs) {
  bool finite = !run.losses.empty();
  for (double l : run.losses) finite = finite && std::isfinite(l);
  const double ratio = finite ? run.losses.back() / run.losses.front() : NAN;
  report(5, run.ok && finite && ratio <= 1e-2 && secs < 900.0, "desk-scale training efficacy",
         "loss " + sci(run.losses.empty() ? NAN : run.losses.front()) + " -> " +
             sci(run.losses.empty() ? NAN : run.losses.back()) + ", ratio " + sci(ratio) + " <= 1e-2, " +
             sci(secs) + " s < 900 s");
}

void criterion6(const TrainingRun& run, const fs::path& dir) {
  const QuadraticHamiltonian ham;
  bool ok = true;
  std::string summary;
  for (const Vec3& mu0 : {Vec3(1, 1, 2), Vec3(3, 2, 0)}) {
    const std::string tag = "(" + format_real(mu0[0]) + "," + format_real(mu0[1]) + "," + format_real(mu0[2]) + ")";
    try {
      const Rollout r = rollout(run.net, 0.1, mu0, 200);
      const OracleReport rep = compare_with_oracle(r.record, ham, 100);
      write_text_file(dir / ("compare_" + format_real(mu0[0]) + format_real(mu0[1]) + format_real(mu0[2]) + ".csv"),
                      comparison_csv(rep));
      const bool h_ok = rep.max_h_drift <= 0.05, c_ok = rep.max_c_drift <= 1e-7, e_ok = rep.max_error <= 0.5;
      ok = ok && h_ok && c_ok && e_ok;
      note(tag + ": H drift " + sci(rep.max_h_drift) + (h_ok ? " <= " : " > ") + "0.05, C drift " +
           sci(rep.max_c_drift) + (c_ok ? " <= " : " > ") + "1e-7, max deviation " + sci(rep.max_error) +
           (e_ok ? " <= " : " > ") + "0.5");
      summary += (summary.empty() ? "" : "; ") + tag + " H " + sci(rep.max_h_drift) + " C " +
                 sci(rep.max_c_drift) + " dev " + sci(rep.max_error);
    } catch (const std::exception& e) {
      note(tag + ": " + e.what());
      ok = false;
    }
  }
  report(6, ok, "200-step rollouts from (1,1,2) and (3,2,0) vs RK4", summary);
}

void criterion7(const TrainingRun& run) {
  const QuadraticHamiltonian ham;
  std::mt19937_64 rng(7);
  const double h = 1e-3;
  double min_cos = 1.0, err_h = 0.0, err_h2 = 0.0, min_ratio = INFINITY;
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    const Vec3 mu = random_box(rng, 3.0);
    try {
      const Vec3 v = (bisection_step(run.net, h, mu).mu - mu) / h;
      const Vec3 rhs = euler_rhs(ham, mu);
      min_cos = std::min(min_cos, v.dot(rhs) / (v.norm() * rhs.norm()));
      const double e1 = (bisection_step(run.net, h, mu).mu - oracle_trajectory(ham, mu, h, 1, 100).states[1]).norm();
      const double e2 =
          (bisection_step(run.net, h / 2, mu).mu - oracle_trajectory(ham, mu, h / 2, 1, 100).states[1]).norm();
      err_h += e1;
      err_h2 += e2;
      min_ratio = std::min(min_ratio, e1 / e2);
    } catch (const std::exception& e) {
      note(e.what());
      ok = false;
    }
  }
  const double ratio = err_h / err_h2;
  note("step-halving: mean error " + sci(err_h / 20) + " at h=1e-3, " + sci(err_h2 / 20) +
       " at h=5e-4, smallest per-point ratio " + sci(min_ratio));
  report(7, ok && min_cos >= 0.99 && ratio >= 3.0, "direction and step-halving consistency at h=1e-3",
         "min cosine " + sci(min_cos) + " >= 0.99, error ratio " + sci(ratio) + " >= 3");
}

void criterion8(const TrainingRun& first, const TrainingRun& second) {
  const bool same = first.ok && second.ok && read_text_file(first.loss_csv) == read_text_file(second.loss_csv);
  report(8, same, "rerun gives a byte-identical loss history",
         same ? "identical " + std::to_string(first.losses.size()) + " rows" : "differs");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "hjpoisson_acceptance";
  fs::create_directories(dir);

  criterion1();
  criterion2();
  criterion3();

  const auto t0 = std::chrono::steady_clock::now();
  const TrainingRun run = train_desk(dir, "desk_model");
  const double train_secs = seconds_since(t0);
  if (!run.ok) {
    for (int id : {4, 5, 6, 7}) report(id, false, "desk-scale training", "training failed");
  } else {
    criterion4(run);
    criterion5(run, train_secs);
    criterion6(run, dir);
    criterion7(run);
  }
  const TrainingRun rerun = train_desk(dir, "desk_model_rerun");
  criterion8(run, rerun);

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
