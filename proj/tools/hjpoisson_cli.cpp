#include "hjpoisson/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hjpoisson;

namespace {

void add_initial_condition(CLI::App* app, Vec3& target) {
  app->add_option_function<std::string>(
         "--initial-condition,--ic", [&target](const std::string& s) { target = parse_initial_condition(s); },
         "initial momentum as comma-separated reals, e.g. 1,1,2")
      ->default_str("1,1,2");
}

void add_newton(CLI::App* app, NewtonConfig& n) {
  app->add_option("--newton-tol", n.tolerance, "Newton residual tolerance")->capture_default_str();
  app->add_option("--newton-max-iter", n.max_iterations, "Newton iteration cap")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Hamilton-Jacobi generating functions and Poisson integration of the free rigid body"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  TrainCommand train;
  std::string kernel = "parallel";
  auto* t = app.add_subcommand("train", "train a generating function network");
  t->add_option("--config", train.config_path, "training config (JSON); defaults to desk scale");
  t->add_flag("--full-paper-scale", train.full_paper_scale, "80k points, 500-250-250-250, 10k iterations, lr 1e-4");
  t->add_option("-o,--out", train.out_model, "output weight file")->required();
  t->add_option("--kernel", kernel, "loss kernel")->check(CLI::IsMember({"serial", "parallel"}))->capture_default_str();
  t->add_option("--chunk-size", train.loss.chunk_size, "collocation points per parallel chunk")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->add_option("--log-every", train.log_every, "progress interval in iterations (0 = quiet)")->capture_default_str();

  SimulateCommand sim;
  auto* s = app.add_subcommand("simulate", "roll out the learned Poisson map");
  s->add_option("-m,--model", sim.model_path, "weight file")->required();
  add_initial_condition(s, sim.initial_condition);
  s->add_option("--step-size", sim.h, "step size h")->capture_default_str();
  s->add_option("--steps", sim.steps, "number of steps")->capture_default_str();
  s->add_option("-o,--out", sim.out_csv, "trajectory CSV")->required();
  add_newton(s, sim.newton);

  CheckCommand check;
  auto* c = app.add_subcommand("check", "run the structural property suite");
  c->add_option("-m,--model", check.model_path, "optional weight file to include");
  c->add_option("-o,--out", check.out_report, "JSON report")->required();
  c->add_option("--seed", check.seed, "sampling seed")->capture_default_str();

  CompareCommand cmp;
  auto* k = app.add_subcommand("compare", "compare a rollout against the RK4 reference");
  auto* model_opt = k->add_option("-m,--model", cmp.model_path, "weight file");
  k->add_flag("--oracle-self", cmp.oracle_self, "compare the reference with itself")->excludes(model_opt);
  add_initial_condition(k, cmp.initial_condition);
  k->add_option("--step-size", cmp.h, "step size h")->capture_default_str();
  k->add_option("--steps", cmp.steps, "number of steps")->capture_default_str();
  k->add_option("--oracle-substeps", cmp.oracle_substeps, "RK4 substeps per step")->capture_default_str();
  k->add_option("-o,--out", cmp.out_csv, "comparison CSV")->required();
  add_newton(k, cmp.newton);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (*t) {
    train.loss.kernel = kernel == "serial" ? Kernel::Serial : Kernel::Parallel;
    return cmd_train(train, std::cerr);
  }
  if (*s) return cmd_simulate(sim, std::cerr);
  if (*c) return cmd_check(check, std::cerr);
  return cmd_compare(cmp, std::cerr);
}
