#include "hjpoisson/commands.hpp"

#include "hjpoisson/errors.hpp"
#include "hjpoisson/property_checks.hpp"
#include "hjpoisson/weights_io.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hjpoisson {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::string started_at;
  std::vector<fs::path> outputs;
  json arguments = json::object();

  void write(const fs::path& path) const {
    json doc;
    doc["command"] = command;
    doc["config_digest"] = config_digest;
    doc["seed"] = seed ? json(*seed) : json(nullptr);
    doc["timestamps"] = {{"started", started_at}, {"finished", utc_now()}};
    doc["output_paths"] = json::array();
    for (const auto& p : outputs) doc["output_paths"].push_back(p.string());
    doc["tool_version"] = kToolVersion;
    doc["arguments"] = arguments;
    write_text_file(path, doc.dump(2) + "\n");
  }
};

std::string model_digest(const GeneratingFunctionNet& net) {
  return net.training_config_digest.value_or("");
}

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

// Returns nullopt after reporting on `log` if the model cannot be read.
std::optional<GeneratingFunctionNet> load_model(const fs::path& path, std::ostream& log) {
  try {
    return load_weights(path);
  } catch (const FormatError& e) {
    log << "error: cannot load model " << path << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    log << "error: cannot load model " << path << ": " << e.what() << "\n";
  }
  return std::nullopt;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Vec3 parse_initial_condition(std::string_view text) {
  Vec3 out;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = i < 2 ? text.find(',', pos) : text.size();
    if (comma == std::string_view::npos) throw std::invalid_argument("initial condition needs three comma-separated reals");
    std::string_view field = text.substr(pos, comma - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size())
      throw std::invalid_argument("bad initial condition component '" + std::string(field) + "'");
    out[i] = v;
    pos = comma + 1;
  }
  if (pos <= text.size()) throw std::invalid_argument("initial condition needs exactly three components");
  return out;
}

fs::path sibling_path(const fs::path& output, std::string_view suffix) {
  fs::path p = output;
  p.replace_extension();
  p += ".";
  p += std::string(suffix);
  return p;
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
  std::string out = "iteration,loss,dropped_points\n";
  for (const auto& r : history)
    out += std::to_string(r.iteration) + "," + format_real(r.loss) + "," + std::to_string(r.dropped_points) + "\n";
  return out;
}

std::string trajectory_csv(const TrajectoryRecord& record, const std::vector<StepDiagnostics>& diagnostics) {
  std::string out = "step,t,mu1,mu2,mu3,H,C,newton_iters,newton_residual\n";
  for (std::size_t k = 0; k < record.size(); ++k) {
    const Vec3& mu = record.states[k];
    const StepDiagnostics d = k == 0 || k - 1 >= diagnostics.size() ? StepDiagnostics{} : diagnostics[k - 1];
    out += std::to_string(k) + "," + format_real(static_cast<double>(k) * record.step_size) + "," +
           format_real(mu[0]) + "," + format_real(mu[1]) + "," + format_real(mu[2]) + "," +
           format_real(record.hamiltonian_values[k]) + "," + format_real(record.casimir_values[k]) + "," +
           std::to_string(d.newton_iterations) + "," + format_real(d.final_residual) + "\n";
  }
  return out;
}

std::string comparison_csv(const OracleReport& report) {
  std::string out = "step,t,error_norm,H_model,H_oracle,C_model,C_oracle\n";
  for (std::size_t k = 0; k < report.time.size(); ++k)
    out += std::to_string(k) + "," + format_real(report.time[k]) + "," + format_real(report.error_norm[k]) + "," +
           format_real(report.h_model[k]) + "," + format_real(report.h_oracle[k]) + "," +
           format_real(report.c_model[k]) + "," + format_real(report.c_oracle[k]) + "\n";
  return out;
}

int cmd_train(const TrainCommand& cmd, std::ostream& log) {
  Manifest manifest{"train", "", std::nullopt, utc_now(), {}, {}};
  TrainingConfig cfg;
  try {
    if (cmd.full_paper_scale && cmd.config_path) {
      log << "error: --full-paper-scale and a config file are mutually exclusive\n";
      return 2;
    }
    if (cmd.full_paper_scale) {
      cfg = TrainingConfig::full_paper_scale();
    } else if (cmd.config_path) {
      cfg = config_from_string(read_text_file(*cmd.config_path));
    }
    cfg.validate();
  } catch (const FormatError& e) {
    log << "error: bad config (field '" << e.field() << "'): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: bad config: " << e.what() << "\n";
    return 2;
  }
  manifest.config_digest = config_digest(cfg);
  manifest.seed = cfg.seed;
  manifest.arguments = {{"config", cmd.config_path ? cmd.config_path->string() : ""},
                        {"full_paper_scale", cmd.full_paper_scale},
                        {"kernel", cmd.loss.kernel == Kernel::Serial ? "serial" : "parallel"}};

  TrainOptions options;
  options.loss = cmd.loss;
  if (cmd.log_every > 0) {
    options.on_iteration = [&](const LossRecord& r) {
      if (r.iteration % cmd.log_every == 0) log << "iteration " << r.iteration << " loss " << r.loss << "\n";
    };
  }
  TrainingResult result;
  try {
    result = train(cfg, options);
  } catch (const std::exception& e) {
    log << "error: training aborted: " << e.what() << "\n";
    return 1;
  }

  const fs::path loss_csv = sibling_path(cmd.out_model, "loss.csv");
  const fs::path manifest_path = sibling_path(cmd.out_model, "manifest.json");
  try {
    save_weights(result.net, cmd.out_model);
    write_text_file(loss_csv, loss_history_csv(result.history));
    manifest.outputs = {cmd.out_model, loss_csv};
    manifest.write(manifest_path);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  if (!result.history.empty())
    log << "final loss " << result.history.back().loss << " (initial " << result.history.front().loss << ")\n";
  return 0;
}

int cmd_simulate(const SimulateCommand& cmd, std::ostream& log) {
  Manifest manifest{"simulate", "", std::nullopt, utc_now(), {}, {}};
  if (cmd.steps < 0 || !(cmd.h >= 0.0)) {
    log << "error: steps must be >= 0 and h >= 0\n";
    return 2;
  }
  const auto net = load_model(cmd.model_path, log);
  if (!net) return 2;
  manifest.config_digest = model_digest(*net);
  manifest.seed = net->seed;
  manifest.arguments = {{"model", cmd.model_path.string()},
                        {"initial_condition", vec_json(cmd.initial_condition)},
                        {"h", cmd.h},
                        {"steps", cmd.steps}};
  manifest.outputs = {cmd.out_csv};

  int status = 0;
  std::string csv;
  try {
    const Rollout r = rollout(*net, cmd.h, cmd.initial_condition, cmd.steps, cmd.newton);
    csv = trajectory_csv(r.record, r.diagnostics);
  } catch (const RolloutAborted& e) {
    csv = trajectory_csv(e.partial(), e.diagnostics());
    log << "error: Newton failure at step " << e.step() << ": " << e.what() << "\n";
    status = 1;
  }
  try {
    write_text_file(cmd.out_csv, csv);
    manifest.write(sibling_path(cmd.out_csv, "manifest.json"));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}

int cmd_compare(const CompareCommand& cmd, std::ostream& log) {
  Manifest manifest{"compare", "", std::nullopt, utc_now(), {}, {}};
  if (cmd.steps < 0 || !(cmd.h > 0.0) || cmd.oracle_substeps < 1) {
    log << "error: steps must be >= 0, h > 0 and oracle substeps >= 1\n";
    return 2;
  }
  if (cmd.oracle_self == cmd.model_path.has_value()) {
    log << "error: give exactly one of a model file or --oracle-self\n";
    return 2;
  }
  const QuadraticHamiltonian ham;
  int status = 0;
  TrajectoryRecord traj;
  if (cmd.oracle_self) {
    traj = oracle_trajectory(ham, cmd.initial_condition, cmd.h, cmd.steps, cmd.oracle_substeps);
  } else {
    const auto net = load_model(*cmd.model_path, log);
    if (!net) return 2;
    manifest.config_digest = model_digest(*net);
    manifest.seed = net->seed;
    try {
      traj = rollout(*net, cmd.h, cmd.initial_condition, cmd.steps, cmd.newton, ham).record;
    } catch (const RolloutAborted& e) {
      traj = e.partial();
      log << "error: Newton failure at step " << e.step() << ": " << e.what() << "\n";
      status = 1;
    }
  }
  manifest.arguments = {{"model", cmd.model_path ? cmd.model_path->string() : ""},
                        {"oracle_self", cmd.oracle_self},
                        {"initial_condition", vec_json(cmd.initial_condition)},
                        {"h", cmd.h},
                        {"steps", cmd.steps},
                        {"oracle_substeps", cmd.oracle_substeps}};
  manifest.outputs = {cmd.out_csv};
  try {
    const OracleReport report = compare_with_oracle(traj, ham, cmd.oracle_substeps);
    write_text_file(cmd.out_csv, comparison_csv(report));
    manifest.write(sibling_path(cmd.out_csv, "manifest.json"));
    log << "max error " << report.max_error << ", max H drift " << report.max_h_drift << ", max C drift "
        << report.max_c_drift << "\n";
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}

int cmd_check(const CheckCommand& cmd, std::ostream& log) {
  json report;
  report["tool_version"] = kToolVersion;
  report["seed"] = cmd.seed;
  std::optional<GeneratingFunctionNet> net;
  if (cmd.model_path) {
    report["model"] = cmd.model_path->string();
    try {
      net = load_weights(*cmd.model_path);
    } catch (const FormatError& e) {
      report["error"] = {{"kind", "model_load"}, {"field", e.field()}, {"message", e.what()}};
    } catch (const std::exception& e) {
      report["error"] = {{"kind", "model_load"}, {"field", ""}, {"message", e.what()}};
    }
    if (!net) {
      log << "error: cannot load model: " << report["error"]["message"].get<std::string>() << "\n";
      report["passed"] = false;
      report["properties"] = json::array();
      write_text_file(cmd.out_report, report.dump(2) + "\n");
      return 2;
    }
  }

  const auto results = run_property_checks(net ? &*net : nullptr, cmd.seed);
  bool all = true;
  report["properties"] = json::array();
  for (const auto& r : results) {
    report["properties"].push_back(
        {{"name", r.name}, {"passed", r.passed}, {"measured", r.measured}, {"threshold", r.threshold}});
    log << (r.passed ? "PASS " : "FAIL ") << r.name << " measured " << r.measured << " threshold " << r.threshold
        << "\n";
    all = all && r.passed;
  }
  report["passed"] = all;
  write_text_file(cmd.out_report, report.dump(2) + "\n");
  return all ? 0 : 1;
}

}  // namespace hjpoisson
