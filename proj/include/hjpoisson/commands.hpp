#pragma once

#include "hjpoisson/bisection.hpp"
#include "hjpoisson/hj_training.hpp"
#include "hjpoisson/lie_poisson.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hjpoisson {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest decimal that parses back to the same double.
std::string format_real(double v);

/// "1,1,2" -> (1, 1, 2). Throws std::invalid_argument.
Vec3 parse_initial_condition(std::string_view text);

/// <stem>.<suffix> next to `output`, e.g. model.json -> model.manifest.json.
std::filesystem::path sibling_path(const std::filesystem::path& output, std::string_view suffix);

struct TrainCommand {
  std::optional<std::filesystem::path> config_path;
  bool full_paper_scale = false;
  std::filesystem::path out_model;
  LossOptions loss;
  int log_every = 500;
};

struct SimulateCommand {
  std::filesystem::path model_path;
  Vec3 initial_condition = Vec3(1, 1, 2);
  double h = 0.1;
  int steps = 200;
  std::filesystem::path out_csv;
  NewtonConfig newton;
};

struct CheckCommand {
  std::optional<std::filesystem::path> model_path;
  std::filesystem::path out_report;
  std::uint64_t seed = 1;
};

struct CompareCommand {
  std::optional<std::filesystem::path> model_path;
  bool oracle_self = false;
  Vec3 initial_condition = Vec3(1, 1, 2);
  double h = 0.1;
  int steps = 200;
  int oracle_substeps = 100;
  std::filesystem::path out_csv;
  NewtonConfig newton;
};

// Exit codes: 0 success, 1 run failure or failed check, 2 bad input.
int cmd_train(const TrainCommand& cmd, std::ostream& log);
int cmd_simulate(const SimulateCommand& cmd, std::ostream& log);
int cmd_check(const CheckCommand& cmd, std::ostream& log);
int cmd_compare(const CompareCommand& cmd, std::ostream& log);

std::string loss_history_csv(const std::vector<LossRecord>& history);
std::string trajectory_csv(const TrajectoryRecord& record, const std::vector<StepDiagnostics>& diagnostics);
std::string comparison_csv(const OracleReport& report);

}  // namespace hjpoisson
