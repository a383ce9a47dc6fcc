#pragma once

#include "bisar/planner.hpp"
#include "bisar/stochastic.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bisar {

enum ExitCode { kExitOk = 0, kExitScenario = 2, kExitNonConvergence = 3, kExitVerification = 4 };

struct PresetOverrides {
  std::optional<double> spacing;
  std::optional<double> altitude;
  std::uint64_t seed = 0;
};

std::vector<std::string> preset_names();
// Scenario with an explicit landmark list; throws ScenarioError on an unknown name.
Scenario make_preset(const std::string& name, const PresetOverrides& ov = {});

void write_trajectory_csv(const Trajectory& traj, const Scenario& sc, const std::string& path);
// Row 0 carries q_0; rows 1..T carry the slots.
Trajectory read_trajectory_csv(const std::string& path);

nlohmann::json feasibility_json(const FeasibilityReport& rep);
nlohmann::json report_json(const PlanResult& res);
nlohmann::json dmin_json(const DminResult& r);

double per_slot_energy_stddev(const Trajectory& traj, const Scenario& sc);

struct PlannerRun {
  std::string name;
  std::string dir;
  PlanResult result;
};

struct ExperimentResult {
  std::string scenario_id;
  std::vector<PlannerRun> runs;
  std::optional<double> energy_saving_fraction;
  std::vector<double> mean_energy_series;  // over realizations, proposed planner
  int realizations = 1;
};

struct RunConfig {
  std::string algo = "both";  // sca | baseline | both
  std::string out_dir;
  std::uint64_t seed = 0;
  int realizations = 1;  // > 1 only for random landmark patterns
  int circle_every = 20;
  PlannerOptions planner;
};

ExperimentResult run_experiment(const Scenario& sc, const std::string& scenario_id, const RunConfig& cfg);

}  // namespace bisar
