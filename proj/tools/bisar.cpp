#include "bisar/harness.hpp"
#include "bisar/log.hpp"
#include "bisar/power.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace bisar;

namespace {

// "paper" is the interface spelling of the squared mode
RangeMode parse_range_mode(const std::string& s) {
  if (s == "squared" || s == "paper") return RangeMode::squared;
  if (s == "exact") return RangeMode::exact;
  throw ScenarioError("--range-mode must be squared or exact");
}

struct PlanArgs {
  std::string scenario, out, range_mode = "squared", heading = "linearized", baseline_objective = "distance";
  std::string dump;
  double eps = 1e-4;
  int max_iters = 100;
  std::uint64_t seed = 0;
  int realizations = 1;
  int circle_every = 20;
};

void add_plan_options(CLI::App* cmd, PlanArgs& a) {
  cmd->add_option("--scenario", a.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--eps", a.eps, "relative objective decrease for termination");
  cmd->add_option("--max-iters", a.max_iters, "outer iteration cap");
  cmd->add_option("--range-mode", a.range_mode, "squared (alias paper) or exact")
      ->check(CLI::IsMember({"squared", "paper", "exact"}));
  cmd->add_option("--seed", a.seed, "seed for random landmark realizations");
  cmd->add_option("--realizations", a.realizations, "random-pattern realizations for the mean energy series");
  cmd->add_option("--heading-model", a.heading, "linearized or frozen")
      ->check(CLI::IsMember({"linearized", "frozen"}));
  cmd->add_option("--baseline-objective", a.baseline_objective, "distance or origin")
      ->check(CLI::IsMember({"distance", "origin"}));
  cmd->add_option("--circle-every", a.circle_every, "sensing-circle sampling stride in slots");
  cmd->add_option("--dump-subproblems", a.dump, "directory for subproblem text dumps");
}

int run_plan(const std::string& algo, const PlanArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  RunConfig cfg;
  cfg.algo = algo;
  cfg.out_dir = a.out;
  cfg.seed = a.seed;
  cfg.realizations = a.realizations;
  cfg.circle_every = a.circle_every;
  cfg.planner.eps = a.eps;
  cfg.planner.max_iter = a.max_iters;
  cfg.planner.range_mode = parse_range_mode(a.range_mode);
  cfg.planner.heading = a.heading == "frozen" ? HeadingModel::frozen_slack : HeadingModel::linearized;
  cfg.planner.baseline_objective =
      a.baseline_objective == "origin" ? StepObjective::origin_norm : StepObjective::distance;
  cfg.planner.dump_dir = a.dump;
  const auto id = std::filesystem::path(a.scenario).stem().string();
  const auto ex = run_experiment(sc, id, cfg);

  int code = kExitOk;
  for (const auto& r : ex.runs) {
    const auto& rep = r.result.report;
    std::printf("%-9s energy %.3f J  iterations %d  %s\n", r.name.c_str(), r.result.traj.total_energy,
                static_cast<int>(rep.iterations.size()) - 1, rep.converged ? "converged" : rep.stop_reason.c_str());
    if (!rep.feasibility.pass) code = kExitVerification;
    else if (!rep.converged && code == kExitOk) code = kExitNonConvergence;
  }
  if (ex.energy_saving_fraction) std::printf("energy saving fraction %.4f\n", *ex.energy_saving_fraction);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Energy-efficient trajectory planning for a bistatic SAR drone receiver"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "run the SCA/BCD planner");
  auto* base = app.add_subcommand("baseline", "run the distance-minimizing baseline");
  auto* both = app.add_subcommand("both", "run both planners and compare");
  for (auto* c : {plan, base, both}) add_plan_options(c, plan_args);

  std::string preset_name, preset_out;
  double spacing = 0.0, altitude = 0.0;
  std::uint64_t preset_seed = 0;
  auto* preset = app.add_subcommand("preset", "write a fully expanded scenario file");
  preset->add_option("name", preset_name, "turn30|turn200|staircase30|square100|random100")->required();
  preset->add_option("--out", preset_out, "scenario file to write")->required();
  auto* sp_opt = preset->add_option("--spacing", spacing, "landmark spacing override, m");
  auto* alt_opt = preset->add_option("--altitude", altitude, "flight altitude override, m");
  preset->add_option("--seed", preset_seed, "seed for the random pattern");

  std::string v_traj, v_scen, v_mode = "squared";
  double v_tol = 1e-3;
  auto* verify = app.add_subcommand("verify", "check a trajectory against the original constraints");
  verify->add_option("--trajectory", v_traj)->required()->check(CLI::ExistingFile);
  verify->add_option("--scenario", v_scen)->required()->check(CLI::ExistingFile);
  verify->add_option("--range-mode", v_mode)->check(CLI::IsMember({"squared", "paper", "exact"}));
  verify->add_option("--tol", v_tol, "allowed violation, m");

  auto* stats = app.add_subcommand("stats", "stochastic-geometry utilities");
  stats->require_subcommand(1);
  int n = 1000, trials = 10000;
  double radius = 5000.0;
  std::string method = "mc";
  std::uint64_t stats_seed = 1;
  auto* dmin = stats->add_subcommand("dmin", "expected nearest-neighbour distance");
  dmin->add_option("--n", n, "number of objects")->check(CLI::Range(2, 100000000));
  dmin->add_option("--radius", radius, "field radius, m")->check(CLI::PositiveNumber);
  dmin->add_option("--method", method)->check(CLI::IsMember({"closed", "integrate", "mc"}));
  dmin->add_option("--trials", trials)->check(CLI::PositiveNumber);
  dmin->add_option("--seed", stats_seed);

  auto* power = app.add_subcommand("power", "propulsion power utilities");
  power->require_subcommand(1);
  double vmax = 70.0, vstep = 0.5;
  auto* curve = power->add_subcommand("curve", "propulsion power versus speed");
  curve->add_option("--vmax", vmax)->check(CLI::PositiveNumber);
  curve->add_option("--step", vstep)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return run_plan("sca", plan_args);
    if (*base) return run_plan("baseline", plan_args);
    if (*both) return run_plan("both", plan_args);

    if (*preset) {
      PresetOverrides ov;
      if (*sp_opt) ov.spacing = spacing;
      if (*alt_opt) ov.altitude = altitude;
      ov.seed = preset_seed;
      save_scenario(make_preset(preset_name, ov), preset_out);
      return kExitOk;
    }

    if (*verify) {
      const Scenario sc = load_scenario(v_scen);
      Trajectory tr = read_trajectory_csv(v_traj);
      if (tr.slots() != sc.T_w) throw ScenarioError("trajectory has " + std::to_string(tr.slots()) +
                                                    " slots, scenario has " + std::to_string(sc.T_w));
      if ((tr.positions[0] - sc.q0).norm() > 1e-6) throw ScenarioError("trajectory does not start at q0");
      const auto rep = verify_trajectory(tr, sc, parse_range_mode(v_mode), v_tol);
      std::cout << feasibility_json(rep).dump(2) << "\n";
      return rep.pass ? kExitOk : kExitVerification;
    }

    if (*dmin) {
      const auto r = expected_dmin(n, radius, parse_cdf_method(method), trials, stats_seed);
      std::cout << dmin_json(r).dump() << "\n";
      return kExitOk;
    }

    if (*curve) {
      const PowerParams pp;
      std::printf("V_mps,P_W\n");
      const int steps = static_cast<int>(std::floor(vmax / vstep + 1e-9));
      for (int i = 0; i <= steps; ++i) {
        const double V = i * vstep;
        std::printf("%.17g,%.17g\n", V, propulsion_power(V, pp));
      }
      return kExitOk;
    }
  } catch (const ScenarioError& e) {
    log_error(e.what());
    std::fprintf(stderr, "scenario error: %s\n", e.what());
    return kExitScenario;
  } catch (const PlannerError& e) {
    std::fprintf(stderr, "planner error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
