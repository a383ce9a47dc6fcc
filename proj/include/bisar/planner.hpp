#pragma once

#include "bisar/geometry.hpp"
#include "bisar/scenario.hpp"
#include "bisar/solver.hpp"

#include <string>
#include <vector>

namespace bisar {

// How the trajectory step models the sensing center.
//  linearized:   center from the unit heading of q_t - q_{t-1}, linearized
//                around the previous iterate with a quadratic remainder bound
//                (every accepted iterate is feasible for the original problem)
//  frozen_slack: center from the slacks (w, u) held fixed, with the
//                w dV <= dy, dx <= u dV couplings
enum class HeadingModel { linearized, frozen_slack };

enum class StepObjective { energy, distance, origin_norm, restoration };

struct PlannerOptions {
  double eps = 1e-4;
  int max_iter = 100;
  RangeMode range_mode = RangeMode::squared;
  HeadingModel heading = HeadingModel::linearized;
  StepObjective baseline_objective = StepObjective::distance;
  double trust_ratio = 0.5;       // |dq - dq_prev| <= trust_ratio |dq_prev|
  double remainder_coeff = 0.75;  // bounds the unit-vector remainder for trust_ratio <= 0.5
  double ball_margin = 1e-3;      // m kept clear of the sensing-circle edge
  double q_floor = 1e-4;
  double mu_prox = 1e-3;
  double slack_tol = 1e-6;
  int init_lookahead = 10;
  double init_speed_weight = 1.0;
  double init_margin = 10.0;  // m inside r_s targeted by the restoration
  int max_restoration_iter = 80;
  SolverOptions solver;
  std::string dump_dir;
};

struct IterationRecord {
  int iter = 0;
  double objective_J = 0.0;     // total energy, J
  double distance_m = 0.0;      // sum of |q_t - q_{t-1}|
  double surrogate = 0.0;       // subproblem objective (normalized)
  std::string step_status;
  int newton_iterations = 0;
  double max_slack = 0.0;       // feasibility-step slack, m
  double step_norm = 0.0;       // max_t |q_t - q_t_prev|
};

struct SolveReport {
  std::string planner;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool slack_warning = false;
  std::string stop_reason;
  int restoration_iterations = 0;
  double initial_energy_J = 0.0;
  double max_unity_residual = 0.0;  // max |w^2 + u^2 - 1|
  double wallclock_s = 0.0;
  FeasibilityReport feasibility;
};

struct PlanResult {
  Trajectory traj;
  SolveReport report;
};

struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Variable indices of a trajectory-step subproblem; -1 where absent.
struct StepLayout {
  std::vector<int> x, y, Vh, Vl, Q, tau, aux;
};

void finalize_power(Trajectory& traj, const Scenario& sc);
double total_distance(const Trajectory& traj);

// Piecewise-linear target through the midpoints of each landmark hold.
std::vector<Vec2> smoothed_targets(const Scenario& sc);

Trajectory greedy_track(const Scenario& sc, const PlannerOptions& opt);
Trajectory initialize(const Scenario& sc, const PlannerOptions& opt = {}, int* restoration_iters = nullptr);

ConvexSubproblem build_trajectory_step(const Trajectory& prev, const Scenario& sc, const PlannerOptions& opt,
                                       StepObjective objective, StepLayout* layout = nullptr,
                                       VectorXd* warm = nullptr, double restore_radius = 0.0);

Trajectory extract_step(const ConvexSubproblem& p, const StepLayout& layout, const VectorXd& x,
                        const Trajectory& prev, const Scenario& sc);

ConvexSubproblem build_feasibility_step(const Trajectory& cur, const Scenario& sc, int slot,
                                        const PlannerOptions& opt, VectorXd* warm = nullptr);

struct FeasibilityStepResult {
  double w, u, slack;
  SolveStatus status;
};
FeasibilityStepResult solve_feasibility_step(const Trajectory& cur, const Scenario& sc, int slot,
                                             const PlannerOptions& opt);

PlanResult plan_sca_bcd(const Scenario& sc, const PlannerOptions& opt = {});
PlanResult plan_baseline(const Scenario& sc, const PlannerOptions& opt = {});

}  // namespace bisar
