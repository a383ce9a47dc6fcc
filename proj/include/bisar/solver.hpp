#pragma once

#include <Eigen/Core>

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bisar {

using Eigen::VectorXd;

// sum_k coef_k * x[idx_k] + c
struct Affine {
  std::vector<std::pair<int, double>> terms;
  double c = 0.0;

  Affine() = default;
  explicit Affine(double c_) : c(c_) {}
  Affine& add(int i, double v) {
    terms.emplace_back(i, v);
    return *this;
  }
  double eval(const VectorXd& x) const {
    double s = c;
    for (const auto& [i, v] : terms) s += v * x[i];
    return s;
  }
};

enum class ConKind {
  linear,          // a(x) <= 0
  soc,             // ||F(x)|| <= a(x), barrier -log(a^2 - ||F||^2)
  quadratic,       // ||F(x)||^2 + a(x) <= 0
  inverse_square,  // 1/x_j^2 <= a(x)
};

struct Constraint {
  ConKind kind = ConKind::linear;
  std::string tag;
  Affine a;
  std::vector<Affine> F;
  int var = -1;

  // Natural-unit value; <= 0 means satisfied.
  double value(const VectorXd& x) const;
};

Constraint linear_le(Affine a, std::string tag = {});
Constraint soc_le(std::vector<Affine> F, Affine a, std::string tag = {});
Constraint quadratic_le(std::vector<Affine> F, Affine a, std::string tag = {});
Constraint inverse_square_le(int var, Affine a, std::string tag = {});

// constant + sum_i lin_i x_i + quad_i x_i^2 + cubic_i x_i^3
struct Objective {
  double constant = 0.0;
  VectorXd lin, quad, cubic;
};

struct ConvexSubproblem {
  int n = 0;
  std::vector<std::string> names;
  VectorXd lo, hi;
  Objective obj;
  std::vector<Constraint> cons;

  int add_var(std::string name, double lo_ = -std::numeric_limits<double>::infinity(),
              double hi_ = std::numeric_limits<double>::infinity());
  void add(Constraint c) { cons.push_back(std::move(c)); }
  double objective(const VectorXd& x) const;
  // max natural-unit violation over bounds and constraints
  double max_violation(const VectorXd& x) const;
  // throws std::invalid_argument when an invariant does not hold
  void check() const;
  std::string dump() const;
};

struct SolverOptions {
  double kkt_tol = 1e-6;
  double mu0 = 1.0;
  double mu_factor = 2.0;
  // Newton decrement that ends a centering stage; the gap it leaves is
  // about centering_tol^2 / (2 t)
  double centering_tol = 1e-3;
  double ls_alpha = 0.25;
  double ls_beta = 0.5;
  int max_newton_per_stage = 200;
  int max_newton_total = 4000;
  // predicted decrease below stall_tol * |psi| is rounding noise; a failed
  // line search there counts as centered
  double stall_tol = 1e-9;
  // start a warm-started solve at the barrier parameter that best centers it
  bool warm_start_t = true;
};

enum class SolveStatus { optimal, max_iter, infeasible };

std::string to_string(SolveStatus s);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::max_iter;
  VectorXd x;
  double objective = 0.0;
  KktResiduals kkt;
  int iterations = 0;
  double newton_decrement = 0.0;
  double phase_one_slack = 0.0;  // min slack when phase one ran
  bool used_phase_one = false;
  std::string message;
};

struct PhaseOneOutcome {
  bool feasible = false;
  bool certified_infeasible = false;  // the barrier dual bound proved min s > 0
  VectorXd x;
  double s = 0.0;
  int iterations = 0;
};

// True when x is inside the open domain of every barrier.
bool strictly_feasible(const ConvexSubproblem& p, const VectorXd& x);

// centered: return a central point of the phase-one problem instead of the
// first strictly feasible iterate.
PhaseOneOutcome phase_one(const ConvexSubproblem& p, const VectorXd* start = nullptr,
                          const SolverOptions& opt = {}, bool centered = false);

SolveOutcome solve(const ConvexSubproblem& p, const VectorXd* warm_start = nullptr, const SolverOptions& opt = {});

}  // namespace bisar
