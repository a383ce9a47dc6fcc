#pragma once

#include "bisar/scenario.hpp"

namespace bisar {

struct PowerEval {
  double V;
  double P;
  double q_star;
};

// Coefficient of the parasite V^3 term, 0.5 d_f rho s A.
double parasite_coeff(const PowerParams& pp);

double propulsion_power(double V, const PowerParams& pp);
double q_star(double V, const PowerParams& pp);
double reformulated_power(double V, double q, const PowerParams& pp);
PowerEval evaluate_power(double V, const PowerParams& pp);

// First-order expansion of q^2 + V^2/v0^2 around (q_bar, V_bar); a global
// under-estimator since the expression is jointly convex.
double induced_lower_bound(double q, double V, double q_bar, double V_bar, const PowerParams& pp);

// Minimum of P over [lo, hi] (P is unimodal on [0, V_m] for rotary wings).
PowerEval min_power(const PowerParams& pp, double lo, double hi);

}  // namespace bisar
