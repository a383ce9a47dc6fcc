#include "bisar/power.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>

namespace bisar {

double parasite_coeff(const PowerParams& pp) { return 0.5 * pp.d_f * pp.rho * pp.s * pp.A; }

double q_star(double V, const PowerParams& pp) {
  const double r = V * V / (pp.v0 * pp.v0);
  // sqrt(1 + r^2/4) - r/2 written as 1/(sqrt(1 + r^2/4) + r/2) to avoid cancellation
  return std::sqrt(1.0 / (std::sqrt(1.0 + 0.25 * r * r) + 0.5 * r));
}

double reformulated_power(double V, double q, const PowerParams& pp) {
  return pp.P0 + 3.0 * pp.P0 * V * V / (pp.U_tip * pp.U_tip) + pp.P1 * q + parasite_coeff(pp) * V * V * V;
}

double propulsion_power(double V, const PowerParams& pp) { return reformulated_power(V, q_star(V, pp), pp); }

PowerEval evaluate_power(double V, const PowerParams& pp) {
  const double q = q_star(V, pp);
  return {V, reformulated_power(V, q, pp), q};
}

double induced_lower_bound(double q, double V, double q_bar, double V_bar, const PowerParams& pp) {
  const double iv = 1.0 / (pp.v0 * pp.v0);
  return q_bar * q_bar + V_bar * V_bar * iv + 2.0 * q_bar * (q - q_bar) + 2.0 * V_bar * iv * (V - V_bar);
}

PowerEval min_power(const PowerParams& pp, double lo, double hi) {
  auto r = boost::math::tools::brent_find_minima([&](double v) { return propulsion_power(v, pp); }, lo, hi, 50);
  return evaluate_power(r.first, pp);
}

}  // namespace bisar
