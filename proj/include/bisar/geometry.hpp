#pragma once

#include "bisar/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bisar {

inline constexpr double kLightSpeed = 299792458.0;

struct Trajectory {
  std::vector<Vec2> positions;  // q_0 .. q_T
  std::vector<double> V;        // per slot
  std::vector<double> w, u;     // heading slacks
  std::vector<double> q;        // induced-power auxiliary
  std::vector<double> power;    // W, from V
  double total_energy = 0.0;    // J

  int slots() const { return static_cast<int>(V.size()); }
};

struct Heading {
  double sin_a;
  double cos_a;
  bool carried = false;  // zero displacement, previous heading reused
};

struct SensingState {
  Vec2 q;
  double V;
  double alpha;
  Vec2 center;
  double sin_theta;
  double delta_r;
  double delta_a;
};

enum class RangeMode { squared, exact };

struct RangeConstant {
  double kappa;
  bool active;  // false: every geometry meets the range requirement
  double C_r;   // squared standoff (m^2) when active
};

double standoff(const SarParams& sar);  // H tan(eta)
double min_speed(const SarParams& sar);
double slant_range(const SarParams& sar);

// Slack heading (w, u) = (dy, dx) / (delta V).
Heading heading(const Vec2& q_prev, const Vec2& q_cur, double V, double delta);
// Unit heading of the displacement; zero displacement falls back to prev.
Heading unit_heading(const Vec2& dq, const Heading& prev);

Vec2 sensing_center(const Vec2& q, double sin_a, double cos_a, const SarParams& sar);
double incidence_sine(const Vec2& center, const BsParams& bs);
double range_resolution(double sin_theta, const SarParams& sar);
double azimuth_resolution(double V, const SarParams& sar);
std::optional<double> sensing_area_size(const SarParams& sar);

RangeConstant range_constant(const Scenario& sc, RangeMode mode);

struct ConstraintCheck {
  std::string name;
  bool pass = true;
  double worst_margin = 0.0;
  int worst_slot = -1;  // 1-based, -1 if no slots
  std::vector<char> slot_ok;
};

struct FeasibilityReport {
  std::vector<ConstraintCheck> checks;
  double min_speed = 0.0;
  double max_heading_residual = 0.0;  // | |dq| - delta V | / (delta V)
  std::vector<int> carried_heading_slots;
  bool pass = true;

  const ConstraintCheck* find(const std::string& name) const;
};

std::vector<SensingState> sensing_states(const Trajectory& traj, const Scenario& sc);

// Checks the original constraints with headings taken from the positions,
// never from the slacks. Margins are in metres (speed margin in m/s).
FeasibilityReport verify_trajectory(const Trajectory& traj, const Scenario& sc, RangeMode mode,
                                    double tol = 1e-3);

}  // namespace bisar
