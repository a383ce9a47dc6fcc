#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisar {

using Vec2 = Eigen::Vector2d;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rotary-wing propulsion constants. mass is carried for reference only.
struct PowerParams {
  double P0 = 3.4;
  double P1 = 118.0;
  double U_tip = 60.0;
  double v0 = 5.4;
  double d_f = 0.3;
  double rho = 1.225;
  double s = 0.02;
  double A = 0.5;
  double V_m = 50.0;
  double mass = 2.0;
};

struct SarParams {
  double B = 1.5e8;
  double lambda_c = 0.1;
  double T_d = 1.0;
  double eta = 0.78539816339744830962;
  double H = 1000.0;
  std::optional<double> W_a;
  std::optional<double> L_a;
  double r_s = 150.0;
  double d_min = 20.0;
};

struct BsParams {
  Vec2 q_b{1000.0, -1000.0};
  double H_b = 50.0;
};

// How the landmark list was produced; kept so presets can be re-emitted.
struct LandmarkSource {
  std::string pattern;  // "list", "turn", "staircase", "square", "random"
  double spacing = 0.0;
  int count = 0;
  int hold = 0;
  std::uint64_t seed = 0;
  std::vector<Vec2> points;  // unexpanded list
  bool hold_defaulted = false;
};

struct Scenario {
  PowerParams power;
  SarParams sar;
  BsParams bs;
  Vec2 q0{-1000.0, -500.0};
  double delta = 0.5;
  int T_w = 600;
  std::vector<Vec2> landmarks;  // one per slot
  LandmarkSource source;

  double horizon() const { return delta * T_w; }
};

// Landmarks along +y from the origin, then along +x from the last y point.
std::vector<Vec2> turn_points(double spacing, int count);
std::vector<Vec2> staircase_points(double spacing, int count, int run);
std::vector<Vec2> square_points(double spacing, int count);
std::vector<Vec2> random_turn_points(double max_spacing, int count, std::uint64_t seed);

std::vector<Vec2> expand_schedule(const std::vector<Vec2>& points, int hold);
std::vector<Vec2> default_landmark_schedule(double spacing, int count, int hold);

Scenario default_scenario();

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& sc);
void save_scenario(const Scenario& sc, const std::string& path);

// Throws ScenarioError naming the offending field or slot.
void validate(const Scenario& sc);

}  // namespace bisar
