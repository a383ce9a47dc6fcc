#include "bisar/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace bisar {

namespace pt = boost::property_tree;

std::vector<Vec2> turn_points(double spacing, int count) {
  std::vector<Vec2> pts;
  const int ny = (count + 1) / 2;
  for (int i = 0; i < ny; ++i) pts.emplace_back(0.0, i * spacing);
  const double ylast = (ny - 1) * spacing;
  for (int j = 0; j < count - ny; ++j) pts.emplace_back((j + 1) * spacing, ylast);
  return pts;
}

std::vector<Vec2> staircase_points(double spacing, int count, int run) {
  std::vector<Vec2> pts;
  Vec2 p(0.0, 0.0);
  pts.push_back(p);
  int dir = 0;  // 0: +y, 1: +x
  int steps = 1;
  while (static_cast<int>(pts.size()) < count) {
    if (steps == run) {
      dir ^= 1;
      steps = 0;
    }
    p += dir == 0 ? Vec2(0.0, spacing) : Vec2(spacing, 0.0);
    pts.push_back(p);
    ++steps;
  }
  return pts;
}

std::vector<Vec2> square_points(double spacing, int count) {
  // count points on a closed loop: up, right, down, left
  const int side = std::max(1, count / 4);
  const Vec2 dirs[4] = {{0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}};
  std::vector<Vec2> pts;
  Vec2 p(0.0, 0.0);
  for (int k = 0; static_cast<int>(pts.size()) < count; ++k) {
    pts.push_back(p);
    p += spacing * dirs[(k / side) % 4];
  }
  return pts;
}

std::vector<Vec2> random_turn_points(double max_spacing, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, max_spacing);
  std::vector<Vec2> pts;
  const int ny = (count + 1) / 2;
  Vec2 p(0.0, 0.0);
  pts.push_back(p);
  for (int i = 1; i < count; ++i) {
    p += (i < ny ? Vec2(0.0, 1.0) : Vec2(1.0, 0.0)) * U(rng);
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vec2> expand_schedule(const std::vector<Vec2>& points, int hold) {
  std::vector<Vec2> out;
  out.reserve(points.size() * static_cast<size_t>(std::max(hold, 0)));
  for (const auto& p : points)
    for (int k = 0; k < hold; ++k) out.push_back(p);
  return out;
}

std::vector<Vec2> default_landmark_schedule(double spacing, int count, int hold) {
  if (!(spacing > 0.0)) throw ScenarioError("spacing_m must be positive");
  if (count < 2) throw ScenarioError("count must be at least 2");
  if (hold < 1) throw ScenarioError("hold_slots must be at least 1");
  return expand_schedule(turn_points(spacing, count), hold);
}

namespace {

std::vector<Vec2> generate(const LandmarkSource& src) {
  if (src.pattern == "turn") return turn_points(src.spacing, src.count);
  if (src.pattern == "staircase") return staircase_points(src.spacing, src.count, std::max(2, src.count / 4));
  if (src.pattern == "square") return square_points(src.spacing, src.count);
  if (src.pattern == "random") return random_turn_points(src.spacing, src.count, src.seed);
  throw ScenarioError("landmarks.pattern: unknown pattern '" + src.pattern + "'");
}

void fill_landmarks(Scenario& sc) {
  auto& src = sc.source;
  if (src.pattern != "list") {
    if (!(src.spacing > 0.0)) throw ScenarioError("landmarks.spacing_m must be positive");
    if (src.count < 2) throw ScenarioError("landmarks.count must be at least 2");
    src.points = generate(src);
  }
  if (src.points.empty()) throw ScenarioError("landmarks: no points");
  if (src.hold <= 0) {
    src.hold = sc.T_w / static_cast<int>(src.points.size());
    src.hold_defaulted = true;
  }
  if (src.hold < 1) throw ScenarioError("landmarks.hold_slots: fewer slots than landmarks");
  sc.landmarks = expand_schedule(src.points, src.hold);
  // pad with the last landmark when T_w is not a multiple of the count
  while (static_cast<int>(sc.landmarks.size()) < sc.T_w) sc.landmarks.push_back(src.points.back());
  if (static_cast<int>(sc.landmarks.size()) > sc.T_w)
    throw ScenarioError("landmarks: schedule of " + std::to_string(sc.landmarks.size()) +
                        " slots exceeds mission.slots=" + std::to_string(sc.T_w));
}

std::vector<Vec2> parse_points(const std::string& s) {
  // "x y, x y, ..." (commas or semicolons between pairs)
  std::string t = s;
  for (auto& c : t)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream is(t);
  std::vector<Vec2> pts;
  double x, y;
  while (is >> x) {
    if (!(is >> y)) throw ScenarioError("landmarks.points: odd number of coordinates");
    pts.emplace_back(x, y);
  }
  if (!is.eof()) throw ScenarioError("landmarks.points: not a number list");
  return pts;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    if constexpr (std::is_same_v<T, int>) {
      size_t pos = 0;
      long long r = std::stoll(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument(key);
      return static_cast<int>(r);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      return std::stoull(*v);
    } else if constexpr (std::is_same_v<T, double>) {
      size_t pos = 0;
      double r = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument(key);
      return r;
    } else {
      return *v;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception&) {
    throw ScenarioError(key + ": cannot parse '" + *v + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

Scenario default_scenario() {
  Scenario sc;
  sc.source.pattern = "turn";
  sc.source.spacing = 30.0;
  sc.source.count = 30;
  sc.source.hold = 20;
  fill_landmarks(sc);
  return sc;
}

void validate(const Scenario& sc) {
  const auto& p = sc.power;
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError(std::string(name) + " must be positive");
  };
  pos(p.P0, "power.blade_power_w");
  pos(p.P1, "power.induced_power_w");
  pos(p.U_tip, "power.tip_speed_mps");
  pos(p.v0, "power.induced_velocity_mps");
  pos(p.d_f, "power.fuselage_drag_ratio");
  pos(p.rho, "power.air_density_kgpm3");
  pos(p.A, "power.rotor_disc_area_m2");
  pos(p.V_m, "power.max_speed_mps");
  pos(p.mass, "power.mass_kg");
  if (!(p.s > 0.0 && p.s < 1.0)) throw ScenarioError("power.rotor_solidity must lie in (0,1)");

  const auto& s = sc.sar;
  pos(s.B, "sar.bandwidth_hz");
  pos(s.lambda_c, "sar.wavelength_m");
  pos(s.T_d, "sar.integration_time_s");
  pos(s.H, "sar.altitude_m");
  pos(s.d_min, "sar.min_resolution_m");
  pos(s.r_s, "sar.sensing_radius_m");
  if (!(s.eta > 0.0 && s.eta < M_PI / 2)) throw ScenarioError("sar.observation_angle_rad must lie in (0, pi/2)");
  if (s.W_a) pos(*s.W_a, "sar.antenna_height_m");
  if (s.L_a) pos(*s.L_a, "sar.antenna_length_m");

  pos(sc.bs.H_b, "bs.height_m");
  pos(sc.delta, "mission.slot_s");
  if (sc.T_w < 1) throw ScenarioError("mission.slots must be at least 1");
  if (static_cast<int>(sc.landmarks.size()) != sc.T_w)
    throw ScenarioError("landmarks: schedule length " + std::to_string(sc.landmarks.size()) +
                        " differs from mission.slots=" + std::to_string(sc.T_w));

  const double vmin = s.lambda_c * s.H / (s.T_d * s.d_min * std::cos(s.eta));
  if (vmin > p.V_m)
    throw ScenarioError("power.max_speed_mps below the azimuth-resolution minimum speed " + fmt(vmin));

  const double reach = sc.delta * p.V_m + 2.0 * s.r_s;
  for (int t = 1; t < sc.T_w; ++t) {
    if ((sc.landmarks[t] - sc.landmarks[t - 1]).norm() > reach)
      throw ScenarioError("landmarks: slot " + std::to_string(t + 1) + " unreachable from slot " +
                          std::to_string(t));
  }
  // first sensing center lies at distance sqrt(L^2 + |dq|^2) from q0
  const double L = s.H * std::tan(s.eta);
  const double d0 = (sc.landmarks[0] - sc.q0).norm();
  const double lo = std::hypot(L, sc.delta * vmin) - s.r_s;
  const double hi = std::hypot(L, sc.delta * p.V_m) + s.r_s;
  if (d0 < lo || d0 > hi)
    throw ScenarioError("landmarks: slot 1 unreachable from the start position (distance " + fmt(d0) +
                        " m, sensing_radius_m too small)");
}

Scenario parse_scenario(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  static const char* known[] = {"power", "sar", "bs", "mission", "landmarks"};
  for (const auto& kv : tree) {
    bool ok = false;
    for (auto k : known) ok = ok || kv.first == k;
    if (!ok) throw ScenarioError("unknown section [" + kv.first + "]");
  }

  Scenario sc;
  auto& p = sc.power;
  p.P0 = get(tree, "power.blade_power_w", p.P0);
  p.P1 = get(tree, "power.induced_power_w", p.P1);
  p.U_tip = get(tree, "power.tip_speed_mps", p.U_tip);
  p.v0 = get(tree, "power.induced_velocity_mps", p.v0);
  p.d_f = get(tree, "power.fuselage_drag_ratio", p.d_f);
  p.rho = get(tree, "power.air_density_kgpm3", p.rho);
  p.s = get(tree, "power.rotor_solidity", p.s);
  p.A = get(tree, "power.rotor_disc_area_m2", p.A);
  p.V_m = get(tree, "power.max_speed_mps", p.V_m);
  p.mass = get(tree, "power.mass_kg", p.mass);

  auto& s = sc.sar;
  s.B = get(tree, "sar.bandwidth_hz", s.B);
  s.lambda_c = get(tree, "sar.wavelength_m", s.lambda_c);
  s.T_d = get(tree, "sar.integration_time_s", s.T_d);
  s.eta = get(tree, "sar.observation_angle_rad", s.eta);
  s.H = get(tree, "sar.altitude_m", s.H);
  s.d_min = get(tree, "sar.min_resolution_m", s.d_min);
  s.r_s = get(tree, "sar.sensing_radius_m", s.r_s);
  if (tree.get_optional<std::string>("sar.antenna_height_m")) s.W_a = get(tree, "sar.antenna_height_m", 0.0);
  if (tree.get_optional<std::string>("sar.antenna_length_m")) {
    s.L_a = get(tree, "sar.antenna_length_m", 0.0);
    if (!(*s.L_a > 0.0)) throw ScenarioError("sar.antenna_length_m must be positive");
    s.r_s = s.lambda_c / (2.0 * *s.L_a);
  }

  sc.bs.q_b.x() = get(tree, "bs.x_m", sc.bs.q_b.x());
  sc.bs.q_b.y() = get(tree, "bs.y_m", sc.bs.q_b.y());
  sc.bs.H_b = get(tree, "bs.height_m", sc.bs.H_b);

  sc.q0.x() = get(tree, "mission.start_x_m", sc.q0.x());
  sc.q0.y() = get(tree, "mission.start_y_m", sc.q0.y());
  sc.delta = get(tree, "mission.slot_s", sc.delta);
  if (tree.get_optional<std::string>("mission.duration_s") && !tree.get_optional<std::string>("mission.slots")) {
    const double T = get(tree, "mission.duration_s", 0.0);
    if (!(sc.delta > 0.0)) throw ScenarioError("mission.slot_s must be positive");
    sc.T_w = static_cast<int>(std::lround(T / sc.delta));
  } else {
    sc.T_w = get(tree, "mission.slots", sc.T_w);
  }
  if (!(sc.delta > 0.0)) throw ScenarioError("mission.slot_s must be positive");
  if (sc.T_w < 1) throw ScenarioError("mission.slots must be at least 1");

  auto& src = sc.source;
  src.hold = get(tree, "landmarks.hold_slots", 0);
  if (auto pts = tree.get_optional<std::string>("landmarks.points")) {
    src.pattern = "list";
    src.points = parse_points(*pts);
  } else {
    src.pattern = get<std::string>(tree, "landmarks.pattern", "turn");
    src.spacing = get(tree, "landmarks.spacing_m", 30.0);
    src.count = get(tree, "landmarks.count", 30);
    src.seed = get<std::uint64_t>(tree, "landmarks.seed", 0);
  }
  fill_landmarks(sc);
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream o;
  const auto& p = sc.power;
  o << "[power]\n"
    << "blade_power_w = " << fmt(p.P0) << "\n"
    << "induced_power_w = " << fmt(p.P1) << "\n"
    << "tip_speed_mps = " << fmt(p.U_tip) << "\n"
    << "induced_velocity_mps = " << fmt(p.v0) << "\n"
    << "fuselage_drag_ratio = " << fmt(p.d_f) << "\n"
    << "air_density_kgpm3 = " << fmt(p.rho) << "\n"
    << "rotor_solidity = " << fmt(p.s) << "\n"
    << "rotor_disc_area_m2 = " << fmt(p.A) << "\n"
    << "max_speed_mps = " << fmt(p.V_m) << "\n"
    << "mass_kg = " << fmt(p.mass) << "\n\n";
  const auto& s = sc.sar;
  o << "[sar]\n"
    << "bandwidth_hz = " << fmt(s.B) << "\n"
    << "wavelength_m = " << fmt(s.lambda_c) << "\n"
    << "integration_time_s = " << fmt(s.T_d) << "\n"
    << "observation_angle_rad = " << fmt(s.eta) << "\n"
    << "altitude_m = " << fmt(s.H) << "\n"
    << "min_resolution_m = " << fmt(s.d_min) << "\n";
  if (s.W_a) o << "antenna_height_m = " << fmt(*s.W_a) << "\n";
  if (s.L_a)
    o << "antenna_length_m = " << fmt(*s.L_a) << "\n";
  else
    o << "sensing_radius_m = " << fmt(s.r_s) << "\n";
  o << "\n[bs]\n"
    << "x_m = " << fmt(sc.bs.q_b.x()) << "\n"
    << "y_m = " << fmt(sc.bs.q_b.y()) << "\n"
    << "height_m = " << fmt(sc.bs.H_b) << "\n\n";
  o << "[mission]\n"
    << "start_x_m = " << fmt(sc.q0.x()) << "\n"
    << "start_y_m = " << fmt(sc.q0.y()) << "\n"
    << "slot_s = " << fmt(sc.delta) << "\n"
    << "slots = " << sc.T_w << "\n\n";
  o << "[landmarks]\n";
  const auto& src = sc.source;
  if (!src.hold_defaulted) o << "hold_slots = " << src.hold << "\n";
  if (src.pattern == "list") {
    o << "points = ";
    for (size_t i = 0; i < src.points.size(); ++i)
      o << (i ? ", " : "") << fmt(src.points[i].x()) << " " << fmt(src.points[i].y());
    o << "\n";
  } else {
    o << "pattern = " << src.pattern << "\n"
      << "spacing_m = " << fmt(src.spacing) << "\n"
      << "count = " << src.count << "\n"
      << "seed = " << src.seed << "\n";
  }
  return o.str();
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ScenarioError("cannot write " + path);
  f << serialize_scenario(sc);
}

}  // namespace bisar
