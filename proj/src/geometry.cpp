#include "bisar/geometry.hpp"

#include <cmath>
#include <limits>

namespace bisar {

double standoff(const SarParams& sar) { return sar.H * std::tan(sar.eta); }

double min_speed(const SarParams& sar) { return sar.lambda_c * sar.H / (sar.T_d * sar.d_min * std::cos(sar.eta)); }

double slant_range(const SarParams& sar) { return sar.H / std::cos(sar.eta); }

Heading heading(const Vec2& q_prev, const Vec2& q_cur, double V, double delta) {
  const Vec2 d = q_cur - q_prev;
  return {d.y() / (delta * V), d.x() / (delta * V)};
}

Heading unit_heading(const Vec2& dq, const Heading& prev) {
  const double n = dq.norm();
  if (n <= 1e-12) return {prev.sin_a, prev.cos_a, true};
  return {dq.y() / n, dq.x() / n};
}

Vec2 sensing_center(const Vec2& q, double sin_a, double cos_a, const SarParams& sar) {
  const double L = standoff(sar);
  return {q.x() + L * sin_a, q.y() - L * cos_a};
}

double incidence_sine(const Vec2& center, const BsParams& bs) {
  const double d = (center - bs.q_b).norm();
  return d / std::sqrt(d * d + bs.H_b * bs.H_b);
}

double range_resolution(double sin_theta, const SarParams& sar) {
  return kLightSpeed / (sar.B * (std::sin(sar.eta) + sin_theta));
}

double azimuth_resolution(double V, const SarParams& sar) {
  if (V <= 0.0) return std::numeric_limits<double>::infinity();
  return sar.lambda_c * sar.H / (sar.T_d * V * std::cos(sar.eta));
}

std::optional<double> sensing_area_size(const SarParams& sar) {
  if (!sar.W_a || !sar.L_a) return std::nullopt;
  const double ce = std::cos(sar.eta);
  return M_PI / 4.0 * (sar.lambda_c / *sar.L_a) * (sar.lambda_c * sar.H / (*sar.W_a * ce * ce));
}

RangeConstant range_constant(const Scenario& sc, RangeMode mode) {
  const auto& s = sc.sar;
  if (!(s.B * s.d_min > 0.0)) throw ScenarioError("sar.bandwidth_hz and sar.min_resolution_m must be positive");
  const double kappa = kLightSpeed / (s.B * s.d_min) - std::sin(s.eta);
  if (kappa >= 1.0)
    throw ScenarioError("range resolution unattainable: bandwidth_hz=" + std::to_string(s.B) +
                        " with min_resolution_m=" + std::to_string(s.d_min));
  const double hb2 = sc.bs.H_b * sc.bs.H_b;
  const double cr = hb2 / (1.0 - kappa * kappa) - hb2;
  if (kappa <= 0.0 && mode == RangeMode::exact) return {kappa, false, 0.0};
  return {kappa, true, cr};
}

const ConstraintCheck* FeasibilityReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<SensingState> sensing_states(const Trajectory& traj, const Scenario& sc) {
  std::vector<SensingState> out;
  const int T = traj.slots();
  out.reserve(T);
  Heading h{0.0, 1.0};
  for (int t = 0; t < T; ++t) {
    const Vec2& q = traj.positions[t + 1];
    h = unit_heading(q - traj.positions[t], h);
    SensingState st;
    st.q = q;
    st.V = traj.V[t];
    st.alpha = std::atan2(h.sin_a, h.cos_a);
    st.center = sensing_center(q, h.sin_a, h.cos_a, sc.sar);
    st.sin_theta = incidence_sine(st.center, sc.bs);
    st.delta_r = range_resolution(st.sin_theta, sc.sar);
    st.delta_a = azimuth_resolution(st.V, sc.sar);
    out.push_back(st);
  }
  return out;
}

namespace {

struct Accum {
  ConstraintCheck c;
  double tol;
  Accum(std::string name, int T, double tol_) : tol(tol_) {
    c.name = std::move(name);
    c.worst_margin = std::numeric_limits<double>::infinity();
    c.slot_ok.assign(T, 1);
  }
  void add(int t, double margin) {
    const bool ok = margin >= -tol;
    c.slot_ok[t] = ok;
    if (!ok) c.pass = false;
    if (margin < c.worst_margin) {
      c.worst_margin = margin;
      c.worst_slot = t + 1;
    }
  }
};

}  // namespace

FeasibilityReport verify_trajectory(const Trajectory& traj, const Scenario& sc, RangeMode mode, double tol) {
  FeasibilityReport rep;
  const int T = traj.slots();
  const auto rc = range_constant(sc, mode);
  Accum range("range_resolution", T, tol), standoff_c("range_standoff", T, tol), az("azimuth_resolution", T, tol),
      mob("mobility", T, tol), spd("max_speed", T, tol), cov("coverage", T, tol);

  rep.min_speed = std::numeric_limits<double>::infinity();
  Heading h{0.0, 1.0};
  for (int t = 0; t < T; ++t) {
    const Vec2 dq = traj.positions[t + 1] - traj.positions[t];
    const double V = traj.V[t];
    h = unit_heading(dq, h);
    if (h.carried) rep.carried_heading_slots.push_back(t + 1);
    const Vec2 C = sensing_center(traj.positions[t + 1], h.sin_a, h.cos_a, sc.sar);
    const double st = incidence_sine(C, sc.bs);

    range.add(t, sc.sar.d_min - range_resolution(st, sc.sar));
    if (rc.active) standoff_c.add(t, (C - sc.bs.q_b).norm() - std::sqrt(rc.C_r));
    const double da = azimuth_resolution(V, sc.sar);
    az.add(t, std::isfinite(da) ? sc.sar.d_min - da : -std::numeric_limits<double>::infinity());
    mob.add(t, sc.delta * V - dq.norm());
    spd.add(t, sc.power.V_m - V);
    cov.add(t, sc.sar.r_s - (sc.landmarks[t] - C).norm());

    rep.min_speed = std::min(rep.min_speed, V);
    if (V > 0.0)
      rep.max_heading_residual = std::max(rep.max_heading_residual, std::abs(dq.norm() - sc.delta * V) / (sc.delta * V));
  }
  rep.checks = {range.c, az.c, mob.c, spd.c, cov.c};
  if (rc.active) rep.checks.insert(rep.checks.begin() + 1, standoff_c.c);
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

}  // namespace bisar
