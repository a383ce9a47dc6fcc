#include "bisar/planner.hpp"

#include "bisar/log.hpp"
#include "bisar/power.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace bisar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Affine& axpy(Affine& a, double s, const Affine& b) {
  for (const auto& [i, v] : b.terms) a.terms.emplace_back(i, s * v);
  a.c += s * b.c;
  return a;
}

Affine scaled(const Affine& b, double s) {
  Affine a;
  return axpy(a, s, b);
}

// Previous-iterate geometry of one slot.
struct SlotLin {
  Vec2 dbar;  // q_t - q_{t-1}
  double nb;
  Vec2 d;     // unit heading
  Vec2 dp;    // d rotated +90 deg
  Vec2 C;     // sensing center with the unit heading
};

std::vector<SlotLin> linearize(const Trajectory& prev, const Scenario& sc) {
  std::vector<SlotLin> out(prev.slots());
  const double L = standoff(sc.sar);
  Heading h{0.0, 1.0};
  for (int t = 0; t < prev.slots(); ++t) {
    auto& s = out[t];
    s.dbar = prev.positions[t + 1] - prev.positions[t];
    s.nb = s.dbar.norm();
    h = unit_heading(s.dbar, h);
    s.d = Vec2(h.cos_a, h.sin_a);
    if (s.nb <= 1e-12) s.nb = 1e-12;
    s.dp = Vec2(-s.d.y(), s.d.x());
    s.C = prev.positions[t + 1] + L * Vec2(s.d.y(), -s.d.x());
  }
  return out;
}

double coverage_error(const Trajectory& traj, const Scenario& sc, int t, const Heading& h) {
  const Vec2 C = sensing_center(traj.positions[t + 1], h.sin_a, h.cos_a, sc.sar);
  return (sc.landmarks[t] - C).norm();
}

std::vector<double> coverage_errors(const Trajectory& traj, const Scenario& sc) {
  std::vector<double> e(traj.slots());
  Heading h{0.0, 1.0};
  for (int t = 0; t < traj.slots(); ++t) {
    h = unit_heading(traj.positions[t + 1] - traj.positions[t], h);
    e[t] = coverage_error(traj, sc, t, h);
  }
  return e;
}

void write_dump(const std::string& dir, const std::string& name, const ConvexSubproblem& p) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name);
  f << p.dump();
}

}  // namespace

void finalize_power(Trajectory& traj, const Scenario& sc) {
  traj.power.resize(traj.V.size());
  traj.total_energy = 0.0;
  for (size_t t = 0; t < traj.V.size(); ++t) {
    traj.power[t] = propulsion_power(traj.V[t], sc.power);
    traj.total_energy += sc.delta * traj.power[t];
  }
}

double total_distance(const Trajectory& traj) {
  double d = 0.0;
  for (size_t t = 1; t < traj.positions.size(); ++t) d += (traj.positions[t] - traj.positions[t - 1]).norm();
  return d;
}

std::vector<Vec2> smoothed_targets(const Scenario& sc) {
  const int T = sc.T_w;
  std::vector<double> tm;
  std::vector<Vec2> pm;
  for (int s = 0; s < T;) {
    int e = s;
    while (e + 1 < T && sc.landmarks[e + 1] == sc.landmarks[s]) ++e;
    tm.push_back(0.5 * (s + e));
    pm.push_back(sc.landmarks[s]);
    s = e + 1;
  }
  std::vector<Vec2> out(T);
  size_t k = 0;
  for (int t = 0; t < T; ++t) {
    if (t <= tm.front()) {
      out[t] = pm.front();
      continue;
    }
    if (t >= tm.back()) {
      out[t] = pm.back();
      continue;
    }
    while (k + 1 < tm.size() && tm[k + 1] < t) ++k;
    const double a = (t - tm[k]) / (tm[k + 1] - tm[k]);
    out[t] = (1.0 - a) * pm[k] + a * pm[k + 1];
  }
  return out;
}

Trajectory greedy_track(const Scenario& sc, const PlannerOptions& opt) {
  const int T = sc.T_w;
  const double L = standoff(sc.sar);
  const double vmin = min_speed(sc.sar);
  const double vm = sc.power.V_m;
  const double vstar = min_power(sc.power, vmin, vm).V;
  const auto c = smoothed_targets(sc);

  constexpr int na = 720, nv = 41;
  std::vector<double> ca(na), sa(na), vs(nv);
  for (int i = 0; i < na; ++i) {
    const double a = -M_PI + 2.0 * M_PI * i / na;
    ca[i] = std::cos(a);
    sa[i] = std::sin(a);
  }
  for (int j = 0; j < nv; ++j) vs[j] = (vmin + 0.01) + (vm - vmin - 0.02) * j / (nv - 1);

  Trajectory tr;
  tr.positions.assign(1, sc.q0);
  Vec2 q = sc.q0;
  for (int t = 0; t < T; ++t) {
    const Vec2& ct = c[t];
    const Vec2& ck = c[std::min(T - 1, t + opt.init_lookahead)];
    double best = kInf;
    int bi = 0, bj = 0;
    for (int i = 0; i < na; ++i) {
      for (int j = 0; j < nv; ++j) {
        const double s = sc.delta * vs[j];
        const double qx = q.x() + s * ca[i], qy = q.y() + s * sa[i];
        const double ex = qx + L * sa[i] - ct.x(), ey = qy - L * ca[i] - ct.y();
        const double r = std::hypot(qx - ck.x(), qy - ck.y()) - L;
        const double dv = vs[j] - vstar;
        const double cost = ex * ex + ey * ey + r * r + opt.init_speed_weight * dv * dv;
        if (cost < best) {
          best = cost;
          bi = i;
          bj = j;
        }
      }
    }
    q += sc.delta * vs[bj] * Vec2(ca[bi], sa[bi]);
    tr.positions.push_back(q);
    tr.V.push_back(vs[bj]);
    tr.w.push_back(sa[bi]);
    tr.u.push_back(ca[bi]);
  }
  tr.q.resize(T);
  for (int t = 0; t < T; ++t) tr.q[t] = q_star(tr.V[t], sc.power);
  finalize_power(tr, sc);
  return tr;
}

ConvexSubproblem build_trajectory_step(const Trajectory& prev, const Scenario& sc, const PlannerOptions& opt,
                                       StepObjective objective, StepLayout* layout_out, VectorXd* warm,
                                       double restore_radius) {
  const int T = prev.slots();
  const double L = standoff(sc.sar);
  const double dl = sc.delta;
  const double vmin = min_speed(sc.sar);
  const double vm = sc.power.V_m;
  const auto& pp = sc.power;
  const double iv0 = 1.0 / (pp.v0 * pp.v0);
  const bool lin_mode = opt.heading == HeadingModel::linearized;
  const auto rc = range_constant(sc, opt.range_mode);
  const auto lin = linearize(prev, sc);
  const double r_eff = sc.sar.r_s - opt.ball_margin;

  ConvexSubproblem p;
  StepLayout lay;
  lay.x.assign(T, -1);
  lay.y.assign(T, -1);
  lay.Vh.assign(T, -1);
  lay.Vl.assign(T, -1);
  lay.Q.assign(T, -1);
  lay.tau.assign(T, -1);
  lay.aux.assign(T, -1);

  double ref = 1.0;
  if (objective == StepObjective::energy) ref = std::max(prev.total_energy, 1e-9);
  if (objective == StepObjective::distance) ref = std::max(total_distance(prev), 1e-9);
  if (objective == StepObjective::origin_norm) {
    ref = 0.0;
    for (int t = 0; t < T; ++t) ref += prev.positions[t + 1].norm();
    ref = std::max(ref, 1e-9);
  }
  if (objective == StepObjective::restoration) {
    // matches the warm-start violation sum
    ref = 0.0;
    for (int t = 0; t < T; ++t)
      ref += std::max(0.0, (sc.landmarks[t] - lin[t].C).norm() + 1.0 - restore_radius) + 1.0;
  }

  for (int t = 0; t < T; ++t) {
    const std::string s = std::to_string(t + 1);
    lay.x[t] = p.add_var("x" + s);
    lay.y[t] = p.add_var("y" + s);
    lay.Vh[t] = p.add_var("V" + s, vmin, vm);
    if (objective == StepObjective::energy) {
      if (lin_mode) lay.Vl[t] = p.add_var("Vlo" + s, 0.0, vm);
      lay.Q[t] = p.add_var("q" + s, opt.q_floor, 2.0);
    }
    if (lin_mode) lay.tau[t] = p.add_var("tau" + s);
    if (objective == StepObjective::origin_norm) lay.aux[t] = p.add_var("rho" + s);
    if (objective == StepObjective::restoration) lay.aux[t] = p.add_var("viol" + s, 0.0);
  }

  auto dxy = [&](int t, int k) {
    Affine a;
    a.add(k == 0 ? lay.x[t] : lay.y[t], 1.0);
    if (t > 0)
      a.add(k == 0 ? lay.x[t - 1] : lay.y[t - 1], -1.0);
    else
      a.c = -(k == 0 ? sc.q0.x() : sc.q0.y());
    return a;
  };

  for (int t = 0; t < T; ++t) {
    const std::string s = std::to_string(t + 1);
    const auto& g = sc.landmarks[t];
    const auto& sl = lin[t];
    const Affine Dx = dxy(t, 0), Dy = dxy(t, 1);
    const Affine Vh = Affine().add(lay.Vh[t], 1.0);

    p.add(soc_le({Dx, Dy}, scaled(Vh, dl), "mobility[" + s + "]"));

    // objective
    switch (objective) {
      case StepObjective::energy:
        p.obj.constant += dl * pp.P0 / ref;
        p.obj.quad[lay.Vh[t]] += dl * 3.0 * pp.P0 / (pp.U_tip * pp.U_tip) / ref;
        p.obj.cubic[lay.Vh[t]] += dl * parasite_coeff(pp) / ref;
        p.obj.lin[lay.Q[t]] += dl * pp.P1 / ref;
        break;
      case StepObjective::distance: p.obj.lin[lay.Vh[t]] += dl / ref; break;
      case StepObjective::origin_norm: {
        p.obj.lin[lay.aux[t]] += 1.0 / ref;
        p.add(soc_le({Affine().add(lay.x[t], 1.0), Affine().add(lay.y[t], 1.0)}, Affine().add(lay.aux[t], 1.0),
                     "origin[" + s + "]"));
        break;
      }
      case StepObjective::restoration: p.obj.lin[lay.aux[t]] += 1.0 / ref; break;
    }

    // induced-power lower bound
    if (objective == StepObjective::energy) {
      double Vb, qb;
      int vvar;
      if (lin_mode) {
        Vb = sl.nb / dl;
        qb = q_star(Vb, pp);
        vvar = lay.Vl[t];
        // Vlo never exceeds the realized speed along the previous heading
        Affine a = scaled(Affine().add(lay.Vl[t], 1.0), dl);
        axpy(a, -sl.d.x(), Dx);
        axpy(a, -sl.d.y(), Dy);
        p.add(linear_le(a, "speed_lower[" + s + "]"));
      } else {
        Vb = prev.V[t];
        qb = prev.q.size() == static_cast<size_t>(T) && prev.q[t] > 0.0 ? prev.q[t] : q_star(Vb, pp);
        vvar = lay.Vh[t];
      }
      Affine rhs(-qb * qb - Vb * Vb * iv0);
      rhs.add(lay.Q[t], 2.0 * qb).add(vvar, 2.0 * Vb * iv0);
      p.add(inverse_square_le(lay.Q[t], rhs, "induced[" + s + "]"));
    }

    if (lin_mode) {
      // realized speed stays above the azimuth minimum
      Affine a(dl * vmin);
      axpy(a, -sl.d.x(), Dx);
      axpy(a, -sl.d.y(), Dy);
      p.add(linear_le(a, "min_speed[" + s + "]"));

      Affine Ex = Dx, Ey = Dy;
      Ex.c -= sl.dbar.x();
      Ey.c -= sl.dbar.y();
      p.add(soc_le({Ex, Ey}, Affine(opt.trust_ratio * sl.nb), "trust[" + s + "]"));

      // lateral = <E, dp> / nb, center = q + L J(d + dp lateral)
      Affine lat;
      axpy(lat, sl.dp.x() / sl.nb, Ex);
      axpy(lat, sl.dp.y() / sl.nb, Ey);
      Affine Cx = Affine().add(lay.x[t], 1.0), Cy = Affine().add(lay.y[t], 1.0);
      Cx.c += L * sl.d.y();
      axpy(Cx, L * sl.dp.y(), lat);
      Cy.c -= L * sl.d.x();
      axpy(Cy, -L * sl.dp.x(), lat);

      const double rk = std::sqrt(L * opt.remainder_coeff) / sl.nb;
      Affine gx = Cx, gy = Cy;
      gx.c -= g.x();
      gy.c -= g.y();
      const Affine tau = Affine().add(lay.tau[t], 1.0);
      p.add(soc_le({gx, gy}, tau, "landmark[" + s + "]"));
      Affine qa = tau;
      if (objective == StepObjective::restoration) {
        qa.c -= restore_radius;
        qa.add(lay.aux[t], -1.0);
      } else {
        qa.c -= r_eff;
      }
      p.add(quadratic_le({scaled(Ex, rk), scaled(Ey, rk)}, qa, "landmark_remainder[" + s + "]"));

      if (rc.active) {
        const Vec2 Db = sl.C - sc.bs.q_b;
        Affine a(rc.C_r + Db.squaredNorm());
        Affine cx = Cx, cy = Cy;
        cx.c -= sc.bs.q_b.x();
        cy.c -= sc.bs.q_b.y();
        axpy(a, -2.0 * Db.x(), cx);
        axpy(a, -2.0 * Db.y(), cy);
        const double rr = std::sqrt(2.0 * Db.norm() * L * opt.remainder_coeff) / sl.nb;
        p.add(quadratic_le({scaled(Ex, rr), scaled(Ey, rr)}, a, "range[" + s + "]"));
      }
    } else {
      const double wb = prev.w[t], ub = prev.u[t];
      // w dV <= dy and dx <= u dV
      Affine a52 = scaled(Vh, wb * dl);
      axpy(a52, -1.0, Dy);
      p.add(linear_le(a52, "heading_w[" + s + "]"));
      Affine a53 = Dx;
      axpy(a53, -ub * dl, Vh);
      p.add(linear_le(a53, "heading_u[" + s + "]"));
      // |q - (g - L(w, -u))| <= r_s
      Affine bx = Affine().add(lay.x[t], 1.0), by = Affine().add(lay.y[t], 1.0);
      bx.c = -(g.x() - L * wb);
      by.c = -(g.y() + L * ub);
      if (objective == StepObjective::restoration) {
        p.add(soc_le({bx, by}, Affine(restore_radius).add(lay.aux[t], 1.0), "landmark[" + s + "]"));
      } else {
        p.add(soc_le({bx, by}, Affine(sc.sar.r_s), "landmark[" + s + "]"));
      }
      if (rc.active) {
        const Vec2 Cb = prev.positions[t + 1] + L * Vec2(wb, -ub);
        const Vec2 Db = Cb - sc.bs.q_b;
        Affine a(rc.C_r + Db.squaredNorm() + 2.0 * Db.dot(sc.bs.q_b) - 2.0 * L * Db.dot(Vec2(wb, -ub)));
        a.add(lay.x[t], -2.0 * Db.x()).add(lay.y[t], -2.0 * Db.y());
        p.add(linear_le(a, "range[" + s + "]"));
      }
    }
  }

  if (warm) {
    VectorXd& x = *warm;
    x.setZero(p.n);
    for (int t = 0; t < T; ++t) {
      const auto& sl = lin[t];
      x[lay.x[t]] = prev.positions[t + 1].x();
      x[lay.y[t]] = prev.positions[t + 1].y();
      const double vr = sl.nb / dl;
      // keep the speed variables well inside their cones; a start 1e-9 from
      // the boundary costs the barrier hundreds of Newton steps
      double vh;
      if (lin_mode) {
        vh = std::max(vr, vmin);
        vh = std::min(vh + 1e-3 * (vm - vh), vm - 1e-9);
      } else {
        // the heading couplings tie V to the displacement
        vh = std::min(std::max(prev.V[t], vr * (1.0 + 1e-9)), vm - 1e-12);
      }
      x[lay.Vh[t]] = vh;
      if (objective == StepObjective::energy) {
        double vb, qb, vl;
        if (lin_mode) {
          vb = vr;
          qb = q_star(vb, pp);
          vl = vr * (1.0 - 1e-4);
          x[lay.Vl[t]] = vl;
        } else {
          vb = prev.V[t];
          qb = prev.q.size() == static_cast<size_t>(T) && prev.q[t] > 0.0 ? prev.q[t] : q_star(vb, pp);
          vl = vh;
        }
        // smallest Q meeting 1/Q^2 <= qb^2 + vb^2/v0^2 + 2qb(Q - qb) + 2vb/v0^2 (vl - vb)
        const double base = -qb * qb + 2.0 * vb * iv0 * vl - vb * vb * iv0;
        auto gap = [&](double Q) { return base + 2.0 * qb * Q - 1.0 / (Q * Q); };
        double lo_q = opt.q_floor, hi_q = 2.0;
        for (int k = 0; k < 100; ++k) {
          const double mid = 0.5 * (lo_q + hi_q);
          (gap(mid) < 0.0 ? lo_q : hi_q) = mid;
        }
        x[lay.Q[t]] = std::min(hi_q + 1e-3 * (2.0 - hi_q), 2.0 - 1e-9);
      }
      if (lin_mode) {
        const double ce = (sc.landmarks[t] - sl.C).norm();
        if (objective == StepObjective::restoration) {
          x[lay.tau[t]] = ce + 1.0;
          x[lay.aux[t]] = std::max(0.0, ce + 1.0 - restore_radius) + 1.0;
        } else {
          x[lay.tau[t]] = ce < r_eff ? 0.5 * (ce + r_eff) : ce + 1e-9;
        }
      } else if (objective == StepObjective::restoration) {
        const Vec2 c = sc.landmarks[t] - L * Vec2(prev.w[t], -prev.u[t]);
        x[lay.aux[t]] = std::max(0.0, (prev.positions[t + 1] - c).norm() - restore_radius) + 1.0;
      }
      if (objective == StepObjective::origin_norm) x[lay.aux[t]] = prev.positions[t + 1].norm() + 1.0;
    }
  }
  if (layout_out) *layout_out = std::move(lay);
  return p;
}

Trajectory extract_step(const ConvexSubproblem&, const StepLayout& lay, const VectorXd& x, const Trajectory& prev,
                        const Scenario& sc) {
  Trajectory tr;
  const int T = prev.slots();
  tr.positions.resize(T + 1);
  tr.positions[0] = sc.q0;
  tr.V.resize(T);
  tr.q.resize(T);
  tr.w = prev.w;
  tr.u = prev.u;
  for (int t = 0; t < T; ++t) {
    tr.positions[t + 1] = Vec2(x[lay.x[t]], x[lay.y[t]]);
    tr.V[t] = x[lay.Vh[t]];
    tr.q[t] = lay.Q[t] >= 0 ? x[lay.Q[t]] : q_star(tr.V[t], sc.power);
  }
  finalize_power(tr, sc);
  return tr;
}

ConvexSubproblem build_feasibility_step(const Trajectory& cur, const Scenario& sc, int t, const PlannerOptions& opt,
                                        VectorXd* warm) {
  const double L = standoff(sc.sar);
  const Vec2 q = cur.positions[t + 1];
  const Vec2 dq = q - cur.positions[t];
  const double dV = sc.delta * cur.V[t];
  const Vec2& g = sc.landmarks[t];
  const double wt = dq.y() / dV, ut = dq.x() / dV;  // slack heading

  double whi = wt, ulo = ut;
  if (whi - (-1.0) < 1e-9) whi = -1.0 + 1e-9;
  if (1.0 - ulo < 1e-9) ulo = 1.0 - 1e-9;

  ConvexSubproblem p;
  const int w = p.add_var("w", -1.0, whi);
  const int u = p.add_var("u", ulo, 1.0);
  const int s = p.add_var("s", 0.0);
  p.obj.lin[s] = 1.0;
  p.obj.quad[w] = opt.mu_prox;
  p.obj.quad[u] = opt.mu_prox;
  p.obj.lin[w] = -2.0 * opt.mu_prox * wt;
  p.obj.lin[u] = -2.0 * opt.mu_prox * ut;
  p.obj.constant = opt.mu_prox * (wt * wt + ut * ut);

  // |g - q - L(w, -u)| <= r_s + s
  Affine fx(g.x() - q.x()), fy(g.y() - q.y());
  fx.add(w, -L);
  fy.add(u, L);
  p.add(soc_le({fx, fy}, Affine(sc.sar.r_s).add(s, 1.0), "landmark"));

  const auto rc = range_constant(sc, opt.range_mode);
  if (rc.active) {
    const Vec2 Cb = q + L * Vec2(wt, -ut);
    const Vec2 Db = Cb - sc.bs.q_b;
    // C_r + |Db|^2 - 2 Db.(C - q_b) <= s, C = q + L(w, -u)
    Affine a(rc.C_r + Db.squaredNorm() - 2.0 * Db.dot(q - sc.bs.q_b));
    a.add(w, -2.0 * L * Db.x()).add(u, 2.0 * L * Db.y()).add(s, -1.0);
    p.add(linear_le(a, "range"));
  }

  if (warm) {
    VectorXd& x = *warm;
    x.resize(3);
    x[w] = std::clamp(wt, -1.0 + 1e-12, whi - 1e-12 * (1.0 + std::abs(whi)));
    x[u] = std::clamp(ut, ulo + 1e-12 * (1.0 + std::abs(ulo)), 1.0 - 1e-12);
    if (!(x[w] > -1.0 && x[w] < whi)) x[w] = 0.5 * (-1.0 + whi);
    if (!(x[u] > ulo && x[u] < 1.0)) x[u] = 0.5 * (ulo + 1.0);
    x[s] = 0.0;
    x[s] = std::max(0.0, p.max_violation(x)) + 1.0;
  }
  return p;
}

FeasibilityStepResult solve_feasibility_step(const Trajectory& cur, const Scenario& sc, int t,
                                             const PlannerOptions& opt) {
  VectorXd warm;
  auto p = build_feasibility_step(cur, sc, t, opt, &warm);
  auto out = solve(p, &warm, opt.solver);
  FeasibilityStepResult r;
  r.status = out.status;
  r.w = out.x[0];
  r.u = out.x[1];
  // slack actually needed at the returned (w, u), in metres
  const double L = standoff(sc.sar);
  const Vec2 C = cur.positions[t + 1] + L * Vec2(r.w, -r.u);
  r.slack = std::max(0.0, (sc.landmarks[t] - C).norm() - sc.sar.r_s);
  const auto rc = range_constant(sc, opt.range_mode);
  if (rc.active) r.slack = std::max(r.slack, std::sqrt(rc.C_r) - (C - sc.bs.q_b).norm());
  return r;
}

Trajectory initialize(const Scenario& sc, const PlannerOptions& opt, int* restoration_iters) {
  Trajectory tr = greedy_track(sc, opt);
  const double target = sc.sar.r_s - std::min(opt.init_margin, 0.1 * sc.sar.r_s);
  PlannerOptions ro = opt;
  int it = 0;
  double last = kInf;
  int stalls = 0;
  for (; it < opt.max_restoration_iter; ++it) {
    const auto e = coverage_errors(tr, sc);
    double viol = 0.0, worst = 0.0;
    for (double v : e) {
      viol += std::max(0.0, v - target);
      worst = std::max(worst, v);
    }
    log_debug("restoration " + std::to_string(it) + ": worst coverage error " + std::to_string(worst) + " m");
    if (worst <= target) break;
    if (viol > last * (1.0 - 1e-6)) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
    last = viol;
    StepLayout lay;
    VectorXd warm;
    auto p = build_trajectory_step(tr, sc, ro, StepObjective::restoration, &lay, &warm, target);
    auto out = solve(p, &warm, opt.solver);
    // no interior point found: nothing to extract
    if (out.status == SolveStatus::infeasible || (out.used_phase_one && out.phase_one_slack >= 0.0)) break;
    tr = extract_step(p, lay, out.x, tr, sc);
  }
  if (restoration_iters) *restoration_iters = it;

  // speeds equal to the realized ones, slacks from the true heading
  const int T = tr.slots();
  const double vmin = min_speed(sc.sar);
  for (int t = 0; t < T; ++t) {
    const Vec2 dq = tr.positions[t + 1] - tr.positions[t];
    const double vr = dq.norm() / sc.delta;
    tr.V[t] = std::min(std::max(vr * (1.0 + 1e-9), vmin), sc.power.V_m);
    tr.q[t] = q_star(tr.V[t], sc.power) * (1.0 + 1e-7);
    tr.w[t] = dq.y() / (sc.delta * tr.V[t]);
    tr.u[t] = dq.x() / (sc.delta * tr.V[t]);
  }
  finalize_power(tr, sc);

  auto rep = verify_trajectory(tr, sc, opt.range_mode, 0.0);
  if (!rep.pass) {
    for (const auto& c : rep.checks)
      if (!c.pass)
        throw PlannerError("no feasible initialization: " + c.name + " violated first at slot " +
                           std::to_string(std::find(c.slot_ok.begin(), c.slot_ok.end(), 0) - c.slot_ok.begin() + 1));
  }
  return tr;
}

namespace {

double metric(const Trajectory& tr, StepObjective obj, const Scenario& sc) {
  switch (obj) {
    case StepObjective::energy: return tr.total_energy;
    case StepObjective::distance: {
      double s = 0.0;
      for (double v : tr.V) s += sc.delta * v;
      return s;
    }
    case StepObjective::origin_norm: {
      double s = 0.0;
      for (size_t t = 1; t < tr.positions.size(); ++t) s += tr.positions[t].norm();
      return s;
    }
    case StepObjective::restoration: return 0.0;
  }
  return 0.0;
}

double feasibility_sweep(Trajectory& tr, const Scenario& sc, const PlannerOptions& opt) {
  double worst = 0.0;
  for (int t = 0; t < tr.slots(); ++t) {
    auto r = solve_feasibility_step(tr, sc, t, opt);
    tr.w[t] = r.w;
    tr.u[t] = r.u;
    worst = std::max(worst, r.slack);
  }
  return worst;
}

PlanResult run_planner(const Scenario& sc, const PlannerOptions& opt, StepObjective obj, const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult res;
  auto& rep = res.report;
  rep.planner = name;
  Trajectory cur = initialize(sc, opt, &rep.restoration_iterations);
  rep.initial_energy_J = cur.total_energy;
  double slack0 = feasibility_sweep(cur, sc, opt);

  IterationRecord r0;
  r0.iter = 0;
  r0.objective_J = cur.total_energy;
  r0.distance_m = total_distance(cur);
  r0.max_slack = slack0;
  r0.step_status = "initial";
  rep.iterations.push_back(r0);
  log_info(name + ": initial energy " + std::to_string(cur.total_energy) + " J after " +
           std::to_string(rep.restoration_iterations) + " restoration steps");

  double m_prev = metric(cur, obj, sc);
  rep.stop_reason = "iteration limit";
  for (int l = 1; l <= opt.max_iter; ++l) {
    StepLayout lay;
    VectorXd warm;
    auto p = build_trajectory_step(cur, sc, opt, obj, &lay, &warm);
    write_dump(opt.dump_dir, name + "_iter" + std::to_string(l) + "_trajectory.txt", p);
    auto out = solve(p, &warm, opt.solver);
    if (out.status != SolveStatus::optimal) {
      rep.stop_reason = "trajectory step " + to_string(out.status) + ": " + out.message;
      log_warn(name + ": " + rep.stop_reason);
      break;
    }
    Trajectory nxt = extract_step(p, lay, out.x, cur, sc);
    if (!opt.dump_dir.empty()) {
      VectorXd fw;
      write_dump(opt.dump_dir, name + "_iter" + std::to_string(l) + "_feasibility_slot1.txt",
                 build_feasibility_step(nxt, sc, 0, opt, &fw));
    }
    const double slack = feasibility_sweep(nxt, sc, opt);

    IterationRecord rec;
    rec.iter = l;
    rec.objective_J = nxt.total_energy;
    rec.distance_m = total_distance(nxt);
    rec.surrogate = out.objective;
    rec.step_status = to_string(out.status);
    rec.newton_iterations = out.iterations;
    rec.max_slack = slack;
    for (int t = 0; t <= cur.slots(); ++t)
      rec.step_norm = std::max(rec.step_norm, (nxt.positions[t] - cur.positions[t]).norm());
    rep.iterations.push_back(rec);

    const double m = metric(nxt, obj, sc);
    const double rel = (m_prev - m) / std::max(std::abs(m_prev), 1e-300);
    log_info(name + " iter " + std::to_string(l) + ": energy " + std::to_string(nxt.total_energy) + " J, rel " +
             std::to_string(rel) + ", slack " + std::to_string(slack) + ", newton " +
             std::to_string(out.iterations) + " (" + rec.step_status + ")");
    cur = std::move(nxt);
    m_prev = m;
    if (rel < opt.eps) {
      rep.converged = true;
      rep.slack_warning = slack >= opt.slack_tol;
      rep.stop_reason = rep.slack_warning ? "converged with feasibility slack above tolerance" : "converged";
      break;
    }
  }
  for (int t = 0; t < cur.slots(); ++t)
    rep.max_unity_residual = std::max(rep.max_unity_residual, std::abs(cur.w[t] * cur.w[t] + cur.u[t] * cur.u[t] - 1.0));
  rep.feasibility = verify_trajectory(cur, sc, opt.range_mode);
  rep.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.traj = std::move(cur);
  return res;
}

}  // namespace

PlanResult plan_sca_bcd(const Scenario& sc, const PlannerOptions& opt) {
  return run_planner(sc, opt, StepObjective::energy, "proposed");
}

PlanResult plan_baseline(const Scenario& sc, const PlannerOptions& opt) {
  return run_planner(sc, opt, opt.baseline_objective, "baseline");
}

}  // namespace bisar
