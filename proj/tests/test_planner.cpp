#include "bisar/planner.hpp"
#include "bisar/power.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bisar;

namespace {

Scenario small_mission(int slots, int count, const std::string& extra = "") {
  return parse_scenario("[mission]\nslots = " + std::to_string(slots) + "\n[landmarks]\ncount = " +
                        std::to_string(count) + "\n" + extra);
}

const Constraint* find_con(const ConvexSubproblem& p, const std::string& tag) {
  for (const auto& c : p.cons)
    if (c.tag == tag) return &c;
  return nullptr;
}

// Straight flight at speed V along +x starting from q0, headings (w, u) = (0, 1).
Trajectory straight(const Scenario& sc, double V) {
  Trajectory tr;
  tr.positions.push_back(sc.q0);
  for (int t = 0; t < sc.T_w; ++t) {
    tr.positions.push_back(tr.positions.back() + Vec2(sc.delta * V, 0.0));
    tr.V.push_back(V);
    tr.w.push_back(0.0);
    tr.u.push_back(1.0);
    tr.q.push_back(q_star(V, sc.power));
  }
  finalize_power(tr, sc);
  return tr;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("unit-heading remainder stays under the quadratic bound") {
    // |e| <= n/2 around dbar: the first-order heading error is at most 0.75 |e|^2 / n^2
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-1.0, 1.0), A(0.0, 2 * M_PI);
    double worst = 0.0;
    for (int i = 0; i < 200000; ++i) {
      const double n = 1.0 + 20.0 * (U(rng) + 1.0);
      const double a = A(rng);
      const Vec2 dbar = n * Vec2(std::cos(a), std::sin(a));
      const double r = 0.5 * n * std::sqrt(0.5 * (U(rng) + 1.0));
      const double b = A(rng);
      const Vec2 e = r * Vec2(std::cos(b), std::sin(b));
      const Vec2 d = dbar / n, dp(-d.y(), d.x());
      const Vec2 exact = (dbar + e).normalized();
      const Vec2 first = d + dp * (e.dot(dp) / n);
      if (r > 0.0) worst = std::max(worst, (exact - first).norm() * n * n / (r * r));
    }
    CHECK(worst <= 0.75);
    CHECK(worst > 0.5);  // the bound is not loose by a large factor
  }

  TEST_CASE("initialization is feasible and strictly interior for the first step") {
    const Scenario sc = small_mission(60, 3);
    const PlannerOptions opt;
    const Trajectory init = initialize(sc, opt);
    CHECK(verify_trajectory(init, sc, opt.range_mode, 0.0).pass);
    for (auto obj : {StepObjective::energy, StepObjective::distance}) {
      StepLayout lay;
      VectorXd warm;
      const auto p = build_trajectory_step(init, sc, opt, obj, &lay, &warm);
      CHECK(strictly_feasible(p, warm));
    }
  }

  TEST_CASE("induced-power linearization matches at the expansion point") {
    const Scenario sc = small_mission(60, 3);
    PlannerOptions opt;
    opt.heading = HeadingModel::frozen_slack;
    const Trajectory tr = straight(sc, 12.0);
    StepLayout lay;
    const auto p = build_trajectory_step(tr, sc, opt, StepObjective::energy, &lay);
    const auto* c = find_con(p, "induced[5]");
    REQUIRE(c != nullptr);
    VectorXd x = VectorXd::Zero(p.n);
    const double qb = tr.q[4], Vb = tr.V[4];
    x[lay.Q[4]] = qb;
    x[lay.Vh[4]] = Vb;
    const double v0 = sc.power.v0;
    CHECK(c->a.eval(x) == doctest::Approx(qb * qb + Vb * Vb / (v0 * v0)).epsilon(1e-13));
    // at q* the linearized constraint is tight
    CHECK(c->value(x) == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("frozen headings give a ball centered a standoff to the left of the landmark") {
    const Scenario sc = small_mission(60, 3);
    PlannerOptions opt;
    opt.heading = HeadingModel::frozen_slack;
    const Trajectory tr = straight(sc, 12.0);
    StepLayout lay;
    const auto p = build_trajectory_step(tr, sc, opt, StepObjective::energy, &lay);
    const auto* c = find_con(p, "landmark[1]");
    REQUIRE(c != nullptr);
    const VectorXd x = VectorXd::Zero(p.n);
    const Vec2& g = sc.landmarks[0];
    CHECK(-c->F[0].eval(x) == doctest::Approx(g.x()));
    CHECK(-c->F[1].eval(x) == doctest::Approx(g.y() + 1000.0));
    CHECK(c->a.eval(x) == doctest::Approx(sc.sar.r_s));
  }

  TEST_CASE("feasibility step") {
    Scenario sc = small_mission(60, 3);
    PlannerOptions opt;
    opt.range_mode = RangeMode::exact;
    const double V = 12.0;
    Trajectory tr = straight(sc, V);
    const Vec2 q1 = tr.positions[1];

    SUBCASE("covered landmark needs no slack") {
      sc.landmarks[0] = q1 + Vec2(0.0, -1000.0);
      const auto r = solve_feasibility_step(tr, sc, 0, opt);
      CHECK(r.status == SolveStatus::optimal);
      CHECK(r.slack == doctest::Approx(0.0).epsilon(1e-6));
      // any heading in the admissible wedge that keeps the landmark covered is optimal
      CHECK(r.w <= 1e-9);
      CHECK(r.u >= 1.0 - 1e-6);
    }
    SUBCASE("flight along +y") {
      Trajectory up = tr;
      up.positions[1] = sc.q0 + Vec2(0.0, sc.delta * V);
      sc.landmarks[0] = up.positions[1] + Vec2(1000.0, 0.0);
      const auto r = solve_feasibility_step(up, sc, 0, opt);
      CHECK(r.status == SolveStatus::optimal);
      CHECK(r.slack == doctest::Approx(0.0).epsilon(1e-6));
      CHECK(r.w <= 1.0 + 1e-9);
      CHECK(r.u >= -1e-9);
    }
    SUBCASE("landmark pushed beyond the reachable circle") {
      sc.landmarks[0] = q1 + Vec2(0.0, -1000.0 - (sc.sar.r_s + 5.0));
      const auto r = solve_feasibility_step(tr, sc, 0, opt);
      CHECK(r.status == SolveStatus::optimal);
      CHECK(r.slack == doctest::Approx(5.0).epsilon(1e-4));
    }
  }

  TEST_CASE("one outer iteration never raises the energy") {
    const Scenario sc = small_mission(60, 3);
    PlannerOptions opt;
    opt.max_iter = 1;
    const auto res = plan_sca_bcd(sc, opt);
    REQUIRE(res.report.iterations.size() == 2u);
    CHECK(res.traj.total_energy <= res.report.initial_energy_J * (1.0 + 1e-12));
    CHECK(res.report.feasibility.pass);
  }

  TEST_CASE("single-slot mission") {
    const Scenario sc = parse_scenario("[mission]\nslots = 1\n[landmarks]\npoints = 0 0\n");
    const auto res = plan_sca_bcd(sc);
    CHECK(res.report.feasibility.pass);
    CHECK(res.traj.slots() == 1);
  }

  TEST_CASE("loitering over one landmark") {
    const Scenario sc = parse_scenario("[mission]\nslots = 80\n[landmarks]\npoints = 0 0\n");
    const auto res = plan_sca_bcd(sc);
    CHECK(res.report.converged);
    CHECK(res.report.feasibility.pass);
    const double vmin = min_speed(sc.sar);
    for (double v : res.traj.V) CHECK(v >= vmin - 1e-9);
  }

  TEST_CASE("proposed planner uses less energy than the distance baseline") {
    const Scenario sc = small_mission(100, 5);
    const auto prop = plan_sca_bcd(sc);
    const auto base = plan_baseline(sc);
    CHECK(prop.report.feasibility.pass);
    CHECK(base.report.feasibility.pass);
    CHECK(prop.traj.total_energy < base.traj.total_energy);
    // energy never rises along the proposed iterations
    const auto& it = prop.report.iterations;
    for (size_t k = 1; k < it.size(); ++k) CHECK(it[k].objective_J <= it[k - 1].objective_J * (1.0 + 1e-9));
    CHECK(total_distance(base.traj) <= total_distance(prop.traj) + 1e-6);
  }
}
