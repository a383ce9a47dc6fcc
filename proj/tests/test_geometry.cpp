#include "bisar/geometry.hpp"
#include "bisar/planner.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

using namespace bisar;

namespace {

constexpr double kC = 299792458.0;

// Straight constant-speed flight along +x that keeps the landmark covered.
Trajectory straight_flight(const Scenario& sc, double V) {
  Trajectory tr;
  tr.positions.push_back(sc.q0);
  for (int t = 0; t < sc.T_w; ++t) {
    tr.positions.push_back(tr.positions.back() + Vec2(sc.delta * V, 0.0));
    tr.V.push_back(V);
    tr.w.push_back(0.0);
    tr.u.push_back(1.0);
    tr.q.push_back(1.0);
  }
  finalize_power(tr, sc);
  return tr;
}

// Scenario whose landmarks sit exactly on the sensing centers of straight_flight.
Scenario covered_scenario(int T, double V) {
  Scenario sc = default_scenario();
  sc.T_w = T;
  sc.q0 = Vec2(-200.0, 500.0);
  sc.landmarks.clear();
  for (int t = 1; t <= T; ++t) sc.landmarks.push_back(sc.q0 + Vec2(t * sc.delta * V, -1000.0));
  sc.source.pattern = "list";
  return sc;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("heading angles from displacement") {
    const Heading h = heading(Vec2(0, 0), Vec2(3, 4), 10.0, 0.5);
    CHECK(h.sin_a == doctest::Approx(0.8));
    CHECK(h.cos_a == doctest::Approx(0.6));
    const Heading u = unit_heading(Vec2(3, 4), Heading{0, 1});
    CHECK(u.sin_a == doctest::Approx(0.8));
    CHECK(u.cos_a == doctest::Approx(0.6));
    CHECK_FALSE(u.carried);
    const Heading z = unit_heading(Vec2(0, 0), u);
    CHECK(z.carried);
    CHECK(z.sin_a == u.sin_a);
  }

  TEST_CASE("sensing center sits a standoff to the right") {
    const SarParams sar;
    CHECK(standoff(sar) == doctest::Approx(1000.0).epsilon(1e-12));
    const Vec2 c1 = sensing_center(Vec2(0, 0), 0.0, 1.0, sar);  // heading +x
    CHECK(c1.x() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c1.y() == doctest::Approx(-1000.0));
    const Vec2 c2 = sensing_center(Vec2(0, 0), 1.0, 0.0, sar);  // heading +y
    CHECK(c2.x() == doctest::Approx(1000.0));
    CHECK(c2.y() == doctest::Approx(0.0).epsilon(1e-9));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const Vec2 d(U(rng), U(rng));
      const Heading h = unit_heading(d, Heading{0, 1});
      const Vec2 off = sensing_center(Vec2(5, 7), h.sin_a, h.cos_a, sar) - Vec2(5, 7);
      CHECK(std::abs(off.dot(d)) < 1e-9 * d.norm() * 1000.0);
      CHECK(d.x() * off.y() - d.y() * off.x() < 0.0);  // right-hand side
      CHECK(off.norm() == doctest::Approx(1000.0));
    }
  }

  TEST_CASE("sensing geometry is rotation equivariant") {
    const SarParams sar;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-100.0, 100.0), A(0.0, 2 * M_PI);
    for (int i = 0; i < 50; ++i) {
      const Vec2 q(U(rng), U(rng)), d(U(rng), U(rng));
      const double phi = A(rng);
      const Eigen::Rotation2Dd R(phi);
      const Heading h = unit_heading(d, Heading{0, 1});
      const Heading hr = unit_heading(R * d, Heading{0, 1});
      const Vec2 c = sensing_center(q, h.sin_a, h.cos_a, sar);
      const Vec2 cr = sensing_center(R * q, hr.sin_a, hr.cos_a, sar);
      CHECK((R * c - cr).norm() < 1e-9);
    }
  }

  TEST_CASE("incidence sine") {
    const BsParams bs;
    CHECK(incidence_sine(bs.q_b, bs) == 0.0);
    CHECK(incidence_sine(bs.q_b + Vec2(50, 0), bs) == doctest::Approx(1.0 / std::sqrt(2.0)));
    const double d = 1419.7;
    const double oracle = std::sin(std::atan2(d, bs.H_b));
    CHECK(incidence_sine(bs.q_b + Vec2(0, d), bs) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(0.99938).epsilon(1e-5));
  }

  TEST_CASE("range resolution table") {
    SarParams sar;
    const double expect[] = {3.81, 1.91, 1.27, 0.95};
    const double bands[] = {50e6, 100e6, 150e6, 200e6};
    for (int i = 0; i < 4; ++i) {
      sar.B = bands[i];
      const double dr = range_resolution(std::sin(M_PI / 3), sar);
      CHECK(std::abs(dr - expect[i]) <= 0.01);
      CHECK(dr == doctest::Approx(kC / (bands[i] * (std::sqrt(0.5) + std::sqrt(3.0) / 2))).epsilon(1e-12));
    }
  }

  TEST_CASE("azimuth resolution and minimum speed") {
    const SarParams sar;
    CHECK(azimuth_resolution(10.0, sar) == doctest::Approx(14.142).epsilon(1e-4));
    CHECK(min_speed(sar) == doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(azimuth_resolution(min_speed(sar), sar) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(std::isinf(azimuth_resolution(0.0, sar)));
    CHECK(slant_range(sar) == doctest::Approx(1000.0 * std::sqrt(2.0)));
  }

  TEST_CASE("sensing area size") {
    SarParams sar;
    CHECK_FALSE(sensing_area_size(sar).has_value());
    sar.L_a = 5e-4;
    sar.W_a = 5e-4;
    const auto S = sensing_area_size(sar);
    REQUIRE(S.has_value());
    CHECK(*S == doctest::Approx(M_PI / 4 * 200.0 * 4e5).epsilon(1e-12));
    CHECK(*S == doctest::Approx(6.28e7).epsilon(1e-3));
    sar.H = 2000.0;
    CHECK(*sensing_area_size(sar) == doctest::Approx(2.0 * *S).epsilon(1e-12));
  }

  TEST_CASE("range constant") {
    Scenario sc = default_scenario();
    const auto rc = range_constant(sc, RangeMode::squared);
    const double kappa = kC / (1.5e8 * 20.0) - std::sqrt(0.5);
    CHECK(rc.kappa == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(rc.kappa == doctest::Approx(-0.60711).epsilon(1e-4));
    CHECK(rc.active);
    CHECK(rc.C_r == doctest::Approx(2500.0 / (1 - kappa * kappa) - 2500.0).epsilon(1e-12));
    // the rounded 1459.6 m^2 figure uses c = 3e8
    CHECK(rc.C_r == doctest::Approx(1459.6).epsilon(5e-4));
    CHECK_FALSE(range_constant(sc, RangeMode::exact).active);

    sc.sar.B = 50e6;
    const auto rb = range_constant(sc, RangeMode::squared);
    CHECK(rb.kappa < 0.0);
    CHECK(rb.kappa == doctest::Approx(kC / 1e9 - std::sqrt(0.5)).epsilon(1e-12));

    sc.sar.B = 5e6;  // kappa above one
    CHECK_THROWS_AS(range_constant(sc, RangeMode::squared), ScenarioError);
  }

  TEST_CASE("verification of a covered straight flight") {
    const Scenario sc = covered_scenario(20, 10.0);
    const Trajectory tr = straight_flight(sc, 10.0);
    const auto rep = verify_trajectory(tr, sc, RangeMode::squared);
    CHECK(rep.pass);
    CHECK(rep.min_speed == 10.0);
    CHECK(rep.max_heading_residual < 1e-12);
    CHECK(rep.find("coverage")->worst_margin == doctest::Approx(sc.sar.r_s));
    CHECK(rep.find("range_standoff") != nullptr);
    CHECK(verify_trajectory(tr, sc, RangeMode::exact).find("range_standoff") == nullptr);
  }

  TEST_CASE("verification flags hovering and over-speed slots") {
    const Scenario sc = covered_scenario(20, 10.0);
    Trajectory hover;
    hover.positions.assign(21, sc.q0);
    hover.V.assign(20, 0.0);
    hover.w.assign(20, 0.0);
    hover.u.assign(20, 1.0);
    hover.q.assign(20, 1.0);
    finalize_power(hover, sc);
    const auto rh = verify_trajectory(hover, sc, RangeMode::squared);
    CHECK_FALSE(rh.pass);
    CHECK_FALSE(rh.find("azimuth_resolution")->pass);
    CHECK(rh.carried_heading_slots.size() == 20u);

    Trajectory fast = straight_flight(sc, 10.0);
    fast.V[6] = sc.power.V_m + 1.0;
    const auto rf = verify_trajectory(fast, sc, RangeMode::squared);
    const auto* ms = rf.find("max_speed");
    CHECK_FALSE(ms->pass);
    CHECK(ms->worst_slot == 7);
    CHECK(ms->worst_margin == doctest::Approx(-1.0));
    for (int t = 0; t < 20; ++t) CHECK(static_cast<bool>(ms->slot_ok[t]) == (t != 6));
  }

  TEST_CASE("verification catches a displacement longer than delta V") {
    const Scenario sc = covered_scenario(20, 10.0);
    Trajectory tr = straight_flight(sc, 10.0);
    tr.V[3] = 8.0;
    const auto rep = verify_trajectory(tr, sc, RangeMode::squared);
    CHECK_FALSE(rep.find("mobility")->pass);
    CHECK(rep.find("mobility")->worst_slot == 4);
    CHECK(rep.find("mobility")->worst_margin == doctest::Approx(-1.0));
  }
}
