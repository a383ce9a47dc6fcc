#include "bisar/power.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bisar;

namespace {

// Direct evaluation with the induced term written as in the rotary-wing model.
double oracle_power(double V, const PowerParams& p) {
  const double k = 0.5 * p.d_f * p.rho * p.s * p.A;
  const double v4 = std::pow(V, 4), v04 = std::pow(p.v0, 4);
  const double induced = std::sqrt(std::sqrt(1.0 + v4 / (4.0 * v04)) - V * V / (2.0 * p.v0 * p.v0));
  return p.P0 * (1.0 + 3.0 * V * V / (p.U_tip * p.U_tip)) + p.P1 * induced + k * V * V * V;
}

}  // namespace

TEST_SUITE("power") {
  TEST_CASE("hover power") {
    const PowerParams p;
    CHECK(propulsion_power(0.0, p) == doctest::Approx(121.4).epsilon(1e-12));
    CHECK(reformulated_power(0.0, 1.0, p) == doctest::Approx(121.4).epsilon(1e-12));
  }

  TEST_CASE("parasite coefficient is half d_f rho s A") {
    const PowerParams p;
    CHECK(parasite_coeff(p) == doctest::Approx(0.0018375).epsilon(1e-12));
    const double V = 1e4;
    CHECK(propulsion_power(V, p) / (V * V * V) == doctest::Approx(0.0018375).epsilon(1e-6));
  }

  TEST_CASE("induced factor closed values") {
    const PowerParams p;
    CHECK(q_star(0.0, p) == 1.0);
    const double qv0 = std::sqrt((std::sqrt(5.0) - 1.0) / 2.0);
    CHECK(q_star(p.v0, p) == doctest::Approx(qv0).epsilon(1e-14));
    CHECK(qv0 == doctest::Approx(0.78615).epsilon(1e-5));
    const double q = q_star(p.v0, p);
    CHECK(1.0 / (q * q) - q * q == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("reformulation identity and induced equation on random speeds") {
    const PowerParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, p.V_m);
    for (int i = 0; i < 1000; ++i) {
      const double V = U(rng);
      const double q = q_star(V, p);
      CHECK(std::abs(reformulated_power(V, q, p) - oracle_power(V, p)) / oracle_power(V, p) < 1e-9);
      CHECK(std::abs(1.0 / (q * q) - q * q - V * V / (p.v0 * p.v0)) < 1e-10);
    }
    CHECK(reformulated_power(50.0, q_star(50.0, p), p) == doctest::Approx(oracle_power(50.0, p)).epsilon(1e-12));
  }

  TEST_CASE("reformulated power is convex in (V, q)") {
    const PowerParams p;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> UV(0.0, p.V_m), Uq(1e-3, 2.0);
    for (int i = 0; i < 1000; ++i) {
      const double v1 = UV(rng), v2 = UV(rng), q1 = Uq(rng), q2 = Uq(rng);
      const double mid = reformulated_power(0.5 * (v1 + v2), 0.5 * (q1 + q2), p);
      const double avg = 0.5 * (reformulated_power(v1, q1, p) + reformulated_power(v2, q2, p));
      CHECK(mid <= avg + 1e-12);
    }
  }

  TEST_CASE("induced linearization touches at its point and under-estimates elsewhere") {
    const PowerParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> UV(0.0, p.V_m), Uq(0.05, 1.5);
    for (int i = 0; i < 200; ++i) {
      const double qb = Uq(rng), Vb = UV(rng), q = Uq(rng), V = UV(rng);
      const double exact = qb * qb + Vb * Vb / (p.v0 * p.v0);
      CHECK(induced_lower_bound(qb, Vb, qb, Vb, p) == doctest::Approx(exact).epsilon(1e-15));
      CHECK(induced_lower_bound(q, V, qb, Vb, p) <= q * q + V * V / (p.v0 * p.v0) + 1e-12);
    }
  }

  TEST_CASE("minimum-power speed agrees with a fine grid") {
    const PowerParams p;
    double best = 1e300, arg = 0.0;
    for (int i = 0; i <= 70000; ++i) {
      const double V = i * 1e-3;
      const double P = oracle_power(V, p);
      if (P < best) {
        best = P;
        arg = V;
      }
    }
    const auto m = min_power(p, 0.0, 70.0);
    CHECK(m.V == doctest::Approx(arg).epsilon(1e-4));
    CHECK(m.P == doctest::Approx(best).epsilon(1e-9));
  }
}
