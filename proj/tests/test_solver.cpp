#include "bisar/solver.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace bisar;

namespace {

struct DenseQp {
  Eigen::VectorXd q, c;  // objective sum q_i x_i^2 + c_i x_i
  Eigen::MatrixXd A;     // A x <= b
  Eigen::VectorXd b;
};

// Enumerates every active set and keeps the best KKT point.
Eigen::VectorXd active_set_oracle(const DenseQp& qp) {
  const int n = static_cast<int>(qp.q.size()), m = static_cast<int>(qp.b.size());
  double best = 1e300;
  Eigen::VectorXd arg;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> S;
    for (int j = 0; j < m; ++j)
      if (mask & (1 << j)) S.push_back(j);
    if (static_cast<int>(S.size()) > n) continue;
    const int k = static_cast<int>(S.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = (2.0 * qp.q).asDiagonal();
    rhs.head(n) = -qp.c;
    for (int r = 0; r < k; ++r) {
      K.block(0, n + r, n, 1) = qp.A.row(S[r]).transpose();
      K.block(n + r, 0, 1, n) = qp.A.row(S[r]);
      rhs[n + r] = qp.b[S[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd z = lu.solve(rhs);
    const Eigen::VectorXd x = z.head(n);
    if ((z.tail(k).array() < -1e-12).any()) continue;
    if (((qp.A * x - qp.b).array() > 1e-10).any()) continue;
    const double f = (qp.q.array() * x.array().square()).sum() + qp.c.dot(x);
    if (f < best) {
      best = f;
      arg = x;
    }
  }
  return arg;
}

ConvexSubproblem to_subproblem(const DenseQp& qp) {
  ConvexSubproblem p;
  for (int i = 0; i < qp.q.size(); ++i) {
    const int v = p.add_var("x" + std::to_string(i));
    p.obj.quad[v] = qp.q[i];
    p.obj.lin[v] = qp.c[i];
  }
  for (int j = 0; j < qp.b.size(); ++j) {
    Affine a(-qp.b[j]);
    for (int i = 0; i < qp.q.size(); ++i) a.add(i, qp.A(j, i));
    p.add(linear_le(a, "row" + std::to_string(j)));
  }
  return p;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("cubic objective against a lower bound") {
    ConvexSubproblem p;
    const int V = p.add_var("V", 0.0);
    p.obj.cubic[V] = 1.0;
    p.add(linear_le(Affine(1.0).add(V, -1.0)));  // V >= 1
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[V] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("inverse-square constraint") {
    ConvexSubproblem p;
    const int q = p.add_var("q", 0.0);
    p.obj.lin[q] = 1.0;
    p.add(inverse_square_le(q, Affine(4.0)));  // 1/q^2 <= 4
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[q] == doctest::Approx(0.5).epsilon(1e-6));
  }

  TEST_CASE("phase one") {
    ConvexSubproblem box;
    const int x = box.add_var("x", -1.0, 1.0);
    box.add_var("y", 2.0, 3.0);
    box.add(linear_le(Affine(-0.5).add(x, 1.0)));
    const auto ok = phase_one(box);
    CHECK(ok.feasible);
    CHECK(ok.x[0] < 0.5);
    CHECK(ok.x[1] > 2.0);
    CHECK(ok.x[1] < 3.0);

    ConvexSubproblem bad;
    const int z = bad.add_var("z");
    bad.add(linear_le(Affine(0.0).add(z, 1.0)));    // z <= 0
    bad.add(linear_le(Affine(1.0).add(z, -1.0)));   // z >= 1
    const auto nf = phase_one(bad);
    CHECK_FALSE(nf.feasible);
    CHECK(nf.s >= 0.5 - 1e-9);
    CHECK(solve(bad).status == SolveStatus::infeasible);

    // two disjoint balls of radius 150 whose centers are 320 m apart
    ConvexSubproblem balls;
    const int bx = balls.add_var("x"), by = balls.add_var("y");
    balls.add(soc_le({Affine(0.0).add(bx, 1.0), Affine(0.0).add(by, 1.0)}, Affine(150.0)));
    balls.add(soc_le({Affine(-320.0).add(bx, 1.0), Affine(0.0).add(by, 1.0)}, Affine(150.0)));
    const auto bf = phase_one(balls);
    CHECK_FALSE(bf.feasible);
    CHECK(bf.s >= 10.0 - 1e-6);
  }

  TEST_CASE("random diagonal QPs match active-set enumeration") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0), Q(0.2, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
      DenseQp qp;
      const int n = 3, m = 5;
      qp.q.resize(n);
      qp.c.resize(n);
      qp.A.resize(m, n);
      qp.b.resize(m);
      for (int i = 0; i < n; ++i) {
        qp.q[i] = Q(rng);
        qp.c[i] = 4.0 * U(rng);
      }
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) qp.A(j, i) = U(rng);
        qp.b[j] = 0.2 + 0.5 * (U(rng) + 1.0);  // origin strictly feasible
      }
      const Eigen::VectorXd xo = active_set_oracle(qp);
      REQUIRE(xo.size() == n);
      const auto r = solve(to_subproblem(qp));
      REQUIRE(r.status == SolveStatus::optimal);
      CHECK((r.x - xo).norm() < 1e-4);
      CHECK(r.kkt.primal <= 1e-6);
      CHECK(r.kkt.complementarity <= 1e-6);
    }
  }

  TEST_CASE("second-order cone and quadratic constraints") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Vector2d c(U(rng), U(rng)), p0(5 * U(rng), 5 * U(rng));
      const double rad = 1.0 + U(rng) * 0.5;
      ConvexSubproblem soc;
      const int x = soc.add_var("x"), y = soc.add_var("y");
      soc.obj.lin[x] = c.x();
      soc.obj.lin[y] = c.y();
      soc.add(soc_le({Affine(-p0.x()).add(x, 1.0), Affine(-p0.y()).add(y, 1.0)}, Affine(rad)));
      const auto r = solve(soc);
      REQUIRE(r.status == SolveStatus::optimal);
      const Eigen::Vector2d oracle = p0 - rad * c.normalized();
      CHECK((r.x - oracle).norm() < 1e-4);

      ConvexSubproblem qd;
      const int a = qd.add_var("a"), b = qd.add_var("b");
      qd.obj.lin[a] = c.x();
      qd.obj.lin[b] = c.y();
      qd.add(quadratic_le({Affine(0.0).add(a, 1.0), Affine(0.0).add(b, 1.0)}, Affine(-1.0)));  // unit disk
      const auto rq = solve(qd);
      REQUIRE(rq.status == SolveStatus::optimal);
      CHECK((rq.x + c.normalized()).norm() < 1e-4);
    }
  }

  TEST_CASE("replayed solution satisfies every constraint") {
    ConvexSubproblem p;
    const int x = p.add_var("x", -10.0, 10.0), y = p.add_var("y", -10.0, 10.0);
    p.obj.quad[x] = 1.0;
    p.obj.quad[y] = 1.0;
    p.obj.lin[x] = -6.0;
    p.add(soc_le({Affine(-1.0).add(x, 1.0), Affine(0.0).add(y, 1.0)}, Affine(1.0)));
    p.add(linear_le(Affine(0.5).add(y, -1.0)));
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(p.max_violation(r.x) <= 1e-6);
    for (const auto& c : p.cons) CHECK(c.value(r.x) <= 1e-6);

    // warm start from the optimum reproduces it
    const auto w = solve(p, &r.x);
    CHECK(w.status == SolveStatus::optimal);
    CHECK((w.x - r.x).norm() < 1e-4);
  }

  TEST_CASE("invalid problems are refused") {
    ConvexSubproblem p;
    const int x = p.add_var("x", -1.0, 1.0);
    p.obj.quad[x] = -1.0;
    CHECK_THROWS_AS(p.check(), std::invalid_argument);
  }
}
