#include "bisar/solver.hpp"

#include "bisar/log.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace bisar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_of(const std::vector<Affine>& F, const VectorXd& x) {
  double s = 0.0;
  for (const auto& f : F) {
    const double v = f.eval(x);
    s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

double Constraint::value(const VectorXd& x) const {
  switch (kind) {
    case ConKind::linear: return a.eval(x);
    case ConKind::soc: return norm_of(F, x) - a.eval(x);
    case ConKind::quadratic: {
      const double n = norm_of(F, x);
      return n * n + a.eval(x);
    }
    case ConKind::inverse_square: {
      const double q = x[var];
      if (q <= 0.0) return kInf;
      return 1.0 / (q * q) - a.eval(x);
    }
  }
  return kInf;
}

Constraint linear_le(Affine a, std::string tag) {
  Constraint c;
  c.kind = ConKind::linear;
  c.a = std::move(a);
  c.tag = std::move(tag);
  return c;
}

Constraint soc_le(std::vector<Affine> F, Affine a, std::string tag) {
  Constraint c;
  c.kind = ConKind::soc;
  c.F = std::move(F);
  c.a = std::move(a);
  c.tag = std::move(tag);
  return c;
}

Constraint quadratic_le(std::vector<Affine> F, Affine a, std::string tag) {
  Constraint c;
  c.kind = ConKind::quadratic;
  c.F = std::move(F);
  c.a = std::move(a);
  c.tag = std::move(tag);
  return c;
}

Constraint inverse_square_le(int var, Affine a, std::string tag) {
  Constraint c;
  c.kind = ConKind::inverse_square;
  c.var = var;
  c.a = std::move(a);
  c.tag = std::move(tag);
  return c;
}

int ConvexSubproblem::add_var(std::string name, double lo_, double hi_) {
  names.push_back(std::move(name));
  lo.conservativeResize(n + 1);
  hi.conservativeResize(n + 1);
  lo[n] = lo_;
  hi[n] = hi_;
  for (VectorXd* v : {&obj.lin, &obj.quad, &obj.cubic}) {
    v->conservativeResize(n + 1);
    (*v)[n] = 0.0;
  }
  return n++;
}

double ConvexSubproblem::objective(const VectorXd& x) const {
  double f = obj.constant;
  for (int i = 0; i < n; ++i) f += x[i] * (obj.lin[i] + x[i] * (obj.quad[i] + x[i] * obj.cubic[i]));
  return f;
}

double ConvexSubproblem::max_violation(const VectorXd& x) const {
  double v = 0.0;
  for (int i = 0; i < n; ++i) v = std::max({v, lo[i] - x[i], x[i] - hi[i]});
  for (const auto& c : cons) v = std::max(v, c.value(x));
  return v;
}

void ConvexSubproblem::check() const {
  if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
    throw std::invalid_argument("bound vectors do not match variable count");
  for (int i = 0; i < n; ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("inconsistent bounds on " + names[i]);
    if (obj.quad[i] < 0.0) throw std::invalid_argument("negative quadratic coefficient on " + names[i]);
    if (obj.cubic[i] < 0.0) throw std::invalid_argument("negative cubic coefficient on " + names[i]);
    if (obj.cubic[i] > 0.0 && lo[i] < 0.0) throw std::invalid_argument("cubic term needs a nonnegative lower bound on " + names[i]);
  }
  auto chk = [&](const Affine& a) {
    for (const auto& [i, v] : a.terms)
      if (i < 0 || i >= n) throw std::invalid_argument("constraint references unknown variable");
  };
  for (const auto& c : cons) {
    chk(c.a);
    for (const auto& f : c.F) chk(f);
    if (c.kind == ConKind::inverse_square && (c.var < 0 || c.var >= n))
      throw std::invalid_argument("inverse-square constraint without a variable");
  }
}

std::string ConvexSubproblem::dump() const {
  std::ostringstream o;
  o.precision(17);
  auto aff = [&](const Affine& a) {
    std::ostringstream s;
    s.precision(17);
    s << a.c;
    for (const auto& [i, v] : a.terms) s << (v < 0 ? " - " : " + ") << std::abs(v) << "*" << names[i];
    return s.str();
  };
  o << "variables " << n << "\n";
  for (int i = 0; i < n; ++i) o << "  " << names[i] << " in [" << lo[i] << ", " << hi[i] << "]\n";
  o << "objective\n  const " << obj.constant << "\n";
  for (int i = 0; i < n; ++i) {
    if (obj.lin[i] != 0.0) o << "  lin " << names[i] << " " << obj.lin[i] << "\n";
    if (obj.quad[i] != 0.0) o << "  quad " << names[i] << " " << obj.quad[i] << "\n";
    if (obj.cubic[i] != 0.0) o << "  cubic " << names[i] << " " << obj.cubic[i] << "\n";
  }
  o << "constraints " << cons.size() << "\n";
  for (const auto& c : cons) {
    o << "  [" << c.tag << "] ";
    switch (c.kind) {
      case ConKind::linear: o << "linear: " << aff(c.a) << " <= 0"; break;
      case ConKind::soc:
      case ConKind::quadratic:
        o << (c.kind == ConKind::soc ? "soc: ||" : "quadratic: ||");
        for (size_t k = 0; k < c.F.size(); ++k) o << (k ? ", " : "") << aff(c.F[k]);
        o << (c.kind == ConKind::soc ? "|| <= " : "||^2 + ") << aff(c.a) << (c.kind == ConKind::soc ? "" : " <= 0");
        break;
      case ConKind::inverse_square: o << "inverse-square: 1/" << names[c.var] << "^2 <= " << aff(c.a); break;
    }
    o << "\n";
  }
  return o.str();
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max-iter";
    case SolveStatus::infeasible: return "infeasible-detected";
  }
  return "?";
}

namespace {

// Constraint rewritten over its own support so gradients and Hessians are
// small dense blocks.
struct LocalAffine {
  std::vector<std::pair<int, double>> t;  // local index
  double c = 0.0;
};

struct Term {
  ConKind kind;
  std::vector<int> sup;
  LocalAffine a;
  std::vector<LocalAffine> F;
  int var = -1;  // local
  double degree = 1.0;
};

struct Compiled {
  int n = 0;
  VectorXd lo, hi;
  const Objective* obj = nullptr;
  std::vector<Term> terms;
  double degree = 0.0;  // sum of barrier parameters
};

Compiled compile(const ConvexSubproblem& p) {
  Compiled c;
  c.n = p.n;
  c.lo = p.lo;
  c.hi = p.hi;
  c.obj = &p.obj;
  for (int i = 0; i < p.n; ++i) c.degree += std::isfinite(p.lo[i]) + std::isfinite(p.hi[i]);
  c.terms.reserve(p.cons.size());
  for (const auto& con : p.cons) {
    Term t;
    t.kind = con.kind;
    std::vector<int> sup;
    for (const auto& [i, v] : con.a.terms) sup.push_back(i);
    for (const auto& f : con.F)
      for (const auto& [i, v] : f.terms) sup.push_back(i);
    if (con.var >= 0) sup.push_back(con.var);
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    auto local = [&](int g) { return static_cast<int>(std::lower_bound(sup.begin(), sup.end(), g) - sup.begin()); };
    auto conv = [&](const Affine& a) {
      LocalAffine la;
      la.c = a.c;
      for (const auto& [i, v] : a.terms) la.t.emplace_back(local(i), v);
      return la;
    };
    t.a = conv(con.a);
    for (const auto& f : con.F) t.F.push_back(conv(f));
    if (con.var >= 0) t.var = local(con.var);
    t.sup = std::move(sup);
    t.degree = con.kind == ConKind::soc ? 2.0 : 1.0;
    c.degree += t.degree;
    c.terms.push_back(std::move(t));
  }
  return c;
}

double leval(const LocalAffine& a, const double* xl) {
  double s = a.c;
  for (const auto& [i, v] : a.t) s += v * xl[i];
  return s;
}

// Slack g > 0 inside the domain; returns -1 when outside.
double term_slack(const Term& t, const double* xl) {
  switch (t.kind) {
    case ConKind::linear: return -leval(t.a, xl);
    case ConKind::soc: {
      const double a = leval(t.a, xl);
      if (a <= 0.0) return -1.0;
      double s = 0.0;
      for (const auto& f : t.F) {
        const double v = leval(f, xl);
        s += v * v;
      }
      return a * a - s;
    }
    case ConKind::quadratic: {
      double s = 0.0;
      for (const auto& f : t.F) {
        const double v = leval(f, xl);
        s += v * v;
      }
      return -(s + leval(t.a, xl));
    }
    case ConKind::inverse_square: {
      const double q = xl[t.var];
      if (q <= 0.0) return -1.0;
      return leval(t.a, xl) - 1.0 / (q * q);
    }
  }
  return -1.0;
}

struct Workspace {
  std::vector<double> xl, gl, Hl;
};

// Adds gradient and Hessian of -log(slack) for one term.
void term_derivs(const Term& t, const double* xl, Workspace& w) {
  const int k = static_cast<int>(t.sup.size());
  w.gl.assign(k, 0.0);   // gradient of slack
  w.Hl.assign(k * k, 0.0);  // Hessian of slack
  auto add_lin = [&](const LocalAffine& a, double s) {
    for (const auto& [i, v] : a.t) w.gl[i] += s * v;
  };
  auto add_outer = [&](const LocalAffine& a, const LocalAffine& b, double s) {
    for (const auto& [i, vi] : a.t)
      for (const auto& [j, vj] : b.t) w.Hl[i * k + j] += s * vi * vj;
  };
  switch (t.kind) {
    case ConKind::linear: add_lin(t.a, -1.0); break;
    case ConKind::soc: {
      const double a = leval(t.a, xl);
      add_lin(t.a, 2.0 * a);
      add_outer(t.a, t.a, 2.0);
      for (const auto& f : t.F) {
        const double v = leval(f, xl);
        add_lin(f, -2.0 * v);
        add_outer(f, f, -2.0);
      }
      break;
    }
    case ConKind::quadratic: {
      add_lin(t.a, -1.0);
      for (const auto& f : t.F) {
        const double v = leval(f, xl);
        add_lin(f, -2.0 * v);
        add_outer(f, f, -2.0);
      }
      break;
    }
    case ConKind::inverse_square: {
      const double q = xl[t.var];
      add_lin(t.a, 1.0);
      w.gl[t.var] += 2.0 / (q * q * q);
      w.Hl[t.var * k + t.var] += -6.0 / (q * q * q * q);
      break;
    }
  }
}

struct Eval {
  double psi;  // t f + phi
  double f;
};

bool evaluate(const Compiled& c, const VectorXd& x, double t, Eval& out, Workspace& w) {
  double phi = 0.0;
  for (int i = 0; i < c.n; ++i) {
    if (std::isfinite(c.lo[i])) {
      const double s = x[i] - c.lo[i];
      if (!(s > 0.0)) return false;
      phi -= std::log(s);
    }
    if (std::isfinite(c.hi[i])) {
      const double s = c.hi[i] - x[i];
      if (!(s > 0.0)) return false;
      phi -= std::log(s);
    }
  }
  for (const auto& term : c.terms) {
    w.xl.resize(term.sup.size());
    for (size_t j = 0; j < term.sup.size(); ++j) w.xl[j] = x[term.sup[j]];
    const double g = term_slack(term, w.xl.data());
    if (!(g > 0.0) || !std::isfinite(g)) return false;
    phi -= std::log(g);
  }
  const auto& o = *c.obj;
  double f = o.constant;
  for (int i = 0; i < c.n; ++i) f += x[i] * (o.lin[i] + x[i] * (o.quad[i] + x[i] * o.cubic[i]));
  out.f = f;
  out.psi = t * f + phi;
  return std::isfinite(out.psi);
}

void assemble(const Compiled& c, const VectorXd& x, double t, VectorXd& grad,
              std::vector<Eigen::Triplet<double>>& trip, Workspace& w) {
  grad.setZero(c.n);
  trip.clear();
  const auto& o = *c.obj;
  for (int i = 0; i < c.n; ++i) {
    double h = t * (2.0 * o.quad[i] + 6.0 * o.cubic[i] * x[i]);
    grad[i] = t * (o.lin[i] + x[i] * (2.0 * o.quad[i] + 3.0 * o.cubic[i] * x[i]));
    if (std::isfinite(c.lo[i])) {
      const double s = x[i] - c.lo[i];
      grad[i] -= 1.0 / s;
      h += 1.0 / (s * s);
    }
    if (std::isfinite(c.hi[i])) {
      const double s = c.hi[i] - x[i];
      grad[i] += 1.0 / s;
      h += 1.0 / (s * s);
    }
    trip.emplace_back(i, i, h);
  }
  for (const auto& term : c.terms) {
    const int k = static_cast<int>(term.sup.size());
    w.xl.resize(k);
    for (int j = 0; j < k; ++j) w.xl[j] = x[term.sup[j]];
    const double g = term_slack(term, w.xl.data());
    term_derivs(term, w.xl.data(), w);
    // phi = -log g: grad = -dg/g, hess = dg dg^T/g^2 - d2g/g
    for (int a = 0; a < k; ++a) {
      grad[term.sup[a]] -= w.gl[a] / g;
      for (int b = 0; b <= a; ++b) {
        const double h = w.gl[a] * w.gl[b] / (g * g) - 0.5 * (w.Hl[a * k + b] + w.Hl[b * k + a]) / g;
        const int ga = term.sup[a], gb = term.sup[b];
        trip.emplace_back(std::max(ga, gb), std::min(ga, gb), h);
      }
    }
  }
}

// Barrier parameter at which a warm start is closest to central: minimizes
// (t gf + gphi)' Hphi^-1 (t gf + gphi) over t.
double warm_start_t(const Compiled& c, const VectorXd& x, const SolverOptions& opt, double t_final) {
  Workspace w;
  VectorXd gphi(c.n), g1(c.n);
  std::vector<Eigen::Triplet<double>> trip;
  assemble(c, x, 1.0, g1, trip, w);
  assemble(c, x, 0.0, gphi, trip, w);
  const VectorXd gf = g1 - gphi;
  Eigen::SparseMatrix<double> H(c.n, c.n);
  H.setFromTriplets(trip.begin(), trip.end());
  for (int i = 0; i < c.n; ++i) H.coeffRef(i, i) += 1e-12 * (1.0 + std::abs(H.coeff(i, i)));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt(H);
  if (ldlt.info() != Eigen::Success) return opt.mu0;
  const VectorXd hf = ldlt.solve(gf);
  const double a = gf.dot(hf), b = gphi.dot(hf);
  if (!(a > 0.0) || !std::isfinite(b) || b >= 0.0) return opt.mu0;
  return std::clamp(-b / a, opt.mu0, t_final);
}

struct CoreResult {
  VectorXd x;
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
  double t = 1.0;
  double decrement = 0.0;
  double stationarity = 0.0;
  bool stopped_early = false;
  std::string message;
};

using StopFn = std::function<bool(const VectorXd&, double)>;

CoreResult barrier_core(const Compiled& c, VectorXd x, const SolverOptions& opt, const StopFn& stop_after_centering,
                        const StopFn& stop_on_step = {}, double t_start = 0.0) {
  CoreResult r;
  Workspace w;
  VectorXd grad(c.n), dx(c.n), xn(c.n), gn(c.n);
  std::vector<Eigen::Triplet<double>> trip, trip_ls;
  Eigen::SparseMatrix<double> H(c.n, c.n);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  bool analyzed = false;

  // the final gap degree / t lands at half of kkt_tol
  const double t_final = 2.0 * std::max(c.degree, 1.0) / opt.kkt_tol;
  double t = t_start > 0.0 ? std::min(t_start, t_final) : opt.mu0;
  Eval ev{};
  if (!evaluate(c, x, t, ev, w)) {
    r.x = x;
    r.message = "start point outside barrier domain";
    return r;
  }
  for (;;) {
    int inner = 0;
    bool centered = false;
    double lam = kInf;
    // psi - psi* <= lam^2 once lam <= 0.68, so lam^2 <= 1e-3 degree moves the
    // gap by at most 0.1% of degree / t
    const double lam_tol = std::max(opt.centering_tol, std::min(0.5, std::sqrt(1e-3 * c.degree)));
    // the last stage keeps polishing until the Lagrangian gradient meets kkt_tol
    const bool last = t >= t_final;
    bool loose = false;
    while (inner < opt.max_newton_per_stage && r.iterations < opt.max_newton_total) {
      assemble(c, x, t, grad, trip, w);
      H.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        ldlt.analyzePattern(H);
        analyzed = true;
      }
      ldlt.factorize(H);
      double shift = 0.0;
      while (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        shift = shift == 0.0 ? 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff()) : shift * 100.0;
        Eigen::SparseMatrix<double> Hs = H;
        for (int i = 0; i < c.n; ++i) Hs.coeffRef(i, i) += shift;
        ldlt.factorize(Hs);
        if (shift > 1e30) break;
      }
      dx = -ldlt.solve(grad);
      const double gdx = grad.dot(dx);
      lam = std::sqrt(std::max(0.0, -gdx));
      ++r.iterations;
      ++inner;
      if (!(gdx < 0.0) || (last ? grad.lpNorm<Eigen::Infinity>() <= opt.kkt_tol * t : lam <= lam_tol)) {
        centered = true;
        break;
      }
      loose = lam <= lam_tol;
      // backtracking on the barrier-augmented objective; once the predicted
      // decrease is below the rounding of psi, backtrack on the gradient norm
      const bool noisy = -gdx <= opt.stall_tol * (1.0 + std::abs(ev.psi));
      const double g0 = grad.norm();
      double s = 1.0;
      Eval en{};
      bool accepted = false;
      for (int ls = 0; ls < 200; ++ls) {
        xn = x + s * dx;
        if (evaluate(c, xn, t, en, w)) {
          if (noisy) {
            assemble(c, xn, t, gn, trip_ls, w);
            accepted = gn.norm() <= (1.0 - opt.ls_alpha * s) * g0;
          } else {
            accepted = en.psi <= ev.psi + opt.ls_alpha * s * gdx;
          }
          if (accepted) break;
        }
        s *= opt.ls_beta;
        if (s < 1e-16) break;
      }
      if (!accepted) {
        // descent lost in rounding: treat as centered when the predicted
        // decrease is negligible relative to psi
        if (noisy) {
          centered = true;
        } else {
          r.message = "line search step underflow";
        }
        break;
      }
      if (trace_enabled()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "newton t %.3e lambda %.4e step %.3e psi %.12e shift %.2e grad %.3e", t, lam, s,
                      en.psi, shift, grad.lpNorm<Eigen::Infinity>() / t);
        log_trace(buf);
      }
      x = xn;
      ev = en;
      if (stop_on_step && stop_on_step(x, t)) {
        r.x = x;
        r.t = t;
        r.decrement = lam;
        r.stopped_early = true;
        return r;
      }
    }
    r.decrement = lam;
    if (last && loose) centered = true;
    if (!centered) {
      r.x = x;
      r.t = t;
      if (r.message.empty()) r.message = "Newton iteration limit";
      return r;
    }
    if (stop_after_centering && stop_after_centering(x, t)) {
      r.x = x;
      r.t = t;
      r.stopped_early = true;
      return r;
    }
    if (t >= t_final) break;
    t = std::min(t * opt.mu_factor, t_final);
    if (!evaluate(c, x, t, ev, w)) break;
  }
  assemble(c, x, t, grad, trip, w);
  r.stationarity = grad.lpNorm<Eigen::Infinity>() / t;
  r.x = x;
  r.t = t;
  r.status = SolveStatus::optimal;
  return r;
}

VectorXd interior_of_bounds(const ConvexSubproblem& p, VectorXd x) {
  for (int i = 0; i < p.n; ++i) {
    const double lo = p.lo[i], hi = p.hi[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      // a start on or past a bound moves to the middle; clamping next to the
      // bound can blow up terms like 1/x^2
      const double m = std::min(1e-6 * (hi - lo), 1e-3 * (1.0 + std::abs(lo) + std::abs(hi)));
      if (!(x[i] > lo + m && x[i] < hi - m)) x[i] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      // a unit step inside keeps terms like 1/x^2 well scaled
      if (!(x[i] > lo + 1e-6 * (1.0 + std::abs(lo)))) x[i] = lo + 1.0;
    } else if (std::isfinite(hi)) {
      if (!(x[i] < hi - 1e-6 * (1.0 + std::abs(hi)))) x[i] = hi - 1.0;
    }
  }
  return x;
}

}  // namespace

bool strictly_feasible(const ConvexSubproblem& p, const VectorXd& x) {
  if (x.size() != p.n) return false;
  Compiled c = compile(p);
  Workspace w;
  Eval ev{};
  return evaluate(c, x, 1.0, ev, w);
}

PhaseOneOutcome phase_one(const ConvexSubproblem& p, const VectorXd* start, const SolverOptions& opt,
                          bool centered) {
  p.check();
  VectorXd x0 = start && start->size() == p.n ? *start : VectorXd::Zero(p.n);
  x0 = interior_of_bounds(p, x0);
  // inverse-square variables must be positive even without a bound
  for (const auto& con : p.cons)
    if (con.kind == ConKind::inverse_square && !(x0[con.var] > 0.0)) x0[con.var] = 1.0;

  // a far box on open sides keeps the phase-one barrier bounded below; without
  // it a variable can run off along its own one-sided log term
  ConvexSubproblem aug;
  for (int i = 0; i < p.n; ++i) {
    const double R = 1e4 * (1.0 + std::abs(x0[i]));
    aug.add_var(p.names[i], std::isfinite(p.lo[i]) ? p.lo[i] : x0[i] - R,
                std::isfinite(p.hi[i]) ? p.hi[i] : x0[i] + R);
  }
  const int s = aug.add_var("phase1_s", -1.0);
  aug.obj.lin[s] = 1.0;
  double smax = -kInf;
  for (const auto& con : p.cons) {
    Constraint r = con;
    switch (con.kind) {
      case ConKind::linear:
      case ConKind::quadratic: r.a.add(s, -1.0); break;
      case ConKind::soc:
      case ConKind::inverse_square: r.a.add(s, 1.0); break;
    }
    smax = std::max(smax, con.value(x0));
    aug.add(std::move(r));
  }
  PhaseOneOutcome out;
  if (p.cons.empty()) {
    out.feasible = true;
    out.x = x0;
    out.s = -1.0;
    return out;
  }
  VectorXd xa(aug.n);
  xa.head(p.n) = x0;
  xa[s] = std::max(smax, -0.5) + 1.0;
  // quadratic constraints evaluated at x0 can exceed value() rounding; nudge up
  Compiled c = compile(aug);
  Workspace w;
  Eval ev{};
  for (int k = 0; k < 60 && !evaluate(c, xa, 1.0, ev, w); ++k) xa[s] = 2.0 * xa[s] + 1.0;

  auto stop_neg = [&](const VectorXd& x, double) { return x[s] < 0.0; };
  auto stop_lb = [&](const VectorXd& x, double t) {
    // barrier duality bound: s* >= s - m/t
    return x[s] < 0.0 || x[s] - c.degree / t > 0.0;
  };
  SolverOptions o = opt;
  auto r = centered ? barrier_core(c, xa, o, stop_lb) : barrier_core(c, xa, o, stop_lb, stop_neg);
  out.x = r.x.head(p.n);
  out.s = r.x[s];
  out.iterations = r.iterations;
  out.feasible = r.x[s] < 0.0 && strictly_feasible(p, out.x);
  // only the duality bound proves infeasibility; a Newton limit proves nothing
  out.certified_infeasible = !out.feasible && r.stopped_early;
  return out;
}

SolveOutcome solve(const ConvexSubproblem& p, const VectorXd* warm_start, const SolverOptions& opt) {
  p.check();
  SolveOutcome out;
  VectorXd x0;
  bool warm = false;
  if (warm_start && warm_start->size() == p.n && strictly_feasible(p, *warm_start)) {
    x0 = *warm_start;
    warm = true;
  } else {
    auto ph = phase_one(p, warm_start, opt);
    out.used_phase_one = true;
    out.phase_one_slack = ph.s;
    out.iterations = ph.iterations;
    if (!ph.feasible) {
      out.status = ph.certified_infeasible ? SolveStatus::infeasible : SolveStatus::max_iter;
      out.x = ph.x;
      out.objective = p.objective(ph.x);
      out.kkt.primal = p.max_violation(ph.x);
      out.message = (ph.certified_infeasible ? "phase one min slack " : "phase one stopped at slack ") +
                    std::to_string(ph.s);
      log_debug("solver: " + out.message);
      return out;
    }
    x0 = ph.x;
  }
  Compiled c = compile(p);
  const double t0 = warm && opt.warm_start_t ? warm_start_t(c, x0, opt, 2.0 * std::max(c.degree, 1.0) / opt.kkt_tol)
                                             : opt.mu0;
  auto r = barrier_core(c, x0, opt, {}, {}, t0);
  if (r.status != SolveStatus::optimal && warm) {
    // a warm start pressed against many constraints at once: re-center it
    log_debug("solver: warm start at t " + std::to_string(t0) + " failed, re-centering");
    out.iterations += r.iterations;
    auto ph = phase_one(p, &x0, opt, true);
    out.iterations += ph.iterations;
    if (ph.feasible) r = barrier_core(c, ph.x, opt, {});
  }
  out.x = r.x;
  out.iterations += r.iterations;
  out.objective = p.objective(r.x);
  out.newton_decrement = r.decrement;
  out.kkt.stationarity = r.stationarity;
  out.kkt.primal = std::max(0.0, p.max_violation(r.x));
  out.kkt.dual = 0.0;  // barrier multipliers 1/(t g) are positive by construction
  out.kkt.complementarity = c.degree / r.t;
  out.message = r.message;
  if (r.status == SolveStatus::optimal && out.kkt.complementarity <= opt.kkt_tol * (1.0 + 1e-12) &&
      out.kkt.primal <= opt.kkt_tol) {
    out.status = SolveStatus::optimal;
  } else {
    out.status = SolveStatus::max_iter;
    log_debug("solver: stopped early (" + r.message + "), t " + std::to_string(r.t) + ", decrement " +
              std::to_string(r.decrement));
  }
  log_trace("solver: " + to_string(out.status) + " obj " + std::to_string(out.objective) + " newton " +
            std::to_string(out.iterations));
  return out;
}

}  // namespace bisar
