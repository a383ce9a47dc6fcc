#include "bisar/stochastic.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace bisar {

namespace {

Vec2 uniform_in_disk(std::mt19937_64& rng, double R) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double r = R * std::sqrt(U(rng));
  const double a = 2.0 * M_PI * U(rng);
  return {r * std::cos(a), r * std::sin(a)};
}

void check_domain(double l, double R) {
  if (!(R > 0.0)) throw std::domain_error("disk radius must be positive");
  if (l < 0.0 || l > 2.0 * R) throw std::domain_error("distance outside [0, 2R]");
}

double closed_form_cdf(double l, double R) {
  const double x = l / (2.0 * R);
  return 1.0 + 2.0 / M_PI * (l * l / (R * R) - 1.0) * std::acos(x) -
         1.0 / (M_PI * R) * (1.0 + l * l / (2.0 * R * R)) * std::sqrt(std::max(0.0, 1.0 - x * x));
}

double integrate_pdf(double l, double R) {
  if (l <= 0.0) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [R](double x) { return pairwise_pdf(x, R); }, 0.0, l, 20, 1e-12, &err);
  return std::min(1.0, v);
}

}  // namespace

std::string to_string(CdfMethod m) {
  switch (m) {
    case CdfMethod::closed_form: return "closed-form";
    case CdfMethod::pdf_integration: return "pdf-integration";
    case CdfMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

CdfMethod parse_cdf_method(const std::string& s) {
  if (s == "closed" || s == "closed-form" || s == "paper-closed-form") return CdfMethod::closed_form;
  if (s == "integrate" || s == "pdf-integration") return CdfMethod::pdf_integration;
  if (s == "mc" || s == "monte-carlo") return CdfMethod::monte_carlo;
  throw std::invalid_argument("unknown method '" + s + "'");
}

ObjectField sample_field(double R, double lambda, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double mean = lambda * M_PI * R * R;
  int n = 0;
  if (mean > 0.0) n = std::poisson_distribution<int>(mean)(rng);
  ObjectField f;
  f.R = R;
  f.points.reserve(n);
  for (int i = 0; i < n; ++i) f.points.push_back(uniform_in_disk(rng, R));
  return f;
}

ObjectField sample_field_n(double R, int N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ObjectField f;
  f.R = R;
  f.points.reserve(std::max(N, 0));
  for (int i = 0; i < N; ++i) f.points.push_back(uniform_in_disk(rng, R));
  return f;
}

double pairwise_pdf(double l, double R) {
  check_domain(l, R);
  const double x = l / (2.0 * R);
  const double v =
      2.0 * l / (R * R) * (2.0 / M_PI * std::acos(x) - l / (M_PI * R) * std::sqrt(std::max(0.0, 1.0 - x * x)));
  return std::max(0.0, v);
}

double pairwise_cdf(double l, double R, CdfMethod method) {
  check_domain(l, R);
  switch (method) {
    case CdfMethod::closed_form: return closed_form_cdf(l, R);
    case CdfMethod::pdf_integration: return integrate_pdf(l, R);
    case CdfMethod::monte_carlo: {
      auto d = sample_pair_distances(R, 1000000, 12345);
      double c = 0;
      for (double v : d) c += v <= l;
      return c / d.size();
    }
  }
  return 0.0;
}

std::vector<double> sample_pair_distances(double R, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> d(n);
  for (auto& v : d) v = (uniform_in_disk(rng, R) - uniform_in_disk(rng, R)).norm();
  return d;
}

DminResult expected_dmin(int N, double R, CdfMethod method, int trials, std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  DminResult res;
  res.method = method;

  if (method == CdfMethod::monte_carlo) {
    if (trials < 2) throw std::invalid_argument("trials must be at least 2");
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < trials; ++k) {
      const Vec2 p = uniform_in_disk(rng, R);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 1; i < N; ++i) best = std::min(best, (uniform_in_disk(rng, R) - p).squaredNorm());
      const double m = std::sqrt(best);
      sum += m;
      sum2 += m * m;
    }
    res.value = sum / trials;
    const double var = std::max(0.0, (sum2 - trials * res.value * res.value) / (trials - 1));
    res.stderr_m = std::sqrt(var / trials);
    return res;
  }

  const double e = static_cast<double>(N - 1);
  auto integrand = [&](double l) {
    const double F = pairwise_cdf(l, R, method);
    return std::pow(1.0 - F, e);
  };
  double err = 0.0, l1 = 0.0;
  // the integrand decays on the scale of R/sqrt(N); split there so bisection
  // starts near the mass
  const double knee = std::min(2.0 * R, 8.0 * R / std::sqrt(e));
  const double a = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, knee, 25, 1e-8, &err,
                                                                                 &l1);
  double err2 = 0.0;
  double b = 0.0;
  if (knee < 2.0 * R)
    b = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, knee, 2.0 * R, 25, 1e-8, &err2);
  res.value = a + b;
  res.error_estimate = err + err2;
  const double rel = res.error_estimate / std::max(std::abs(res.value), 1e-300);
  if (rel > 1e-6) {
    res.converged = false;
    throw QuadratureError("quadrature did not reach rel tol 1e-6 (achieved " + std::to_string(rel) + ")", rel);
  }
  return res;
}

}  // namespace bisar
