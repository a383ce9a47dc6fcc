#pragma once

#include "bisar/scenario.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisar {

enum class CdfMethod { closed_form, pdf_integration, monte_carlo };

std::string to_string(CdfMethod m);
CdfMethod parse_cdf_method(const std::string& s);  // closed | integrate | mc

struct ObjectField {
  double R = 0.0;
  Vec2 center{0.0, 0.0};
  std::vector<Vec2> points;
};

// Poisson(lambda pi R^2) points, uniform on the disk.
ObjectField sample_field(double R, double lambda, std::uint64_t seed);
// Exactly N points, uniform on the disk.
ObjectField sample_field_n(double R, int N, std::uint64_t seed);

// Density of the distance between two uniform points in a disk of radius R.
double pairwise_pdf(double l, double R);
// closed_form evaluates the published expression verbatim; pdf_integration
// integrates pairwise_pdf from 0 to l.
double pairwise_cdf(double l, double R, CdfMethod method);

struct DminResult {
  CdfMethod method;
  double value = 0.0;
  std::optional<double> stderr_m;  // monte-carlo only
  double error_estimate = 0.0;     // quadrature error estimate
  bool converged = true;
};

struct QuadratureError : std::runtime_error {
  double achieved;
  QuadratureError(const std::string& msg, double a) : std::runtime_error(msg), achieved(a) {}
};

DminResult expected_dmin(int N, double R, CdfMethod method, int trials = 10000, std::uint64_t seed = 1);

// Empirical pair distances of two independent uniform points.
std::vector<double> sample_pair_distances(double R, int n, std::uint64_t seed);

}  // namespace bisar
