#pragma once

#include "stripkde/rng.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stripkde {

//! Uniform weight u = 1/(2c) on [-c, c].
struct UniformBoundary
{
  double half_width;
};

//! Discrete mixture of point masses; weights sum to one.
struct PointMassBoundary
{
  std::vector<double> locations;
  std::vector<double> weights;
};

using BoundaryFunction = std::variant<UniformBoundary, PointMassBoundary>;

//! Raised for integrals that diverge for the requested exponent.
class DivergentIntegral : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! A test density analytic in the strip |Im z| < strip().
//!
//! - sech(g0): G(x) = 1 / (2 g0 cosh(pi x / (2 g0))), strip g0
//! - cauchy(a): a / (pi (x^2 + a^2)), strip a
//! - convolution(g0, u): (G * u)(x), strip g0
class AnalyticDensity
{
public:
  enum class Kind
  {
    sech,
    cauchy,
    convolution
  };

  static AnalyticDensity sech(double gamma0);
  static AnalyticDensity cauchy(double scale);
  static AnalyticDensity convolution(double gamma0, BoundaryFunction u);

  //! Parses "sech:G0", "cauchy:A", "conv:G0:uniform:C" or
  //! "conv:G0:points:S1@W1,S2@W2,...".
  static AnalyticDensity parse(std::string_view spec);

  Kind kind() const noexcept { return kind_; }
  double strip() const noexcept { return param_; }
  //! g0 for sech/convolution, a for cauchy.
  double parameter() const noexcept { return param_; }
  const BoundaryFunction* boundary() const noexcept;

  //! Canonical spec string; parse(id()) reproduces the density.
  std::string id() const;

  double pdf(double x) const;
  std::complex<double> pdf(std::complex<double> z) const;
  double cdf(double x) const;

  //! Global maximum of the density.
  double sup() const;
  //! P(|X| > r); an upper bound for the convolution kind.
  double tail_probability(double r) const;
  //! alpha when f(x) ~ C |x|^-alpha, +inf for exponentially decaying tails.
  double tail_exponent() const noexcept;
  //! Radius containing all the structure of the density (for quadrature).
  double core_radius() const noexcept;

  double draw(Engine& engine) const;

  //! ||u||_p of the boundary function (the class constant M) for the
  //! convolution kind; for point masses 1 at p = 1 and +inf above; nullopt otherwise.
  std::optional<double> boundary_lp_norm(double p) const;

private:
  AnalyticDensity(Kind kind, double param, BoundaryFunction u);

  Kind kind_;
  double param_;
  BoundaryFunction u_;
};

// Free-function API

double density_eval(const AnalyticDensity& d, double x);

//! n draws, deterministic in seed.
std::vector<double> density_sample(const AnalyticDensity& d, std::uint64_t seed, std::size_t n);

//! (int f^q)^(1/q). Throws DivergentIntegral when the tail makes it infinite.
double density_norm(const AnalyticDensity& d, double q);

//! int |x|^lambda f(x) dx for lambda in (0, 2]; +inf when it diverges.
double density_abs_moment(const AnalyticDensity& d, double lambda);

//! Hölder bound ||G||_q M on sup|f| over the class with strip gamma,
//! exponent p and ||u||_p <= M (1/p + 1/q = 1). p = 1 gives M / (2 gamma).
double sup_bound(double gamma, double p, double M);

// Sech kernel G with strip g0: density, CDF and survival function.
double sech_pdf(double gamma0, double x) noexcept;
double sech_cdf(double gamma0, double x) noexcept;
double sech_survival(double gamma0, double x) noexcept;
//! Inverse CDFs used by the samplers, U in (0, 1).
double sech_quantile(double gamma0, double U) noexcept;
double cauchy_quantile(double a, double U) noexcept;

//! int_{|x|>B} |x|^lambda f(x) dx, +inf if divergent.
double tail_moment_integral(const AnalyticDensity& d, double lambda, double B);
//! int_{|x|>B} f(x)^(p/2) dx, +inf if divergent.
double tail_power_integral(const AnalyticDensity& d, double p, double B);

struct TailDiagnostic
{
  std::string condition; //!< "A1" or "A2"
  double exponent;       //!< lambda for A1, p for A2
  double threshold;
  double radius;         //!< smallest B found with tail < threshold (+inf if none)
  std::vector<std::pair<double, double>> profile; //!< (B, tail) pairs
  bool monotone;
};

TailDiagnostic tail_diagnostic_a1(const AnalyticDensity& d, double lambda, double threshold = 1e-4);
TailDiagnostic tail_diagnostic_a2(const AnalyticDensity& d, double p, double threshold = 1e-4);

} // namespace stripkde
