#include "stripkde/densities.hpp"

#include "stripkde/format.hpp"
#include "stripkde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<std::string_view>
split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos)
      return out;
    start = pos + 1;
  }
}

double
positive(std::string_view s, const char* what)
{
  double v = parse_double(s);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive, got '" + std::string(s) + "'");
  return v;
}

// Largest |shift| of the boundary function's support.
double
boundary_extent(const BoundaryFunction& u)
{
  if (auto uni = std::get_if<UniformBoundary>(&u))
    return uni->half_width;
  const auto& pm = std::get<PointMassBoundary>(u);
  double e = 0.0;
  for (double s : pm.locations)
    e = std::max(e, std::fabs(s));
  return e;
}

std::complex<double>
sech_cdf_complex(double gamma0, std::complex<double> z)
{
  return (2.0 / pi) * std::atan(std::exp(pi * z / (2.0 * gamma0)));
}

} // namespace

double
sech_pdf(double gamma0, double x) noexcept
{
  return 1.0 / (2.0 * gamma0 * std::cosh(pi * x / (2.0 * gamma0)));
}

double
sech_cdf(double gamma0, double x) noexcept
{
  return (2.0 / pi) * std::atan(std::exp(pi * x / (2.0 * gamma0)));
}

double
sech_survival(double gamma0, double x) noexcept
{
  return (2.0 / pi) * std::atan(std::exp(-pi * x / (2.0 * gamma0)));
}

double
sech_quantile(double gamma0, double U) noexcept
{
  return (2.0 * gamma0 / pi) * std::log(std::tan(0.5 * pi * U));
}

double
cauchy_quantile(double a, double U) noexcept
{
  return a * std::tan(pi * (U - 0.5));
}

AnalyticDensity::AnalyticDensity(Kind kind, double param, BoundaryFunction u)
  : kind_(kind)
  , param_(param)
  , u_(std::move(u))
{
  if (!(param > 0.0) || !std::isfinite(param))
    throw std::invalid_argument("density parameter must be positive and finite");
}

AnalyticDensity
AnalyticDensity::sech(double gamma0)
{
  return AnalyticDensity(Kind::sech, gamma0, PointMassBoundary{ { 0.0 }, { 1.0 } });
}

AnalyticDensity
AnalyticDensity::cauchy(double scale)
{
  return AnalyticDensity(Kind::cauchy, scale, PointMassBoundary{ { 0.0 }, { 1.0 } });
}

AnalyticDensity
AnalyticDensity::convolution(double gamma0, BoundaryFunction u)
{
  if (auto uni = std::get_if<UniformBoundary>(&u)) {
    if (!(uni->half_width > 0.0) || !std::isfinite(uni->half_width))
      throw std::invalid_argument("uniform boundary half-width must be positive");
  } else {
    auto& pm = std::get<PointMassBoundary>(u);
    if (pm.locations.empty() || pm.locations.size() != pm.weights.size())
      throw std::invalid_argument("point-mass boundary needs matching locations and weights");
    double total = 0.0;
    for (std::size_t i = 0; i < pm.weights.size(); ++i) {
      if (!(pm.weights[i] > 0.0) || !std::isfinite(pm.locations[i]))
        throw std::invalid_argument("point-mass weights must be positive, locations finite");
      total += pm.weights[i];
    }
    if (std::fabs(total - 1.0) > 1e-12)
      throw std::invalid_argument("point-mass weights must sum to 1");
  }
  return AnalyticDensity(Kind::convolution, gamma0, std::move(u));
}

AnalyticDensity
AnalyticDensity::parse(std::string_view spec)
{
  auto parts = split(spec, ':');
  auto bad = [&](const std::string& why) {
    return std::invalid_argument("bad density spec '" + std::string(spec) + "': " + why);
  };
  if (parts[0] == "sech") {
    if (parts.size() != 2)
      throw bad("expected sech:GAMMA0");
    return sech(positive(parts[1], "sech gamma0"));
  }
  if (parts[0] == "cauchy") {
    if (parts.size() != 2)
      throw bad("expected cauchy:SCALE");
    return cauchy(positive(parts[1], "cauchy scale"));
  }
  if (parts[0] == "conv") {
    if (parts.size() != 4)
      throw bad("expected conv:GAMMA0:uniform:C or conv:GAMMA0:points:S@W,...");
    double g0 = positive(parts[1], "convolution gamma0");
    if (parts[2] == "uniform")
      return convolution(g0, UniformBoundary{ positive(parts[3], "uniform half-width") });
    if (parts[2] == "points") {
      PointMassBoundary pm;
      for (auto item : split(parts[3], ',')) {
        auto at = item.find('@');
        if (at == std::string_view::npos)
          throw bad("point mass must be LOCATION@WEIGHT");
        pm.locations.push_back(parse_double(item.substr(0, at)));
        pm.weights.push_back(parse_double(item.substr(at + 1)));
      }
      return convolution(g0, std::move(pm));
    }
    throw bad("unknown boundary function '" + std::string(parts[2]) + "'");
  }
  throw bad("unknown density kind '" + std::string(parts[0]) + "'");
}

const BoundaryFunction*
AnalyticDensity::boundary() const noexcept
{
  return kind_ == Kind::convolution ? &u_ : nullptr;
}

std::string
AnalyticDensity::id() const
{
  switch (kind_) {
    case Kind::sech:
      return "sech:" + format_shortest(param_);
    case Kind::cauchy:
      return "cauchy:" + format_shortest(param_);
    case Kind::convolution:
      break;
  }
  std::string out = "conv:" + format_shortest(param_);
  if (auto uni = std::get_if<UniformBoundary>(&u_))
    return out + ":uniform:" + format_shortest(uni->half_width);
  const auto& pm = std::get<PointMassBoundary>(u_);
  out += ":points:";
  for (std::size_t i = 0; i < pm.locations.size(); ++i) {
    if (i)
      out += ',';
    out += format_shortest(pm.locations[i]) + "@" + format_shortest(pm.weights[i]);
  }
  return out;
}

double
AnalyticDensity::pdf(double x) const
{
  switch (kind_) {
    case Kind::sech:
      return sech_pdf(param_, x);
    case Kind::cauchy:
      return param_ / (pi * (x * x + param_ * param_));
    case Kind::convolution:
      break;
  }
  if (auto uni = std::get_if<UniformBoundary>(&u_)) {
    // (F_G(x+c) - F_G(x-c)) / (2c), via survival functions on |x| for accuracy
    double c = uni->half_width;
    double ax = std::fabs(x);
    return (sech_survival(param_, ax - c) - sech_survival(param_, ax + c)) / (2.0 * c);
  }
  const auto& pm = std::get<PointMassBoundary>(u_);
  double acc = 0.0;
  for (std::size_t i = 0; i < pm.locations.size(); ++i)
    acc += pm.weights[i] * sech_pdf(param_, x - pm.locations[i]);
  return acc;
}

std::complex<double>
AnalyticDensity::pdf(std::complex<double> z) const
{
  switch (kind_) {
    case Kind::sech:
      return 1.0 / (2.0 * param_ * std::cosh(pi * z / (2.0 * param_)));
    case Kind::cauchy:
      return param_ / (pi * (z * z + param_ * param_));
    case Kind::convolution:
      break;
  }
  if (auto uni = std::get_if<UniformBoundary>(&u_)) {
    double c = uni->half_width;
    return (sech_cdf_complex(param_, z + c) - sech_cdf_complex(param_, z - c)) / (2.0 * c);
  }
  const auto& pm = std::get<PointMassBoundary>(u_);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < pm.locations.size(); ++i)
    acc += pm.weights[i] / (2.0 * param_ * std::cosh(pi * (z - pm.locations[i]) / (2.0 * param_)));
  return acc;
}

double
AnalyticDensity::cdf(double x) const
{
  switch (kind_) {
    case Kind::sech:
      return sech_cdf(param_, x);
    case Kind::cauchy:
      return 0.5 + std::atan(x / param_) / pi;
    case Kind::convolution:
      break;
  }
  if (auto uni = std::get_if<UniformBoundary>(&u_)) {
    double c = uni->half_width;
    if (x <= 0.0) {
      auto F = [&](double t) { return sech_cdf(param_, t); };
      return quad::gk61(F, x - c, x + c, 1e-14) / (2.0 * c);
    }
    auto S = [&](double t) { return sech_survival(param_, t); };
    return 1.0 - quad::gk61(S, x - c, x + c, 1e-14) / (2.0 * c);
  }
  const auto& pm = std::get<PointMassBoundary>(u_);
  double acc = 0.0;
  for (std::size_t i = 0; i < pm.locations.size(); ++i)
    acc += pm.weights[i] * sech_cdf(param_, x - pm.locations[i]);
  return acc;
}

double
AnalyticDensity::sup() const
{
  switch (kind_) {
    case Kind::sech:
      return 1.0 / (2.0 * param_);
    case Kind::cauchy:
      return 1.0 / (pi * param_);
    case Kind::convolution:
      break;
  }
  if (std::holds_alternative<UniformBoundary>(u_))
    return pdf(0.0);
  // a mixture of translates of G never exceeds G(0)
  return 1.0 / (2.0 * param_);
}

double
AnalyticDensity::tail_probability(double r) const
{
  if (!(r > 0.0))
    return 1.0;
  switch (kind_) {
    case Kind::sech:
      return std::min(1.0, 2.0 * sech_survival(param_, r));
    case Kind::cauchy:
      return std::min(1.0, 2.0 * std::atan2(param_, r) / pi);
    case Kind::convolution:
      break;
  }
  double shifted = r - boundary_extent(u_);
  if (!(shifted > 0.0))
    return 1.0;
  return std::min(1.0, 2.0 * sech_survival(param_, shifted));
}

double
AnalyticDensity::tail_exponent() const noexcept
{
  return kind_ == Kind::cauchy ? 2.0 : inf;
}

double
AnalyticDensity::core_radius() const noexcept
{
  double extent = kind_ == Kind::convolution ? boundary_extent(u_) : 0.0;
  return extent + 10.0 * param_;
}

double
AnalyticDensity::draw(Engine& engine) const
{
  double U = uniform_open(engine);
  switch (kind_) {
    case Kind::sech:
      return sech_quantile(param_, U);
    case Kind::cauchy:
      return cauchy_quantile(param_, U);
    case Kind::convolution:
      break;
  }
  double g = sech_quantile(param_, U);
  double V = uniform_open(engine);
  if (auto uni = std::get_if<UniformBoundary>(&u_))
    return g + uni->half_width * (2.0 * V - 1.0);
  const auto& pm = std::get<PointMassBoundary>(u_);
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < pm.weights.size(); ++i) {
    cum += pm.weights[i];
    if (V < cum)
      return g + pm.locations[i];
  }
  return g + pm.locations.back();
}

std::optional<double>
AnalyticDensity::boundary_lp_norm(double p) const
{
  if (kind_ != Kind::convolution)
    return std::nullopt;
  if (auto uni = std::get_if<UniformBoundary>(&u_))
    return std::pow(2.0 * uni->half_width, 1.0 / p - 1.0);
  // a point mass has total variation 1 but no Lp density for p > 1
  return p == 1.0 ? 1.0 : inf;
}

double
density_eval(const AnalyticDensity& d, double x)
{
  return d.pdf(x);
}

std::vector<double>
density_sample(const AnalyticDensity& d, std::uint64_t seed, std::size_t n)
{
  if (n == 0)
    throw std::invalid_argument("sample size must be at least 1");
  Engine engine(seed);
  std::vector<double> out(n);
  for (auto& x : out)
    x = d.draw(engine);
  return out;
}

double
density_norm(const AnalyticDensity& d, double q)
{
  if (!(q > 0.0) || !std::isfinite(q))
    throw std::invalid_argument("norm exponent must be positive");
  if (d.tail_exponent() * q <= 1.0) {
    std::ostringstream os;
    os << "||f||_q diverges for " << d.id() << " at q = " << q
       << " (tail ~ |x|^-" << d.tail_exponent() * q << ")";
    throw DivergentIntegral(os.str());
  }
  if (q == 1.0)
    return 1.0;
  double R = d.core_radius();
  auto fq = [&](double x) { return std::pow(d.pdf(x), q); };
  double integral = quad::real_line(fq, -R, 0.0, R, 1e-11);
  return std::pow(integral, 1.0 / q);
}

double
density_abs_moment(const AnalyticDensity& d, double lambda)
{
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw std::invalid_argument("moment order must lie in (0, 2]");
  if (lambda >= d.tail_exponent() - 1.0)
    return inf;
  double R = d.core_radius();
  auto g = [&](double x) { return std::pow(std::fabs(x), lambda) * d.pdf(x); };
  return quad::real_line(g, -R, 0.0, R, 1e-11);
}

double
sup_bound(double gamma, double p, double M)
{
  if (!(gamma > 0.0) || !(p >= 1.0) || !(M > 0.0))
    throw std::invalid_argument("sup_bound needs gamma > 0, p >= 1, M > 0");
  if (p == 1.0)
    return M / (2.0 * gamma);
  double q = p / (p - 1.0);
  // int_0^inf cosh^-q = sqrt(pi) Gamma(q/2) / (2 Gamma((q+1)/2))
  double half_integral =
    0.5 * std::sqrt(pi) * std::exp(std::lgamma(0.5 * q) - std::lgamma(0.5 * (q + 1.0)));
  // ||G||_q = (2 gamma)^(-1/p) pi^(-1/q) (2 int_0^inf cosh^-q)^(1/q)
  double g_norm =
    std::pow(2.0 * gamma, -1.0 / p) * std::pow(2.0 * half_integral / pi, 1.0 / q);
  return M * g_norm;
}

namespace {

template<class G>
double
two_sided_tail(G&& g, double B)
{
  double R = std::max(B, 0.0);
  double right = quad::half_line(g, R, 1e-10);
  double left = quad::half_line([&](double s) { return g(-s); }, R, 1e-10);
  return right + left;
}

TailDiagnostic
scan_tail(std::string condition, double exponent, double threshold, double scale,
          const std::function<double(double)>& tail)
{
  TailDiagnostic out{ std::move(condition), exponent, threshold, inf, {}, true };
  double prev = tail(0.0);
  out.profile.emplace_back(0.0, prev);
  double B = scale;
  for (int i = 0; i < 40 && !std::isfinite(out.radius); ++i, B *= 2.0) {
    double v = tail(B);
    out.profile.emplace_back(B, v);
    if (v > prev * (1.0 + 1e-9) + 1e-300)
      out.monotone = false;
    prev = v;
    if (v < threshold) {
      // refine between B/2 and B by bisection
      double lo = i == 0 ? 0.0 : 0.5 * B, hi = B;
      for (int it = 0; it < 30; ++it) {
        double mid = 0.5 * (lo + hi);
        (tail(mid) < threshold ? hi : lo) = mid;
      }
      out.radius = hi;
    }
  }
  return out;
}

} // namespace

double
tail_moment_integral(const AnalyticDensity& d, double lambda, double B)
{
  if (lambda >= d.tail_exponent() - 1.0)
    return inf;
  auto g = [&](double x) { return std::pow(std::fabs(x), lambda) * d.pdf(x); };
  return two_sided_tail(g, B);
}

double
tail_power_integral(const AnalyticDensity& d, double p, double B)
{
  if (d.tail_exponent() * 0.5 * p <= 1.0)
    return inf;
  auto g = [&](double x) { return std::pow(d.pdf(x), 0.5 * p); };
  return two_sided_tail(g, B);
}

TailDiagnostic
tail_diagnostic_a1(const AnalyticDensity& d, double lambda, double threshold)
{
  return scan_tail("A1", lambda, threshold, d.parameter(),
                   [&](double B) { return tail_moment_integral(d, lambda, B); });
}

TailDiagnostic
tail_diagnostic_a2(const AnalyticDensity& d, double p, double threshold)
{
  return scan_tail("A2", p, threshold, d.parameter(),
                   [&](double B) { return tail_power_integral(d, p, B); });
}

} // namespace stripkde
