#include "stripkde/numerics.hpp"

#include "stripkde/format.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stripkde {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Smallest r (to relative 1e-3) with bound(r) <= tol; bound non-increasing.
template<class Bound>
double
solve_radius(Bound&& bound, double start, double tol)
{
  double hi = std::max(start, 1e-3);
  int guard = 0;
  while (bound(hi) > tol) {
    hi *= 2.0;
    if (++guard > 200)
      return inf;
  }
  double lo = 0.0;
  while (hi - lo > 1e-3 * hi) {
    double mid = 0.5 * (lo + hi);
    if (bound(mid) > tol)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

inline double
abs_pow(double v, double p)
{
  double a = std::fabs(v);
  if (p == 1.0)
    return a;
  if (p == 2.0)
    return a * a;
  if (p == 4.0) {
    double s = a * a;
    return s * s;
  }
  return std::pow(a, p);
}

} // namespace

std::size_t
GridSpec::size() const
{
  if (!(half_width > 0.0) || !(step > 0.0) || !std::isfinite(half_width) || !std::isfinite(step))
    throw std::invalid_argument("grid half-width and step must be positive");
  double intervals = 2.0 * half_width / step;
  double rounded = std::round(intervals);
  if (std::fabs(intervals - rounded) > 1e-9 * std::max(1.0, rounded))
    throw std::invalid_argument("grid step must divide 2 * half_width");
  if (rounded > 1e8)
    throw std::invalid_argument("grid too fine (more than 1e8 points)");
  return static_cast<std::size_t>(rounded) + 1;
}

GridFunction::GridFunction(double left, double step, std::vector<double> values)
  : left_(left)
  , step_(step)
  , values_(std::move(values))
{
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(left))
    throw std::invalid_argument("grid function needs a finite left end and positive step");
  if (values_.empty())
    throw std::invalid_argument("grid function needs at least one value");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os.precision(17);
      os << "non-finite grid value at x = " << x(i);
      throw std::domain_error(os.str());
    }
}

GridFunction
GridFunction::tabulate(const std::function<double(double)>& g, const GridSpec& grid)
{
  return tabulate(g, -grid.half_width, grid.step, grid.size());
}

GridFunction
GridFunction::tabulate(const std::function<double(double)>& g, double left, double step,
                       std::size_t count)
{
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = g(left + static_cast<double>(i) * step);
  return GridFunction(left, step, std::move(v));
}

bool
GridFunction::same_grid(const GridFunction& other) const noexcept
{
  return left_ == other.left_ && step_ == other.step_ && values_.size() == other.values_.size();
}

void
GridFunction::require_same_grid(const GridFunction& other, const char* what) const
{
  if (!same_grid(other))
    throw std::invalid_argument(std::string("grid mismatch in ") + what);
}

GridFunction
GridFunction::combine(double a, const GridFunction& other, double b) const
{
  require_same_grid(other, "combine");
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = a * values_[i] + b * other.values_[i];
  return GridFunction(left_, step_, std::move(v));
}

GridFunction
GridFunction::scaled(double c) const
{
  std::vector<double> v(values_);
  for (double& x : v)
    x *= c;
  return GridFunction(left_, step_, std::move(v));
}

double
lp_integral(const GridFunction& g, double p)
{
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("lp norm needs finite p >= 1");
  auto v = g.values();
  if (v.size() == 1)
    return 0.0;
  double s = 0.5 * (abs_pow(v.front(), p) + abs_pow(v.back(), p));
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    s += abs_pow(v[i], p);
  return s * g.step();
}

LpNorm
lp_norm(const GridFunction& g, double p)
{
  double integral = lp_integral(g, p);
  auto v = g.values();
  double peak = 0.0;
  for (double x : v)
    peak = std::max(peak, std::fabs(x));
  double edge = std::max(std::fabs(v.front()), std::fabs(v.back()));
  return { std::pow(integral, 1.0 / p), edge > 1e-6 * peak };
}

std::complex<double>
numerical_ft(const GridFunction& g, double t)
{
  // e^{-i t x_j} by a rotation recurrence, reseeded every block to bound drift
  constexpr std::size_t block = 256;
  auto v = g.values();
  const std::complex<double> rot = std::polar(1.0, -t * g.step());
  double re = 0.0, im = 0.0;
  for (std::size_t start = 0; start < v.size(); start += block) {
    std::complex<double> z = std::polar(1.0, -t * g.x(start));
    std::size_t end = std::min(v.size(), start + block);
    for (std::size_t j = start; j < end; ++j) {
      double w = v[j];
      if (j == 0 || j + 1 == v.size())
        w *= 0.5;
      re += w * z.real();
      im += w * z.imag();
      z *= rot;
    }
  }
  return { re * g.step(), im * g.step() };
}

std::vector<std::complex<double>>
numerical_ft(const GridFunction& g, std::span<const double> ts)
{
  std::vector<std::complex<double>> out(ts.size());
  const auto count = static_cast<std::int64_t>(ts.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = numerical_ft(g, ts[static_cast<std::size_t>(i)]);
  return out;
}

KernelFunction
KernelFunction::from(const ScaledKernel& k)
{
  return { [k](double u) { return k(u); }, k.panel_length(),
           [k](double r) { return k.tail_sup(r); } };
}

KernelFunction
KernelFunction::squared(const ScaledKernel& k)
{
  return { [k](double u) {
            double v = k(u);
            return v * v;
          },
           k.panel_length(),
           [k](double r) {
             double s = k.tail_sup(r);
             return s * s;
           } };
}

namespace {

double
y_window(const KernelFunction& kernel, const AnalyticDensity& d, double tol)
{
  double peak = kernel.tail_sup(0.0);
  return solve_radius([&](double r) { return peak * d.tail_probability(r); },
                      d.core_radius(), tol);
}

double
convolve_windowed(const KernelFunction& kernel, const AnalyticDensity& d, double x, double R,
                  double tol)
{
  // neglected mass beyond |x - y| > W is at most tail_sup(W) P(|X| > W - |x|)
  double ax = std::fabs(x);
  double W = solve_radius(
    [&](double w) {
      double r = w - ax;
      return kernel.tail_sup(w) * (r > 0.0 ? d.tail_probability(r) : 1.0);
    },
    ax + d.core_radius(), tol);
  double lo = std::max(-R, x - W);
  double hi = std::min(R, x + W);
  if (!(lo < hi))
    return 0.0;
  // integrate in u = x - y on panels aligned with the kernel's oscillation
  double ulo = x - hi, uhi = x - lo;
  auto integrand = [&](double u) { return kernel.eval(u) * d.pdf(x - u); };
  double P = kernel.panel;
  auto j0 = static_cast<std::int64_t>(std::floor(ulo / P));
  auto j1 = static_cast<std::int64_t>(std::ceil(uhi / P));
  double total = 0.0;
  for (std::int64_t j = j0; j < j1; ++j) {
    double a = std::max(ulo, static_cast<double>(j) * P);
    double b = std::min(uhi, static_cast<double>(j + 1) * P);
    if (!(a < b))
      continue;
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, b, 8,
                                                                             1e-10, &err);
    if (!std::isfinite(v) || err > 1e-7 * std::fabs(v) + 1e-13) {
      std::ostringstream os;
      os.precision(17);
      os << "convolution quadrature did not converge at x = " << x << " (panel [" << a << ", "
         << b << "], error estimate " << err << ")";
      throw std::runtime_error(os.str());
    }
    total += v;
  }
  return total;
}

} // namespace

double
convolve_at(const KernelFunction& kernel, const AnalyticDensity& d, double x, double tol)
{
  return convolve_windowed(kernel, d, x, y_window(kernel, d, tol), tol);
}

GridFunction
convolve_with_density(const KernelFunction& kernel, const AnalyticDensity& d, const GridSpec& grid,
                      double tol)
{
  const std::size_t m = grid.size();
  const double R = y_window(kernel, d, tol);
  std::vector<double> v(m);
  std::string failure;
  const auto count = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      v[static_cast<std::size_t>(i)] =
        convolve_windowed(kernel, d, grid.x(static_cast<std::size_t>(i)), R, tol);
    } catch (const std::exception& e) {
#pragma omp critical(stripkde_convolve_failure)
      if (failure.empty())
        failure = e.what();
    }
  }
  if (!failure.empty())
    throw std::runtime_error(failure);
  return GridFunction(-grid.half_width, grid.step, std::move(v));
}

void
write_csv(std::ostream& os, const GridFunction& g, const std::string& value_name)
{
  os << "x," << value_name << '\n';
  for (std::size_t i = 0; i < g.size(); ++i)
    os << format_g17(g.x(i)) << ',' << format_g17(g[i]) << '\n';
}

} // namespace stripkde
