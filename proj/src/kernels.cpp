#include "stripkde/kernels.hpp"

#include "stripkde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// Calls fn(lo, hi) for consecutive panels of (0, W] delimited by the zeros of
// sin(a x) and sin(b x); b == 0 means only the first family.
template<class Fn>
void
for_each_sign_panel(double a, double b, double W, Fn&& fn)
{
  const double za = pi / a;
  const double zb = b > 0.0 ? pi / b : inf;
  std::int64_t ja = 1, jb = 1;
  double prev = 0.0;
  for (;;) {
    double na = static_cast<double>(ja) * za;
    double nb = static_cast<double>(jb) * zb;
    double next = std::min(na, nb);
    if (next >= W) {
      fn(prev, W);
      return;
    }
    if (next > prev)
      fn(prev, next);
    prev = next;
    if (na <= next)
      ++ja;
    if (nb <= next)
      ++jb;
  }
}

} // namespace

KernelSpec::KernelSpec(double theta)
  : theta_(theta)
{
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("kernel theta must lie in [0, 1]");
}

SubcriticalSampleSize::SubcriticalSampleSize(double gamma, std::int64_t n)
  : std::invalid_argument([&] {
    auto min_n = static_cast<std::int64_t>(std::floor(std::exp(2.0 * gamma))) + 1;
    std::ostringstream os;
    os << "subcritical sample size: n = " << n << " gives N = ln(n)/(2 gamma) <= 1 for gamma = "
       << gamma << "; need n >= " << min_n;
    return os.str();
  }())
  , gamma_(gamma)
  , n_(n)
  , minimum_n_(static_cast<std::int64_t>(std::floor(std::exp(2.0 * gamma))) + 1)
{}

BandwidthSchedule
bandwidth_schedule(double gamma, std::int64_t n)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be positive and finite");
  if (n < 2)
    throw std::invalid_argument("sample size must be at least 2");
  double N = std::log(static_cast<double>(n)) / (2.0 * gamma);
  if (!(N > 1.0))
    throw SubcriticalSampleSize(gamma, n);
  double theta = 1.0 - 1.0 / N;
  return { gamma, n, N, theta, theta / N };
}

double
fejer_kernel_taylor(double x, const KernelSpec& spec) noexcept
{
  double t = spec.theta();
  return (1.0 + t) / (2.0 * pi) - x * x * (1.0 + t) * (1.0 + t * t) / (24.0 * pi);
}

double
fejer_kernel_closed_form(double x, const KernelSpec& spec)
{
  double ax = std::fabs(x);
  if (spec.is_sinc())
    return std::sin(ax) / (pi * ax);
  double t = spec.theta();
  // cos(t x) - cos(x) written as a product to avoid cancellation near 0
  return 2.0 * std::sin(0.5 * (1.0 + t) * ax) * std::sin(0.5 * (1.0 - t) * ax) /
         (pi * (1.0 - t) * ax * ax);
}

double
fejer_kernel_eval(double x, const KernelSpec& spec)
{
  if (!std::isfinite(x))
    throw std::domain_error("kernel argument must be finite");
  if (std::fabs(x) < kSeriesSwitch)
    return fejer_kernel_taylor(x, spec);
  return fejer_kernel_closed_form(x, spec);
}

double
fejer_kernel_ft(double t, const KernelSpec& spec) noexcept
{
  double at = std::fabs(t);
  double th = spec.theta();
  if (at <= th)
    return 1.0;
  if (at > 1.0)
    return 0.0;
  return (1.0 - at) / (1.0 - th);
}

KernelNorms
kernel_norms(const KernelSpec& spec)
{
  double th = spec.theta();
  KernelNorms out{ (1.0 + 2.0 * th) / (3.0 * pi), (1.0 + th) / (2.0 * pi), inf, inf };
  if (!spec.is_sinc()) {
    double log_term = 4.0 / (pi * pi) * std::log((1.0 + th) / (1.0 - th));
    out.l1_lower = log_term + 1.0 / 3.0;
    out.l1_upper = log_term + 2.0;
  }
  return out;
}

double
kernel_l1_quadrature(const KernelSpec& spec)
{
  if (spec.is_sinc())
    return inf;
  double th = spec.theta();
  double W = 1e4 / (1.0 - th);
  auto k = [&](double x) { return fejer_kernel_eval(x, spec); };
  // beyond a few slow periods each panel is smooth and one rule suffices
  const double zb_scale = 2.0 * pi / (1.0 - th);
  double half = 0.0;
  for_each_sign_panel(0.5 * (1.0 + th), 0.5 * (1.0 - th), W, [&](double lo, double hi) {
    half += std::fabs(quad::gk15(k, lo, hi, 1e-12, lo < 50.0 * zb_scale ? 6 : 0));
  });
  // mean of |2 sin(ax) sin(bx)| is 8/pi^2 for incommensurate frequencies
  double tail = 8.0 / (pi * pi * pi * (1.0 - th) * W);
  return 2.0 * (half + tail);
}

double
kernel_l2sq_quadrature(const KernelSpec& spec, double half_width)
{
  double th = spec.theta();
  auto k2 = [&](double x) {
    double v = fejer_kernel_eval(x, spec);
    return v * v;
  };
  double half = 0.0;
  double a = spec.is_sinc() ? 1.0 : 0.5 * (1.0 + th);
  double b = spec.is_sinc() ? 0.0 : 0.5 * (1.0 - th);
  const double zb_scale = b > 0.0 ? pi / b : pi;
  for_each_sign_panel(a, b, half_width, [&](double lo, double hi) {
    half += quad::gk15(k2, lo, hi, 1e-13, lo < 50.0 * zb_scale ? 6 : 0);
  });
  double tail = spec.is_sinc()
                  ? 1.0 / (2.0 * pi * pi * half_width)
                  : 1.0 / (3.0 * pi * pi * (1.0 - th) * (1.0 - th) * std::pow(half_width, 3));
  return 2.0 * (half + tail);
}

double
scaled_kernel_eval(double x, const BandwidthSchedule& sched)
{
  return fejer_kernel_eval(x / sched.h, KernelSpec(sched.theta)) / sched.h;
}

ScaledKernel::ScaledKernel(Family family, double theta, double h)
  : family_(family)
  , theta_(theta)
  , h_(h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("kernel bandwidth must be positive");
  if (family == Family::sinc) {
    theta_ = 1.0;
    alpha_ = 1.0 / h;
    beta_ = 0.0;
    scale_ = 1.0 / pi;
    c0_ = 1.0 / (pi * h);
    c2_ = 1.0 / (6.0 * pi * h * h * h);
  } else {
    if (!(theta >= 0.0 && theta < 1.0))
      throw std::invalid_argument("Fejer-type kernel needs theta in [0, 1)");
    alpha_ = 0.5 * (1.0 + theta) / h;
    beta_ = 0.5 * (1.0 - theta) / h;
    scale_ = 2.0 * h / (pi * (1.0 - theta));
    c0_ = (1.0 + theta) / (2.0 * pi * h);
    c2_ = (1.0 + theta) * (1.0 + theta * theta) / (24.0 * pi * h * h * h);
  }
}

ScaledKernel
ScaledKernel::fejer(const BandwidthSchedule& sched)
{
  return ScaledKernel(Family::fejer, sched.theta, sched.h);
}

ScaledKernel
ScaledKernel::fejer(double theta, double h)
{
  return ScaledKernel(Family::fejer, theta, h);
}

ScaledKernel
ScaledKernel::sinc(double h)
{
  return ScaledKernel(Family::sinc, 1.0, h);
}

double
ScaledKernel::operator()(double u) const noexcept
{
  double au = std::fabs(u);
  if (au < switch_radius())
    return c0_ - c2_ * u * u;
  if (family_ == Family::sinc)
    return scale_ * std::sin(alpha_ * au) / au;
  return scale_ * std::sin(alpha_ * au) * std::sin(beta_ * au) / (au * au);
}

double
ScaledKernel::peak() const noexcept
{
  return c0_;
}

double
ScaledKernel::tail_sup(double r) const noexcept
{
  if (!(r > 0.0))
    return peak();
  double bound = family_ == Family::sinc ? scale_ / r : scale_ / (r * r);
  return std::min(peak(), bound);
}

double
ScaledKernel::panel_length() const noexcept
{
  return pi / alpha_;
}

std::string
ScaledKernel::describe() const
{
  std::ostringstream os;
  os.precision(17);
  if (family_ == Family::sinc)
    os << "sinc(h=" << h_ << ")";
  else
    os << "fejer(theta=" << theta_ << ", h=" << h_ << ")";
  return os.str();
}

} // namespace stripkde
