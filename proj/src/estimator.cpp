#include "stripkde/estimator.hpp"

#include "stripkde/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double>
sorted_copy(std::span<const double> sample)
{
  if (sample.empty())
    throw std::invalid_argument("sample must not be empty");
  std::vector<double> s(sample.begin(), sample.end());
  for (double x : s)
    if (!std::isfinite(x))
      throw std::invalid_argument("sample contains a non-finite value");
  std::sort(s.begin(), s.end());
  return s;
}

double
reference_sum(std::span<const double> xs, const ScaledKernel& k, double x)
{
  double acc = 0.0;
  for (double X : xs)
    acc += k(x - X);
  return acc;
}

GridFunction
evaluate_reference(const std::vector<double>& xs, const ScaledKernel& k, const GridSpec& grid)
{
  const std::size_t m = grid.size();
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = reference_sum(xs, k, grid.x(j)) * inv_n;
  return GridFunction(-grid.half_width, grid.step, std::move(out));
}

// Sum of term(i) over [begin, end) in eight interleaved lanes combined in a
// fixed order. The order does not depend on buffer alignment, so vectorized
// builds give bit-identical results from call to call.
template<class Term>
inline double
lane_sum(std::int64_t begin, std::int64_t end, Term&& term)
{
  constexpr int W = 8;
  double lane[W] = {};
  std::int64_t i = begin;
  for (; i + W <= end; i += W) {
#pragma omp simd
    for (int q = 0; q < W; ++q)
      lane[q] += term(i + q);
  }
  double rest = 0.0;
  for (; i < end; ++i)
    rest += term(i);
  return (((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]))) +
         rest;
}

// Sum of k(x - X_i) over [i0, i1) by angle addition, without the Taylor
// branch: callers keep |x - X_i| away from zero.
struct TrigTables
{
  std::vector<double> sa, ca, sb, cb;

  TrigTables(const std::vector<double>& xs, const ScaledKernel& k)
    : sa(xs.size())
    , ca(xs.size())
    , sb(xs.size())
    , cb(xs.size())
  {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sa[i] = std::sin(k.alpha() * xs[i]);
      ca[i] = std::cos(k.alpha() * xs[i]);
      sb[i] = std::sin(k.beta() * xs[i]);
      cb[i] = std::cos(k.beta() * xs[i]);
    }
  }
};

double
trig_sum_fejer(const double* X, const TrigTables& t, std::size_t i0, std::size_t i1, double x,
               double sax, double cax, double sbx, double cbx)
{
  const double* sa = t.sa.data();
  const double* ca = t.ca.data();
  const double* sb = t.sb.data();
  const double* cb = t.cb.data();
  return lane_sum(static_cast<std::int64_t>(i0), static_cast<std::int64_t>(i1), [=](std::int64_t i) {
    double u = x - X[i];
    double sA = sax * ca[i] - cax * sa[i];
    double sB = sbx * cb[i] - cbx * sb[i];
    return sA * sB / (u * u);
  });
}

double
trig_sum_sinc(const double* X, const TrigTables& t, std::size_t i0, std::size_t i1, double x,
              double sax, double cax)
{
  const double* sa = t.sa.data();
  const double* ca = t.ca.data();
  return lane_sum(static_cast<std::int64_t>(i0), static_cast<std::int64_t>(i1), [=](std::int64_t i) {
    return (sax * ca[i] - cax * sa[i]) / (x - X[i]);
  });
}

GridFunction
evaluate_direct(const std::vector<double>& xs, const ScaledKernel& k, const GridSpec& grid)
{
  const std::size_t m = grid.size();
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  const double near = 2.0 * k.h();
  const bool sinc = k.family() == ScaledKernel::Family::sinc;
  TrigTables tables(xs, k);
  std::vector<double> out(m);
  const auto count = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t jj = 0; jj < count; ++jj) {
    auto j = static_cast<std::size_t>(jj);
    double x = grid.x(j);
    auto lo = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x - near) - xs.begin());
    auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x + near) - xs.begin());
    double sax = std::sin(k.alpha() * x), cax = std::cos(k.alpha() * x);
    double far = 0.0;
    if (sinc) {
      far = trig_sum_sinc(xs.data(), tables, 0, lo, x, sax, cax) +
            trig_sum_sinc(xs.data(), tables, hi, xs.size(), x, sax, cax);
    } else {
      double sbx = std::sin(k.beta() * x), cbx = std::cos(k.beta() * x);
      far = trig_sum_fejer(xs.data(), tables, 0, lo, x, sax, cax, sbx, cbx) +
            trig_sum_fejer(xs.data(), tables, hi, xs.size(), x, sax, cax, sbx, cbx);
    }
    double close = reference_sum(std::span<const double>(xs).subspan(lo, hi - lo), k, x);
    out[j] = (k.scale() * far + close) * inv_n;
  }
  return GridFunction(-grid.half_width, grid.step, std::move(out));
}

// Band-limited spreading. The lattice y_l = -L + (l - o) delta contains
// every grid point (delta = step / s). For a kernel with bandwidth B and
// delta B < pi,
//   k(x - X) = sum_l k(x - y_l) phi((X - y_l) / delta),
//   phi(d) = sin(pi d) / (pi d) exp(-d^2 / (2 r^2)),
// up to exp(-K (pi - delta B) / 2) with K taps per side.
GridFunction
evaluate_spread(const std::vector<double>& xs, const ScaledKernel& k, const GridSpec& grid)
{
  const std::size_t m = grid.size();
  const double L = grid.half_width;
  const double B = k.bandwidth();
  const auto s = static_cast<std::int64_t>(std::max(1.0, std::ceil(grid.step * B / (0.25 * pi))));
  const double delta = grid.step / static_cast<double>(s);
  const double margin = pi - delta * B;
  const auto K = static_cast<std::int64_t>(std::ceil(74.0 / margin));
  const double r2 = static_cast<double>(K) / margin;
  const auto o = static_cast<std::int64_t>(std::ceil(L / delta));
  const std::int64_t top = 2 * o + static_cast<std::int64_t>(m - 1) * s;

  std::vector<double> w(static_cast<std::size_t>(top + 1), 0.0);
  std::vector<double> outliers;
  std::int64_t lmin = top, lmax = 0;
  for (double X : xs) {
    double u = (X + L) / delta + static_cast<double>(o);
    if (!(u >= static_cast<double>(K) && u <= static_cast<double>(top - K))) {
      outliers.push_back(X);
      continue;
    }
    auto l0 = static_cast<std::int64_t>(std::floor(u));
    double frac = u - static_cast<double>(l0);
    if (frac == 0.0) {
      w[static_cast<std::size_t>(l0)] += 1.0;
      lmin = std::min(lmin, l0);
      lmax = std::max(lmax, l0);
      continue;
    }
    double sp = std::sin(pi * frac) / pi;
    for (std::int64_t t = -K + 1; t <= K; ++t) {
      double d = frac - static_cast<double>(t);
      double tap = ((t & 1) ? -sp : sp) / d * std::exp(-0.5 * d * d / r2);
      w[static_cast<std::size_t>(l0 + t)] += tap;
    }
    lmin = std::min(lmin, l0 - K + 1);
    lmax = std::max(lmax, l0 + K);
  }

  // table[q] = k((q - Mx) delta), even in q - Mx
  const std::int64_t Mx = o + static_cast<std::int64_t>(m - 1) * s;
  std::vector<double> table(static_cast<std::size_t>(2 * Mx + 1));
  for (std::int64_t q = 0; q <= Mx; ++q) {
    double v = k(static_cast<double>(q) * delta);
    table[static_cast<std::size_t>(Mx + q)] = v;
    table[static_cast<std::size_t>(Mx - q)] = v;
  }

  const double inv_n = 1.0 / static_cast<double>(xs.size());
  std::vector<double> out(m);
  const double* wp = w.data();
  const double* tp = table.data();
  const auto count = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < count; ++j) {
    double acc = 0.0;
    if (lmin <= lmax) {
      // x_j - y_l = (o + j s - l) delta
      const double* row = tp + (Mx - o - j * s);
      acc = lane_sum(lmin, lmax + 1, [=](std::int64_t l) { return wp[l] * row[l]; });
    }
    acc += reference_sum(outliers, k, grid.x(static_cast<std::size_t>(j)));
    out[static_cast<std::size_t>(j)] = acc * inv_n;
  }
  return GridFunction(-L, grid.step, std::move(out));
}

} // namespace

Evaluator
parse_evaluator(std::string_view name)
{
  if (name == "reference")
    return Evaluator::reference;
  if (name == "direct")
    return Evaluator::direct;
  if (name == "spread")
    return Evaluator::spread;
  throw std::invalid_argument("unknown evaluator '" + std::string(name) +
                              "' (expected reference, direct or spread)");
}

std::string
to_string(Evaluator e)
{
  switch (e) {
    case Evaluator::reference:
      return "reference";
    case Evaluator::direct:
      return "direct";
    case Evaluator::spread:
      return "spread";
  }
  return "?";
}

GridFunction
kde_evaluate(std::span<const double> sample, const ScaledKernel& kernel, const GridSpec& grid,
             Evaluator evaluator)
{
  auto xs = sorted_copy(sample);
  switch (evaluator) {
    case Evaluator::reference:
      return evaluate_reference(xs, kernel, grid);
    case Evaluator::direct:
      return evaluate_direct(xs, kernel, grid);
    case Evaluator::spread:
      return evaluate_spread(xs, kernel, grid);
  }
  throw std::logic_error("bad evaluator");
}

GridFunction
kde_evaluate(std::span<const double> sample, const BandwidthSchedule& sched, const GridSpec& grid,
             Evaluator evaluator)
{
  return kde_evaluate(sample, ScaledKernel::fejer(sched), grid, evaluator);
}

ScaledKernel
sinc_kernel_for(double gamma, std::int64_t n)
{
  if (!(gamma > 0.0))
    throw std::invalid_argument("gamma must be positive");
  if (n < 2)
    throw std::invalid_argument("sample size must be at least 2");
  return ScaledKernel::sinc(2.0 * gamma / std::log(static_cast<double>(n)));
}

GridFunction
sinc_kde_evaluate(std::span<const double> sample, double gamma, const GridSpec& grid,
                  Evaluator evaluator)
{
  auto k = sinc_kernel_for(gamma, static_cast<std::int64_t>(sample.size()));
  return kde_evaluate(sample, k, grid, evaluator);
}

double
kernel_sum_at(std::span<const double> sample, const ScaledKernel& kernel, double x)
{
  if (sample.empty())
    throw std::invalid_argument("sample must not be empty");
  return reference_sum(sample, kernel, x) / static_cast<double>(sample.size());
}

GridFunction
smoothed_density(const ScaledKernel& kernel, const AnalyticDensity& d, const GridSpec& grid)
{
  return convolve_with_density(KernelFunction::from(kernel), d, grid);
}

GridFunction
bias_function(const ScaledKernel& kernel, const AnalyticDensity& d, const GridSpec& grid)
{
  auto smooth = smoothed_density(kernel, d, grid);
  auto truth = GridFunction::tabulate([&](double x) { return d.pdf(x); }, grid);
  return smooth.combine(1.0, truth, -1.0);
}

GridFunction
bias_function(const BandwidthSchedule& sched, const AnalyticDensity& d, const GridSpec& grid)
{
  return bias_function(ScaledKernel::fejer(sched), d, grid);
}

PointwiseMoments
pointwise_moments(const BandwidthSchedule& sched, const AnalyticDensity& d, double x)
{
  auto k = ScaledKernel::fejer(sched);
  return { convolve_at(KernelFunction::from(k), d, x),
           convolve_at(KernelFunction::squared(k), d, x) };
}

EstimateResult
estimate_from_density(const AnalyticDensity& d, double gamma, std::int64_t n, std::uint64_t seed,
                      const GridSpec& grid, Evaluator evaluator)
{
  auto sched = bandwidth_schedule(gamma, n);
  auto sample = density_sample(d, seed, static_cast<std::size_t>(n));
  auto k = ScaledKernel::fejer(sched);
  return { kde_evaluate(sample, k, grid, evaluator), sched, n, seed, k.describe() };
}

ErrorDecomposition
decompose_error(const EstimateResult& est, const GridFunction& smoothed, const GridFunction& truth)
{
  est.f_n.require_same_grid(smoothed, "decompose_error (smoothed density)");
  est.f_n.require_same_grid(truth, "decompose_error (true density)");
  double root = std::sqrt(static_cast<double>(est.sample_size) * est.sched.h);
  return { est.f_n.combine(root, smoothed, -root), smoothed.combine(1.0, truth, -1.0) };
}

ErrorDecomposition
decompose_error(const EstimateResult& est, const AnalyticDensity& d)
{
  GridSpec grid{ -est.f_n.left(), est.f_n.step() };
  if (grid.size() != est.f_n.size())
    throw std::invalid_argument("decompose_error needs an estimate on a symmetric grid");
  auto smooth = smoothed_density(ScaledKernel::fejer(est.sched), d, grid);
  auto truth = GridFunction::tabulate([&](double x) { return d.pdf(x); }, grid);
  return decompose_error(est, smooth, truth);
}

void
write_estimate_csv(std::ostream& os, const EstimateResult& est)
{
  write_csv(os, est.f_n, "f_n");
}

std::string
estimate_sidecar_json(const EstimateResult& est)
{
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["kernel"] = est.kernel;
  j["gamma"] = est.sched.gamma;
  j["n"] = est.sched.n;
  j["N"] = est.sched.N;
  j["theta_n"] = est.sched.theta;
  j["h_n"] = est.sched.h;
  j["sample_size"] = est.sample_size;
  j["seed"] = est.seed;
  j["grid"] = { { "left", est.f_n.left() },
                { "step", est.f_n.step() },
                { "points", est.f_n.size() } };
  return j.dump(2);
}

} // namespace stripkde
