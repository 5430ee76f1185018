#include "stripkde/risk.hpp"

#include "stripkde/format.hpp"
#include "stripkde/quadrature.hpp"
#include "stripkde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

void
require_replicates(std::int64_t replicates, std::int64_t minimum)
{
  if (replicates < minimum)
    throw std::invalid_argument("need at least " + std::to_string(minimum) + " replicates, got " +
                                std::to_string(replicates));
}

} // namespace

double
gaussian_abs_moment(double p)
{
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("gaussian_abs_moment needs finite p >= 1");
  if (p == 2.0)
    return 1.0;
  double log_ratio = std::lgamma(0.5 * (p + 1.0)) - 0.5 * std::log(pi);
  return std::sqrt(2.0) * std::exp(log_ratio / p);
}

double
beta_p(const AnalyticDensity& d, double p)
{
  double norm = density_norm(d, 0.5 * p);
  return std::sqrt(norm / pi) * gaussian_abs_moment(p);
}

double
rate_psi(const BandwidthSchedule& sched, double beta)
{
  return beta / std::sqrt(static_cast<double>(sched.n) * sched.h);
}

double
rate_psi(std::int64_t n, double gamma, double p, const AnalyticDensity& d)
{
  return rate_psi(bandwidth_schedule(gamma, n), beta_p(d, p));
}

LossSpec::LossSpec(Kind kind, double param)
  : kind_(kind)
  , param_(param)
{}

LossSpec
LossSpec::identity()
{
  return LossSpec(Kind::identity, 1.0);
}

LossSpec
LossSpec::power(double q)
{
  if (!(q >= 1.0) || !std::isfinite(q))
    throw std::invalid_argument("power loss needs exponent q >= 1");
  return LossSpec(Kind::power, q);
}

LossSpec
LossSpec::capped(double cap)
{
  if (!(cap > 0.0) || !std::isfinite(cap))
    throw std::invalid_argument("capped loss needs a positive cap");
  return LossSpec(Kind::capped, cap);
}

LossSpec
LossSpec::parse(std::string_view spec)
{
  if (spec == "identity")
    return identity();
  auto colon = spec.find(':');
  if (colon != std::string_view::npos) {
    auto head = spec.substr(0, colon);
    double v = parse_double(spec.substr(colon + 1));
    if (head == "power")
      return power(v);
    if (head == "capped")
      return capped(v);
  }
  throw std::invalid_argument("bad loss '" + std::string(spec) +
                              "' (expected identity, power:Q or capped:C)");
}

double
LossSpec::operator()(double x) const
{
  if (!(x >= 0.0))
    throw std::domain_error("loss argument must be non-negative");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::power:
      return std::pow(x, param_);
    case Kind::capped:
      return std::min(x, param_);
  }
  return x;
}

std::pair<double, double>
LossSpec::growth_bound() const
{
  switch (kind_) {
    case Kind::identity:
      return { 1.0, 1.0 };
    case Kind::power:
      // max_x x^q e^{-x} = (q/e)^q
      return { std::pow(param_ / std::numbers::e, param_), 1.0 };
    case Kind::capped:
      return { param_, 0.0 };
  }
  return { 1.0, 1.0 };
}

std::string
LossSpec::id() const
{
  switch (kind_) {
    case Kind::identity:
      return "identity";
    case Kind::power:
      return "power:" + format_shortest(param_);
    case Kind::capped:
      return "capped:" + format_shortest(param_);
  }
  return "identity";
}

void
validate_class(const AnalyticDensity& d, double p)
{
  if (!(p >= 1.0) || !std::isfinite(p))
    throw ClassViolation("p must be a finite number >= 1");
  const double alpha = d.tail_exponent();
  std::ostringstream os;
  if (p >= 2.0) {
    if (alpha * 0.5 * p <= 1.0) {
      os << "class violation: ||f||_{p/2} is infinite for " << d.id() << " at p = " << p;
      throw ClassViolation(os.str());
    }
    return;
  }
  // some lambda in ((2-p)/p, 2] with a finite moment; moments are finite
  // exactly for lambda < alpha - 1
  double need = (2.0 - p) / p;
  if (!(need < std::min(2.0, alpha - 1.0))) {
    os << "class violation: " << d.id() << " with p = " << p
       << " needs int |x|^lambda f(x) dx < inf for some lambda in (" << format_shortest(need)
       << ", 2], but only lambda < " << format_shortest(alpha - 1.0)
       << " is finite; use p >= 2 or a lighter-tailed density";
    throw ClassViolation(os.str());
  }
}

void
validate_strip(const AnalyticDensity& d, double gamma)
{
  if (!(gamma > 0.0) || !(gamma < d.strip())) {
    std::ostringstream os;
    os << "gamma = " << gamma << " must satisfy 0 < gamma < strip = " << d.strip() << " of "
       << d.id();
    throw ClassViolation(os.str());
  }
}

SampleStats
sample_stats(const std::vector<double>& values)
{
  const auto count = static_cast<double>(values.size());
  if (values.empty())
    return { std::nan(""), std::nan(""), std::nan("") };
  double mean = 0.0;
  for (double v : values)
    mean += v;
  mean /= count;
  if (values.size() < 2)
    return { mean, std::nan(""), std::nan("") };
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  double var = ss / (count - 1.0);
  return { mean, var, std::sqrt(var / count) };
}

ReplicateBatch
simulate_replicates(const AnalyticDensity& d, double gamma, std::int64_t n,
                    std::int64_t replicates, std::uint64_t master_seed, std::vector<double> ps,
                    const MonteCarloSettings& settings)
{
  require_replicates(replicates, 1);
  if (ps.empty())
    throw std::invalid_argument("need at least one exponent p");
  validate_strip(d, gamma);
  for (double p : ps)
    validate_class(d, p);

  const auto sched = bandwidth_schedule(gamma, n);
  const auto kernel = ScaledKernel::fejer(sched);
  const auto& grid = settings.grid;
  const auto smooth = smoothed_density(kernel, d, grid);
  const auto truth = GridFunction::tabulate([&](double x) { return d.pdf(x); }, grid);
  const double root = std::sqrt(static_cast<double>(n) * sched.h);

  const std::size_t np = ps.size();
  const auto R = static_cast<std::size_t>(replicates);
  ReplicateBatch out{ sched,
                      replicates,
                      ps,
                      std::vector<double>(np),
                      std::vector<std::vector<double>>(np, std::vector<double>(R)),
                      std::vector<std::vector<double>>(np, std::vector<double>(R)),
                      std::vector<std::vector<double>>(np, std::vector<double>(R)),
                      false };
  const auto bias = smooth.combine(1.0, truth, -1.0);
  for (std::size_t k = 0; k < np; ++k)
    out.bias_norm[k] = lp_norm(bias, ps[k]).value;

  std::vector<char> flagged(R, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t r = 0; r < replicates; ++r) {
    auto seed = replicate_seed(master_seed, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(r));
    auto sample = density_sample(d, seed, static_cast<std::size_t>(n));
    auto fn = kde_evaluate(sample, kernel, grid, settings.evaluator);
    auto err = fn.combine(1.0, truth, -1.0);
    auto centered = fn.combine(1.0, smooth, -1.0);
    auto ri = static_cast<std::size_t>(r);
    for (std::size_t k = 0; k < np; ++k) {
      auto e = lp_norm(err, ps[k]);
      double c = std::pow(lp_integral(centered, ps[k]), 1.0 / ps[k]);
      out.error_norm[k][ri] = e.value;
      out.centered_norm[k][ri] = c;
      out.xi_power[k][ri] = std::pow(root * c, ps[k]);
      if (e.tail_risk)
        flagged[ri] = 1;
    }
  }
  out.tail_risk = std::any_of(flagged.begin(), flagged.end(), [](char c) { return c != 0; });
  return out;
}

RiskReport
mc_risk(const AnalyticDensity& d, double gamma, double p, const LossSpec& loss,
        const std::vector<std::int64_t>& n_list, std::int64_t replicates,
        std::uint64_t master_seed, const MonteCarloSettings& settings,
        const std::vector<AnalyticDensity>& vicinity)
{
  require_replicates(replicates, 2);
  if (n_list.empty())
    throw std::invalid_argument("need at least one sample size");
  validate_strip(d, gamma);
  validate_class(d, p);
  for (const auto& v : vicinity) {
    validate_strip(v, gamma);
    validate_class(v, p);
  }
  for (auto n : n_list)
    bandwidth_schedule(gamma, n);

  RiskReport rep;
  rep.density = d.id();
  for (const auto& v : vicinity)
    rep.vicinity.push_back(v.id());
  rep.gamma = gamma;
  rep.p = p;
  rep.loss = loss.id();
  rep.grid = settings.grid;
  rep.master_seed = master_seed;
  rep.evaluator = to_string(settings.evaluator);
  rep.f_norm = density_norm(d, 0.5 * p);
  rep.beta = std::sqrt(rep.f_norm / pi) * gaussian_abs_moment(p);

  auto mean_loss = [&](const ReplicateBatch& b, double psi) {
    std::vector<double> losses(b.error_norm[0].size());
    for (std::size_t r = 0; r < losses.size(); ++r)
      losses[r] = loss(b.error_norm[0][r] / psi);
    return sample_stats(losses);
  };

  for (auto n : n_list) {
    auto batch = simulate_replicates(d, gamma, n, replicates, master_seed, { p }, settings);
    double psi = rate_psi(batch.sched, rep.beta);
    auto st = mean_loss(batch, psi);
    RiskRow row{ n,
                 batch.sched.N,
                 batch.sched.h,
                 psi,
                 st.mean,
                 st.std_error,
                 replicates,
                 batch.bias_norm[0],
                 sample_stats(batch.xi_power[0]).mean,
                 st.mean,
                 batch.tail_risk };
    for (const auto& v : vicinity) {
      auto vb = simulate_replicates(v, gamma, n, replicates, master_seed, { p }, settings);
      double vpsi = rate_psi(vb.sched, beta_p(v, p));
      row.vicinity_max = std::max(row.vicinity_max, mean_loss(vb, vpsi).mean);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

XiMoment
xi_moment_from(const ReplicateBatch& batch, std::size_t p_index, double beta)
{
  auto st = sample_stats(batch.xi_power.at(p_index));
  return { st.mean, st.std_error, st.variance, std::pow(beta, batch.ps[p_index]),
           batch.replicates };
}

XiMoment
mc_xi_moment(const AnalyticDensity& d, double gamma, double p, std::int64_t n,
             std::int64_t replicates, std::uint64_t master_seed, const MonteCarloSettings& settings)
{
  require_replicates(replicates, 2);
  auto batch = simulate_replicates(d, gamma, n, replicates, master_seed, { p }, settings);
  return xi_moment_from(batch, 0, beta_p(d, p));
}

bool
in_region_dn(double x, double y, double N, double delta)
{
  return std::fabs(x - y) >= std::pow(N, -0.5 * (1.0 - delta));
}

std::vector<CovarianceResult>
mc_covariance(const AnalyticDensity& d, double gamma, std::int64_t n, std::int64_t replicates,
              std::uint64_t master_seed, const std::vector<std::pair<double, double>>& pairs,
              double delta)
{
  require_replicates(replicates, 50);
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");
  validate_strip(d, gamma);
  const auto sched = bandwidth_schedule(gamma, n);
  const auto kernel = ScaledKernel::fejer(sched);
  const auto kf = KernelFunction::from(kernel);

  std::vector<double> points;
  for (auto [x, y] : pairs) {
    points.push_back(x);
    points.push_back(y);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const std::size_t P = points.size();
  std::vector<double> mean(P);
  for (std::size_t i = 0; i < P; ++i)
    mean[i] = convolve_at(kf, d, points[i]);

  const double root = std::sqrt(static_cast<double>(n) * sched.h);
  const auto R = static_cast<std::size_t>(replicates);
  std::vector<double> xi(R * P);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t r = 0; r < replicates; ++r) {
    auto seed = replicate_seed(master_seed, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(r));
    auto sample = density_sample(d, seed, static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < P; ++i)
      xi[static_cast<std::size_t>(r) * P + i] =
        root * (kernel_sum_at(sample, kernel, points[i]) - mean[i]);
  }

  auto index = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(points.begin(), points.end(), v) -
                                    points.begin());
  };
  auto cov = [&](std::size_t a, std::size_t b) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      ma += xi[r * P + a];
      mb += xi[r * P + b];
    }
    ma /= static_cast<double>(R);
    mb /= static_cast<double>(R);
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r)
      s += (xi[r * P + a] - ma) * (xi[r * P + b] - mb);
    return s / static_cast<double>(R - 1);
  };

  std::vector<CovarianceResult> out;
  for (auto [x, y] : pairs) {
    auto a = index(x), b = index(y);
    double c = cov(a, b), vx = cov(a, a), vy = cov(b, b);
    out.push_back({ x, y, c, c / std::sqrt(vx * vy), vx, vy, in_region_dn(x, y, sched.N, delta) });
  }
  return out;
}

double
y_moment(double lambda, const BandwidthSchedule& sched)
{
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw std::invalid_argument("y_moment needs lambda in (0, 2]");
  const double th = sched.theta;
  const double a = 0.5 * (1.0 + th), b = 0.5 * (1.0 - th);
  const double k2 = kernel_norms(KernelSpec(th)).l2_sq;
  const double front = 8.0 / (pi * pi * k2 * (1.0 - th) * (1.0 - th));
  auto g = [&](double y) {
    double sa = std::sin(a * y) / y, sb = std::sin(b * y) / y;
    return std::pow(y, lambda) * sa * sa * sb * sb;
  };

  double total = quad::gk61(g, 0.0, 1.0, 1e-13);
  // oscillatory range on panels between zeros of sin(a y), split at 1/h
  double lowest = std::min(1.0 - th, th > 0.0 ? 2.0 * th : inf);
  const double T = std::max(1.0 / sched.h, 200.0 / lowest);
  const double P = pi / a;
  std::vector<double> cuts{ 1.0, 1.0 / sched.h, T };
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    double start = lo;
    for (double z = std::floor(lo / P) * P + P; start < hi; z += P) {
      double end = std::min(z, hi);
      if (end > start)
        total += quad::gk15(g, start, end, 1e-13, 8);
      start = end;
    }
  }

  // tail beyond T: sin^2 A sin^2 B = (1 - cos 2A - cos 2B + cos(2A-2B)/2 + cos(2A+2B)/2) / 4
  const double s = 4.0 - lambda;
  auto cos_tail = [&](double w) {
    // int_T^inf y^-s cos(w y) dy by three integrations by parts
    if (w == 0.0)
      return std::pow(T, 1.0 - s) / (s - 1.0);
    double sw = std::sin(w * T), cw = std::cos(w * T);
    return -sw * std::pow(T, -s) / w + s * cw * std::pow(T, -s - 1.0) / (w * w) +
           s * (s + 1.0) * sw * std::pow(T, -s - 2.0) / (w * w * w);
  };
  double tail = 0.25 * (cos_tail(0.0) - cos_tail(1.0 + th) - cos_tail(1.0 - th) +
                        0.5 * cos_tail(2.0 * th) + 0.5 * cos_tail(2.0));
  total += tail;
  double value = front * total;
  if (!std::isfinite(value))
    throw std::runtime_error("y_moment quadrature failed");
  return value;
}

} // namespace stripkde
