//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Exit status is 0 when every failing criterion was listed with
//! --expect-fail, 1 otherwise.

#include "stripkde/cli.hpp"
#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"
#include "stripkde/quadrature.hpp"
#include "stripkde/risk.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace stripkde;
using std::numbers::pi;

namespace {

const std::vector<double> kThetas{ 0.0, 0.25, 0.5, 0.9, 0.99 };
constexpr double kGamma = 0.5;
constexpr std::uint64_t kSeed = 42;

struct Outcome
{
  bool pass;
  std::string detail;
};

std::string
fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double
sup_abs(const GridFunction& g)
{
  double s = 0.0;
  for (double v : g.values())
    s = std::max(s, std::fabs(v));
  return s;
}

//! Shared Monte Carlo batches for criteria 8-10 and 12.
struct Batches
{
  AnalyticDensity d = AnalyticDensity::sech(1.0);
  ReplicateBatch small;
  ReplicateBatch big;

  Batches()
    : small(simulate_replicates(d, kGamma, 1000, 200, kSeed, { 2.0, 4.0 }))
    , big(simulate_replicates(d, kGamma, 100000, 200, kSeed, { 2.0, 4.0 }))
  {}

  double mean_normalized(const ReplicateBatch& b, std::size_t k) const
  {
    double psi = rate_psi(b.sched, beta_p(d, b.ps[k]));
    std::vector<double> r;
    for (double e : b.error_norm[k])
      r.push_back(e / psi);
    return sample_stats(r).mean;
  }
};

Batches&
batches()
{
  static Batches b;
  return b;
}

Outcome
c1()
{
  double worst = 0.0, worst_exact = 0.0;
  for (double th : kThetas) {
    KernelSpec s(th);
    double q = kernel_l2sq_quadrature(s);
    worst = std::max(worst, std::fabs(q / ((1.0 + th) / (2.0 * pi)) - 1.0));
    worst_exact = std::max(worst_exact, std::fabs(q / kernel_norms(s).l2_sq - 1.0));
  }
  return { worst < 1e-4, fmt("max rel err vs (1+theta)/(2pi) = %.3e (tol 1e-4); vs (1+2theta)/(3pi) = %.3e",
                             worst, worst_exact) };
}

Outcome
c2()
{
  double worst = 0.0;
  for (double th : kThetas) {
    KernelSpec s(th);
    double L = std::ceil(1592.0 / (1.0 - th));
    auto g = GridFunction::tabulate([&](double x) { return fejer_kernel_eval(x, s); }, -L, 1.0,
                                    static_cast<std::size_t>(2 * L) + 1);
    for (int i = 0; i <= 400; ++i) {
      double t = -2.0 + 0.01 * i;
      worst = std::max(worst, std::abs(numerical_ft(g, t) - fejer_kernel_ft(t, s)));
    }
  }
  auto sched = bandwidth_schedule(kGamma, 10000);
  auto k = ScaledKernel::fejer(sched);
  double step = 0.5 * sched.h, L = 2e4 * sched.h;
  auto g = GridFunction::tabulate([&](double x) { return k(x); }, -L, step,
                                  static_cast<std::size_t>(std::llround(2 * L / step)) + 1);
  double plateau = 0.0;
  for (int i = 0; i <= 200; ++i) {
    double t = -sched.N + sched.N * i / 100.0;
    plateau = std::max(plateau, std::abs(numerical_ft(g, t) - 1.0));
  }
  return { worst < 1e-3 && plateau < 1e-3,
           fmt("unit kernel max abs err %.3e; scaled plateau |t|<=N=%.4f max err %.3e (tol 1e-3)", worst,
               sched.N, plateau) };
}

Outcome
c3()
{
  bool ok = true;
  std::string d;
  for (double th : { 0.5, 0.9, 0.99 }) {
    KernelSpec s(th);
    auto nm = kernel_norms(s);
    double q = kernel_l1_quadrature(s);
    ok = ok && q >= nm.l1_lower && q <= nm.l1_upper;
    d += fmt("theta=%g: %.5f in [%.5f, %.5f]; ", th, q, nm.l1_lower, nm.l1_upper);
  }
  return { ok, d };
}

Outcome
c4()
{
  double worst = 0.0;
  for (double p : { 1.0, 2.0, 3.0, 4.0 }) {
    auto g = [p](double z) { return std::pow(z, p) * std::exp(-0.5 * z * z) * std::sqrt(2.0 / pi); };
    double m = std::pow(quad::gk61(g, 0.0, 10.0, 1e-15) + quad::gk61(g, 10.0, 40.0, 1e-15), 1.0 / p);
    worst = std::max(worst, std::fabs(gaussian_abs_moment(p) - m));
  }
  double m2 = gaussian_abs_moment(2.0), m4 = gaussian_abs_moment(4.0);
  double m4_err = std::fabs(m4 - std::pow(3.0, 0.25));
  bool ok = worst < 1e-10 && m2 == 1.0 && m4_err <= 4.0 * std::numeric_limits<double>::epsilon();
  return { ok, fmt("max |M_p - oracle| = %.2e; M_2 = %.17g; |M_4 - 3^(1/4)| = %.2e", worst, m2, m4_err) };
}

Outcome
c5()
{
  auto d = AnalyticDensity::sech(1.0);
  std::vector<double> Ns, logs, sups;
  for (std::int64_t n : { 1000, 10000, 100000 }) {
    auto s = bandwidth_schedule(kGamma, n);
    double sup = sup_abs(bias_function(s, d, GridSpec{}));
    Ns.push_back(s.N);
    sups.push_back(sup);
    logs.push_back(std::log(sup));
  }
  double mx = (Ns[0] + Ns[1] + Ns[2]) / 3.0, my = (logs[0] + logs[1] + logs[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (Ns[i] - mx) * (logs[i] - my);
    sxx += (Ns[i] - mx) * (Ns[i] - mx);
  }
  double slope = sxy / sxx;
  bool ok = sups[0] > sups[1] && sups[1] > sups[2] && slope <= -0.8 * kGamma;
  return { ok, fmt("sup|b_n| = %.3e, %.3e, %.3e; slope %.4f (need <= %.2f)", sups[0], sups[1], sups[2], slope,
                   -0.8 * kGamma) };
}

Outcome
c6()
{
  auto d = AnalyticDensity::sech(1.0);
  auto s = bandwidth_schedule(kGamma, 100000);
  double v = pi * s.h * pointwise_moments(s, d, 0.0).second_moment;
  double rel = std::fabs(v - d.pdf(0.0)) / d.pdf(0.0);
  return { rel < 0.1, fmt("pi h E k_h^2(0 - X) = %.6f vs f(0) = %.6f, rel %.4f (tol 0.1)", v, d.pdf(0.0), rel) };
}

Outcome
c7()
{
  bool ok = true;
  std::string d;
  for (double lambda : { 1.0, 2.0 }) {
    double prev = INFINITY;
    d += fmt("lambda=%g:", lambda);
    for (std::int64_t n : { 1000, 10000, 100000 }) {
      auto s = bandwidth_schedule(kGamma, n);
      double v = std::pow(s.h, lambda) * y_moment(lambda, s);
      ok = ok && v < prev;
      prev = v;
      d += fmt(" %.5e", v);
    }
    d += "; ";
  }
  return { ok, d };
}

Outcome
c8()
{
  auto& b = batches();
  auto x = xi_moment_from(b.big, 0, beta_p(b.d, 2.0));
  auto mean = smoothed_density(ScaledKernel::fejer(b.big.sched), b.d, GridSpec{});
  double exact = kernel_norms(KernelSpec(b.big.sched.theta)).l2_sq -
                 b.big.sched.h * std::pow(lp_norm(mean, 2.0).value, 2);
  double rel = std::fabs(x.estimate / x.target - 1.0);
  return { rel < 0.15, fmt("E||xi||_2^2 = %.5f +- %.5f vs 1/pi = %.5f, rel %.4f (tol 0.15); exact expectation "
                           "%.5f (rel %.4f)",
                           x.estimate, x.std_error, x.target, rel, exact, exact / x.target - 1.0) };
}

Outcome
c9()
{
  auto& b = batches();
  double vs = sample_stats(b.small.xi_power[0]).variance;
  double vb = sample_stats(b.big.xi_power[0]).variance;
  return { vb < vs, fmt("Var ||xi||_2^2: n=1e3 %.5e, n=1e5 %.5e", vs, vb) };
}

Outcome
c10()
{
  auto& b = batches();
  bool ok = true;
  std::string d;
  const double lo[] = { 0.8, 0.7 }, hi[] = { 1.2, 1.3 };
  for (std::size_t k = 0; k < 2; ++k) {
    double rs = b.mean_normalized(b.small, k), rb = b.mean_normalized(b.big, k);
    bool in = rb >= lo[k] && rb <= hi[k];
    bool closer = std::fabs(rb - 1.0) < std::fabs(rs - 1.0);
    ok = ok && in && closer;
    d += fmt("p=%g: n=1e3 %.4f, n=1e5 %.4f in [%.1f, %.1f]%s; ", b.big.ps[k], rs, rb, lo[k], hi[k],
             closer ? "" : " (not closer to 1)");
  }
  return { ok, d };
}

Outcome
c11()
{
  auto d = AnalyticDensity::sech(1.0);
  auto r = mc_covariance(d, kGamma, 100000, 500, kSeed, { { 0.0, 1.0 } }).at(0);
  double target = d.pdf(0.0) / pi;
  double rel = std::fabs(r.var_x / target - 1.0);
  bool ok = r.in_D_n && std::fabs(r.corr) < 0.1 && rel < 0.1;
  return { ok, fmt("corr(xi(0), xi(1)) = %.4f (tol 0.1); Var xi(0) = %.5f vs f(0)/pi = %.5f, rel %.4f (tol 0.1)",
                   r.corr, r.var_x, target, rel) };
}

Outcome
c12()
{
  auto& b = batches();
  double centered = sample_stats(b.big.centered_norm[0]).mean;
  double ratio = b.big.bias_norm[0] / centered;
  return { ratio < 0.1, fmt("||b_n||_2 = %.3e, mean ||f_n - E f_n||_2 = %.4e, ratio %.3e (tol 0.1)",
                            b.big.bias_norm[0], centered, ratio) };
}

Outcome
c13()
{
  auto dir = std::filesystem::temp_directory_path() / "stripkde_acceptance";
  std::filesystem::create_directories(dir);
  std::string contents[2];
  for (int i = 0; i < 2; ++i) {
    auto path = (dir / ("risk_" + std::to_string(i) + ".csv")).string();
    const char* argv[] = { "stripkde", "risk",   "--density", "sech:1", "--gamma", "0.5", "--p", "2",
                           "--loss",   "identity", "--n",     "1000,100000", "--reps", "200", "--seed", "42",
                           "--out",    path.c_str() };
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(std::size(argv)), argv, out, err) != 0)
      return { false, "risk run failed: " + err.str() };
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    contents[i] = buf.str();
  }
  bool ok = !contents[0].empty() && contents[0] == contents[1];
  return { ok, fmt("two runs, %zu bytes each, %s", contents[0].size(), ok ? "identical" : "differ") };
}

std::set<int>
parse_list(const std::string& s)
{
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.insert(std::stoi(item));
  return out;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Acceptance criteria" };
  std::string expect, only;
  app.add_option("--expect-fail", expect, "comma-separated criteria known to fail");
  app.add_option("--only", only, "comma-separated criteria to run");
  CLI11_PARSE(app, argc, argv);
  auto expected = parse_list(expect);
  auto selected = parse_list(only);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    { "kernel L2 norm", c1 },        { "Fourier plateau", c2 },          { "L1 bracket", c3 },
    { "M_p closed form", c4 },       { "bias decay", c5 },               { "pointwise variance", c6 },
    { "y moment scaling", c7 },      { "stochastic term moment", c8 },   { "stochastic term variance", c9 },
    { "normalized risk trend", c10 }, { "decorrelation", c11 },          { "bias ratio", c12 },
    { "determinism", c13 },
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id))
      continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool known = expected.count(id) > 0;
    const char* tag = o.pass ? (known ? "PASS (expected fail)" : "PASS") : (known ? "FAIL (expected)" : "FAIL");
    std::printf("criterion %2d %-24s %s [%.1fs] %s\n", id, criteria[i].first.c_str(), tag, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !known)
      ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
