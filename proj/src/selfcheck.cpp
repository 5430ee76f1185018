#include "stripkde/selfcheck.hpp"

#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"
#include "stripkde/quadrature.hpp"
#include "stripkde/risk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;

using Corrupt = std::function<double(double)>;

struct Check
{
  std::string name;
  std::function<CheckResult(const Corrupt&)> run;
};

CheckResult
close_abs(std::string name, double value, double expected, double tol, std::string detail = {})
{
  return { std::move(name), value, expected, tol, std::fabs(value - expected) <= tol,
           std::move(detail) };
}

CheckResult
close_rel(std::string name, double value, double expected, double rel, std::string detail = {})
{
  double tol = rel * std::fabs(expected);
  return { std::move(name), value, expected, tol, std::fabs(value - expected) <= tol,
           std::move(detail) };
}

const std::vector<double> kThetas{ 0.0, 0.25, 0.5, 0.9, 0.99 };

// Numerical FT window for k(.; theta): truncation error about 4e-4.
GridFunction
tabulate_unit_kernel(double theta)
{
  KernelSpec spec(theta);
  double L = std::ceil(1592.0 / (1.0 - theta));
  return GridFunction::tabulate([&](double x) { return fejer_kernel_eval(x, spec); },
                                GridSpec{ L, 1.0 });
}

std::vector<Check>
make_checks()
{
  std::vector<Check> c;
  c.push_back({ "kernel-peak", [](const Corrupt& f) {
                 return close_abs("kernel-peak", fejer_kernel_eval(0.0, KernelSpec(0.5)),
                                  f(1.5 / (2.0 * pi)), 1e-15, "k(0; 0.5) = 3/(4 pi)");
               } });
  c.push_back({ "kernel-fejer-at-pi", [](const Corrupt& f) {
                 return close_abs("kernel-fejer-at-pi", fejer_kernel_eval(pi, KernelSpec(0.0)),
                                  f(2.0 / (pi * pi * pi)), 1e-15, "k(pi; 0) = 2/pi^3");
               } });
  c.push_back({ "kernel-sinc-zero", [](const Corrupt& f) {
                 return close_abs("kernel-sinc-zero", fejer_kernel_eval(pi, KernelSpec(1.0)),
                                  f(0.0), 1e-16, "sin(pi)/pi^2");
               } });
  c.push_back({ "kernel-series-switch", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (double t : kThetas) {
                   KernelSpec s(t);
                   double a = fejer_kernel_closed_form(kSeriesSwitch, s);
                   double b = fejer_kernel_taylor(kSeriesSwitch, s);
                   worst = std::max(worst, std::fabs(a / b - 1.0));
                 }
                 return close_abs("kernel-series-switch", worst, f(0.0), 1e-8,
                                  "max relative gap at the switch");
               } });
  c.push_back({ "kernel-evenness", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (double t : kThetas)
                   for (double x : { 1e-6, 0.3, 2.0, 17.5, 1234.5 }) {
                     KernelSpec s(t);
                     worst = std::max(worst, std::fabs(fejer_kernel_eval(x, s) -
                                                       fejer_kernel_eval(-x, s)));
                   }
                 return close_abs("kernel-evenness", worst, f(0.0), 0.0, "k(x) - k(-x)");
               } });
  c.push_back({ "kernel-l2-norm", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (double t : kThetas) {
                   KernelSpec s(t);
                   double closed = f(kernel_norms(s).l2_sq);
                   worst = std::max(worst, std::fabs(kernel_l2sq_quadrature(s) / closed - 1.0));
                 }
                 return close_abs("kernel-l2-norm", worst, 0.0, 1e-4,
                                  "max relative error vs (1+2 theta)/(3 pi)");
               } });
  c.push_back({ "kernel-l1-bracket", [](const Corrupt& f) {
                 double worst = -1e300;
                 for (double t : { 0.5, 0.9, 0.99 }) {
                   KernelSpec s(t);
                   auto nb = kernel_norms(s);
                   double l1 = kernel_l1_quadrature(s);
                   // positive margin means inside the bracket
                   worst = std::max(worst, -std::min(l1 - f(nb.l1_lower), nb.l1_upper - l1));
                 }
                 return CheckResult{ "kernel-l1-bracket", worst, 0.0, 0.0, worst < 0.0,
                                     "-(distance to nearest bracket end); negative is inside" };
               } });
  c.push_back({ "kernel-fourier-transform", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (double t : { 0.0, 0.5, 0.9 }) {
                   KernelSpec s(t);
                   auto g = tabulate_unit_kernel(t);
                   for (int i = 0; i <= 40; ++i) {
                     double w = -2.0 + 0.1 * i;
                     worst = std::max(worst, std::fabs(numerical_ft(g, w).real() -
                                                       f(fejer_kernel_ft(w, s))));
                   }
                 }
                 return close_abs("kernel-fourier-transform", worst, 0.0, 1e-3,
                                  "max |numerical FT - closed form| on t in [-2, 2]");
               } });
  c.push_back({ "bandwidth-schedule", [](const Corrupt& f) {
                 auto s = bandwidth_schedule(0.5, 22027);
                 double gap = std::fabs(s.theta - (1.0 - 1.0 / s.N)) + std::fabs(s.h * s.N - s.theta);
                 auto r = close_rel("bandwidth-schedule", s.N, f(std::log(22027.0)), 1e-15,
                                    "N = ln(n)/(2 gamma) at gamma = 1/2, n = 22027");
                 r.pass = r.pass && gap < 1e-15;
                 return r;
               } });
  c.push_back({ "scaled-kernel-mass", [](const Corrupt& f) {
                 auto s = bandwidth_schedule(0.5, 10000);
                 auto k = ScaledKernel::fejer(s);
                 auto g = GridFunction::tabulate([&](double x) { return k(x); }, GridSpec{ 1e4, 0.1 });
                 return close_abs("scaled-kernel-mass", numerical_ft(g, 0.0).real(), f(1.0), 1e-3,
                                  "int k_{h_n} at gamma = 1/2, n = 1e4");
               } });
  c.push_back({ "multiplier-plateau", [](const Corrupt& f) {
                 auto s = bandwidth_schedule(0.5, 10000);
                 auto k = ScaledKernel::fejer(s);
                 auto g = GridFunction::tabulate([&](double x) { return k(x); }, GridSpec{ 1e4, 0.1 });
                 double worst = 0.0;
                 for (int i = 0; i <= 100; ++i) {
                   double t = -s.N + 2.0 * s.N * i / 100.0;
                   worst = std::max(worst, std::abs(numerical_ft(g, t) - f(1.0)));
                 }
                 return close_abs("multiplier-plateau", worst, 0.0, 1e-3,
                                  "max |FT k_{h_n}(t) - 1| on |t| <= N");
               } });
  c.push_back({ "multiplier-l2", [](const Corrupt& f) {
                 auto s = bandwidth_schedule(0.5, 10000);
                 double l2 = kernel_l2sq_quadrature(KernelSpec(s.theta)) / s.h;
                 double dev = std::fabs(pi / s.N * l2 - f(1.0));
                 return CheckResult{ "multiplier-l2", dev, 0.0, 2.0 / s.N, dev <= 2.0 / s.N,
                                     "|pi/N ||k_{h_n}||_2^2 - 1| <= 2/N" };
               } });
  c.push_back({ "density-normalization", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (const char* spec : { "sech:1", "sech:0.3", "cauchy:1", "conv:1:uniform:1",
                                           "conv:0.5:points:-1@0.25,2@0.75" }) {
                   auto d = AnalyticDensity::parse(spec);
                   double R = d.core_radius();
                   double mass =
                     quad::real_line([&](double x) { return d.pdf(x); }, -R, 0.0, R, 1e-12);
                   worst = std::max(worst, std::fabs(mass - f(1.0)));
                 }
                 return close_abs("density-normalization", worst, 0.0, 1e-6,
                                  "max |int f - 1| over built-in densities");
               } });
  c.push_back({ "sech-l2-norm", [](const Corrupt& f) {
                 return close_rel("sech-l2-norm", density_norm(AnalyticDensity::sech(1.0), 2.0),
                                  f(1.0 / std::sqrt(pi)), 1e-8, "||G||_2 = pi^(-1/2)");
               } });
  c.push_back({ "cauchy-l2-norm", [](const Corrupt& f) {
                 return close_rel("cauchy-l2-norm", density_norm(AnalyticDensity::cauchy(1.0), 2.0),
                                  f(1.0 / std::sqrt(2.0 * pi)), 1e-8, "(2 pi)^(-1/2)");
               } });
  c.push_back({ "sup-bound", [](const Corrupt& f) {
                 double worst = -1e300;
                 auto d = AnalyticDensity::parse("conv:1:uniform:1");
                 for (double p : { 1.0, 1.5, 2.0, 4.0 }) {
                   double M = *d.boundary_lp_norm(p);
                   worst = std::max(worst, d.sup() - f(sup_bound(1.0, p, M)));
                 }
                 double g = AnalyticDensity::sech(1.0).sup() - f(sup_bound(1.0, 1.0, 1.0));
                 bool pass = worst <= 0.0 && std::fabs(g) < 1e-15;
                 return CheckResult{ "sup-bound", worst, 0.0, 0.0, pass,
                                     "sup f - C(gamma, p, ||u||_p) <= 0; equality for G at p = 1" };
               } });
  c.push_back({ "gaussian-moments", [](const Corrupt& f) {
                 double worst = 0.0;
                 for (double p : { 1.0, 2.0, 3.0, 4.0 }) {
                   auto g = [&](double z) {
                     return std::pow(z, p) * std::exp(-0.5 * z * z) * std::sqrt(2.0 / pi);
                   };
                   double m = std::pow(quad::gk61(g, 0.0, 40.0, 1e-15), 1.0 / p);
                   worst = std::max(worst, std::fabs(gaussian_abs_moment(p) - f(m)));
                 }
                 return close_abs("gaussian-moments", worst, 0.0, 1e-10,
                                  "max |M_p - Gaussian integral| for p = 1..4");
               } });
  c.push_back({ "beta4-sech", [](const Corrupt& f) {
                 return close_rel("beta4-sech", beta_p(AnalyticDensity::sech(1.0), 4.0),
                                  f(std::pow(pi, -0.75) * std::pow(3.0, 0.25)), 1e-8,
                                  "pi^(-3/4) 3^(1/4)");
               } });
  c.push_back({ "ymoment-zero-limit", [](const Corrupt& f) {
                 return close_abs("ymoment-zero-limit", y_moment(1e-7, bandwidth_schedule(0.5, 10000)),
                                  f(1.0), 1e-5, "E|Y_n|^lambda -> 1 as lambda -> 0");
               } });
  c.push_back({ "lp-norm-box", [](const Corrupt& f) {
                 auto g = GridFunction::tabulate(
                   [](double x) { return std::fabs(x) <= 1.0 + 1e-12 ? 1.0 : 0.0; },
                   GridSpec{ 2.0, 1e-3 });
                 return close_abs("lp-norm-box", lp_norm(g, 2.0).value, f(std::sqrt(2.0)), 1e-3,
                                  "box of height 1 on [-1, 1]");
               } });
  c.push_back({ "pointwise-mean", [](const Corrupt& f) {
                 auto m = pointwise_moments(bandwidth_schedule(0.5, 100000),
                                            AnalyticDensity::sech(1.0), 0.0);
                 return close_abs("pointwise-mean", m.mean, f(0.5), 0.01,
                                  "E k_{h_n}(0 - X) at n = 1e5 vs f(0)");
               } });
  return c;
}

} // namespace

std::vector<std::string>
selfcheck_names()
{
  std::vector<std::string> out;
  for (const auto& c : make_checks())
    out.push_back(c.name);
  return out;
}

std::vector<CheckResult>
run_selfcheck_suite(std::string_view inject_fault)
{
  auto checks = make_checks();
  if (!inject_fault.empty() &&
      std::none_of(checks.begin(), checks.end(), [&](const Check& c) { return c.name == inject_fault; }))
    throw std::invalid_argument("unknown selfcheck '" + std::string(inject_fault) + "'");
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    bool corrupt = c.name == inject_fault;
    Corrupt f = [corrupt](double v) { return corrupt ? (v == 0.0 ? 0.01 : 1.01 * v) : v; };
    try {
      out.push_back(c.run(f));
    } catch (const std::exception& e) {
      out.push_back({ c.name, std::nan(""), std::nan(""), 0.0, false,
                      std::string("exception: ") + e.what() });
    }
  }
  return out;
}

int
run_selfcheck(std::ostream& os, std::string_view inject_fault)
{
  auto t0 = std::chrono::steady_clock::now();
  auto results = run_selfcheck_suite(inject_fault);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t passed = 0;
  os << std::left;
  for (const auto& r : results) {
    passed += r.pass ? 1 : 0;
    os << (r.pass ? "PASS  " : "FAIL  ") << std::setw(26) << r.name << std::setprecision(10)
       << " value=" << std::setw(18) << r.value << " expected=" << std::setw(18) << r.expected
       << " tol=" << std::setw(10) << std::setprecision(3) << r.tolerance << "  " << r.detail
       << '\n';
  }
  os << passed << "/" << results.size() << " checks passed in " << std::setprecision(3) << secs
     << " s\n";
  for (const auto& r : results)
    if (!r.pass)
      os << "FAILED: " << r.name << '\n';
  return passed == results.size() ? 0 : 1;
}

} // namespace stripkde
