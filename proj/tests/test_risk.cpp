#include "stripkde/quadrature.hpp"
#include "stripkde/risk.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace stripkde;
using std::numbers::pi;

namespace {

// E|Z|^p by quadrature of the Gaussian density
double
gaussian_integral(double p)
{
  auto g = [p](double z) { return std::pow(z, p) * std::exp(-0.5 * z * z) * std::sqrt(2.0 / pi); };
  return quad::gk61(g, 0.0, 10.0, 1e-15) + quad::gk61(g, 10.0, 40.0, 1e-15);
}

// E|Y|^lambda for the density k^2 / ||k||^2 of the unit kernel, from
//   int_0^inf y^(mu-1) cos(c y) dy = Gamma(mu) cos(pi mu / 2) c^-mu
// continued analytically to mu = lambda - 3 (the constant term drops out).
double
y_moment_closed(double lambda, double theta)
{
  auto at = [theta](double lam) {
    double mu = lam - 3.0;
    double bracket = -std::pow(1.0 + theta, -mu) - std::pow(1.0 - theta, -mu) +
                     0.5 * std::pow(2.0 * theta, -mu) + 0.5 * std::pow(2.0, -mu);
    double I = 0.25 * std::tgamma(mu) * std::cos(0.5 * pi * mu) * bracket;
    double k2 = (1.0 + 2.0 * theta) / (3.0 * pi);
    return 8.0 / (pi * pi * (1.0 - theta) * (1.0 - theta) * k2) * I;
  };
  if (std::fabs(lambda - std::round(lambda)) < 1e-9)
    return 0.5 * (at(lambda + 1e-5) + at(lambda - 1e-5));
  return at(lambda);
}

// Monte Carlo E Y^2 by rejection from the envelope min(P^2, A / y^4) >= k^2.
double
y2_rejection(double theta, std::uint64_t seed, std::size_t accepted)
{
  KernelSpec s(theta);
  double P = (1.0 + theta) / (2.0 * pi);
  double A = 4.0 / (pi * pi * (1.0 - theta) * (1.0 - theta));
  double y0 = std::pow(A / (P * P), 0.25);
  double core = P * P * y0, tail = A / (3.0 * y0 * y0 * y0);
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double sum = 0.0;
  std::size_t got = 0;
  while (got < accepted) {
    double y = U(g) < core / (core + tail) ? y0 * U(g) : y0 * std::pow(1.0 - U(g), -1.0 / 3.0);
    double env = y < y0 ? P * P : A / (y * y * y * y);
    double k = fejer_kernel_eval(y, s);
    if (U(g) * env <= k * k) {
      sum += y * y;
      ++got;
    }
  }
  return sum / static_cast<double>(accepted);
}

// corr(xi_n(x), xi_n(y)) from the second moments of k_h(x - X)
double
exact_correlation(const AnalyticDensity& d, const BandwidthSchedule& s, double x, double y)
{
  auto k = [&](double v) { return scaled_kernel_eval(v, s); };
  auto integrate = [](auto f) {
    double t = 0.0;
    for (double a = -60.0; a < 60.0; a += 0.25)
      t += quad::gk61(f, a, a + 0.25, 1e-12);
    return t;
  };
  double mx = integrate([&](double u) { return k(x - u) * d.pdf(u); });
  double my = integrate([&](double u) { return k(y - u) * d.pdf(u); });
  double xx = integrate([&](double u) { return k(x - u) * k(x - u) * d.pdf(u); });
  double yy = integrate([&](double u) { return k(y - u) * k(y - u) * d.pdf(u); });
  double xy = integrate([&](double u) { return k(x - u) * k(y - u) * d.pdf(u); });
  return (xy - mx * my) / std::sqrt((xx - mx * mx) * (yy - my * my));
}

MonteCarloSettings
coarse()
{
  return { GridSpec{ 20.0, 0.02 }, Evaluator::spread };
}

} // namespace

TEST_CASE("Gaussian absolute moments")
{
  CHECK(gaussian_abs_moment(2.0) == 1.0);
  CHECK(gaussian_abs_moment(1.0) == doctest::Approx(std::sqrt(2.0 / pi)).epsilon(1e-15));
  CHECK(gaussian_abs_moment(4.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-15));
  for (double p : { 1.0, 2.0, 3.0, 4.0 })
    CHECK(std::fabs(gaussian_abs_moment(p) - std::pow(gaussian_integral(p), 1.0 / p)) < 1e-10);
  // sample mean of |Z|
  std::mt19937_64 g(5);
  std::normal_distribution<double> Z;
  double s = 0.0;
  const int n = 10000000;
  for (int i = 0; i < n; ++i)
    s += std::fabs(Z(g));
  CHECK(std::fabs(s / n - gaussian_abs_moment(1.0)) < 5.0 * 0.6 / std::sqrt(double(n)));
  CHECK_THROWS_AS(gaussian_abs_moment(0.5), std::invalid_argument);
}

TEST_CASE("beta constants")
{
  for (const char* spec : { "sech:1", "cauchy:1", "conv:1:uniform:1" })
    CHECK(beta_p(AnalyticDensity::parse(spec), 2.0) ==
          doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-15));
  // ||G||_2 = pi^(-1/2) for g0 = 1
  CHECK(beta_p(AnalyticDensity::sech(1.0), 4.0) ==
        doctest::Approx(std::pow(pi, -0.75) * std::pow(3.0, 0.25)).epsilon(1e-7));
  CHECK(beta_p(AnalyticDensity::sech(1.0), 4.0) == doctest::Approx(0.557722).epsilon(1e-6));
  CHECK(beta_p(AnalyticDensity::cauchy(1.0), 4.0) ==
        doctest::Approx(std::pow(pi, -0.5) * std::pow(2.0 * pi, -0.25) * std::pow(3.0, 0.25))
          .epsilon(1e-7));
  // p = 1 carries the factor ||f||_{1/2}^{1/2}; for sech that is
  // int sqrt(G) = B(1/4, 1/2) / (pi/2) / sqrt(2)
  double b = std::exp(std::lgamma(0.25) + std::lgamma(0.5) - std::lgamma(0.75));
  double root_half = b / (pi / 2.0) / std::sqrt(2.0);
  CHECK(beta_p(AnalyticDensity::sech(1.0), 1.0) ==
        doctest::Approx(root_half * std::sqrt(2.0) / pi).epsilon(1e-7));
  CHECK_THROWS_AS(beta_p(AnalyticDensity::cauchy(1.0), 1.0), DivergentIntegral);
}

TEST_CASE("rate function")
{
  auto d = AnalyticDensity::sech(1.0);
  CHECK(rate_psi(22027, 0.5, 2.0, d) == doctest::Approx(0.012673).epsilon(1e-3));
  auto s = bandwidth_schedule(0.5, 22027);
  CHECK(rate_psi(22027, 0.5, 2.0, d) ==
        doctest::Approx(1.0 / std::sqrt(pi * 22027.0 * s.h)).epsilon(1e-14));
  for (const char* spec : { "sech:1", "cauchy:1", "conv:1:uniform:1" }) {
    auto e = AnalyticDensity::parse(spec);
    CHECK(rate_psi(100000, 0.5, 2.0, e) < rate_psi(10000, 0.5, 2.0, e));
    CHECK(rate_psi(10000, 0.5, 4.0, e) < rate_psi(1000, 0.5, 4.0, e));
  }
  double r3 = rate_psi(1000, 0.5, 1.0, d) / rate_psi(1000, 0.5, 2.0, d);
  double r5 = rate_psi(100000, 0.5, 1.0, d) / rate_psi(100000, 0.5, 2.0, d);
  CHECK(r3 == doctest::Approx(r5).epsilon(1e-14));
  CHECK(r3 == doctest::Approx(beta_p(d, 1.0) / beta_p(d, 2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(rate_psi(2, 0.5, 2.0, d), SubcriticalSampleSize);
}

TEST_CASE("loss functions")
{
  auto id = LossSpec::parse("identity");
  auto pw = LossSpec::parse("power:3");
  auto cp = LossSpec::parse("capped:0.5");
  CHECK(id.id() == "identity");
  CHECK(pw.id() == "power:3");
  CHECK(cp.id() == "capped:0.5");
  for (const auto& l : { id, pw, cp }) {
    CHECK(l(0.0) == 0.0);
    auto [A, B] = l.growth_bound();
    double prev = 0.0;
    for (int i = 1; i <= 4000; ++i) {
      double x = 0.005 * i;
      CHECK(l(x) >= prev);
      CHECK(l(x) <= A * std::exp(B * x) * (1.0 + 1e-12));
      prev = l(x);
    }
    CHECK(l(1.0 - 1e-12) == doctest::Approx(l(1.0 + 1e-12)));
  }
  CHECK(cp(2.0) == 0.5);
  CHECK(pw(2.0) == doctest::Approx(8.0));
  CHECK_THROWS_AS(id(-1.0), std::domain_error);
  for (const char* bad : { "", "square", "power:0.5", "capped:-1", "capped:", "power:x" })
    CHECK_THROWS_AS(LossSpec::parse(bad), std::invalid_argument);
}

TEST_CASE("class membership")
{
  auto c = AnalyticDensity::cauchy(1.0);
  try {
    validate_class(c, 1.0);
    FAIL("expected ClassViolation");
  } catch (const ClassViolation& e) {
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  CHECK_NOTHROW(validate_class(c, 2.0));
  CHECK_NOTHROW(validate_class(c, 4.0));
  // (2 - p)/p < 1 for p > 1 leaves room for lambda < 1
  CHECK_NOTHROW(validate_class(c, 1.5));
  CHECK_NOTHROW(validate_class(AnalyticDensity::sech(1.0), 1.0));
  CHECK_NOTHROW(validate_class(AnalyticDensity::parse("conv:1:uniform:1"), 1.0));
  CHECK_THROWS_AS(validate_class(AnalyticDensity::sech(1.0), 0.5), ClassViolation);

  CHECK_NOTHROW(validate_strip(AnalyticDensity::sech(1.0), 0.5));
  CHECK_THROWS_AS(validate_strip(AnalyticDensity::sech(1.0), 1.0), ClassViolation);
  CHECK_THROWS_AS(validate_strip(AnalyticDensity::sech(1.0), 0.0), ClassViolation);
  CHECK_THROWS_AS(mc_risk(c, 0.5, 1.0, LossSpec::identity(), { 1000 }, 5, 1, coarse()),
                  ClassViolation);
}

TEST_CASE("y moment against the analytic continuation")
{
  for (std::int64_t n : { 1000, 10000, 100000 }) {
    auto s = bandwidth_schedule(0.5, n);
    for (double lambda : { 0.25, 0.5, 1.0, 1.5, 2.0 })
      CHECK(y_moment(lambda, s) == doctest::Approx(y_moment_closed(lambda, s.theta)).epsilon(1e-4));
  }
  auto s = bandwidth_schedule(0.5, 10000);
  CHECK(y_moment(1e-7, s) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(y_moment(0.0, s), std::invalid_argument);
  CHECK_THROWS_AS(y_moment(2.5, s), std::invalid_argument);
}

TEST_CASE("second y moment by rejection sampling")
{
  auto s = bandwidth_schedule(0.5, 1000);
  double mc = y2_rejection(s.theta, 31, 4000000);
  CHECK(std::fabs(mc / y_moment(2.0, s) - 1.0) < 0.02);
}

TEST_CASE("scaled y moments decrease along the schedule")
{
  for (double lambda : { 1.0, 2.0 }) {
    double prev = INFINITY;
    for (std::int64_t n : { 1000, 10000, 100000 }) {
      auto s = bandwidth_schedule(0.5, n);
      double v = std::pow(s.h, lambda) * y_moment(lambda, s);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("risk reports are deterministic")
{
  auto d = AnalyticDensity::sech(1.0);
  auto run = [&] {
    return mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000, 5000 }, 12, 42, coarse());
  };
  int before = omp_get_max_threads();
  omp_set_num_threads(1);
  auto a = run();
  omp_set_num_threads(3);
  auto b = run();
  omp_set_num_threads(before);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].mean_risk == b.rows[i].mean_risk);
    CHECK(a.rows[i].std_error == b.rows[i].std_error);
    CHECK(a.rows[i].xi_moment == b.rows[i].xi_moment);
  }
  auto c = mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 12, 43, coarse());
  CHECK(c.rows[0].mean_risk != a.rows[0].mean_risk);
}

TEST_CASE("report constants recompute from stored fields")
{
  auto d = AnalyticDensity::sech(1.0);
  auto rep = mc_risk(d, 0.5, 4.0, LossSpec::identity(), { 1000, 3000 }, 4, 1, coarse());
  CHECK(rep.f_norm == density_norm(d, 2.0));
  for (const auto& row : rep.rows) {
    double beta = std::sqrt(rep.f_norm / pi) * gaussian_abs_moment(rep.p);
    CHECK(row.psi == rate_psi(bandwidth_schedule(rep.gamma, row.n), beta));
    CHECK(row.std_error > 0.0);
    CHECK(row.replicates == 4);
    CHECK(row.vicinity_max == row.mean_risk);
  }
}

TEST_CASE("degenerate and capped runs")
{
  auto d = AnalyticDensity::sech(1.0);
  auto two = mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 2, 9, coarse());
  CHECK(std::isfinite(two.rows[0].std_error));
  CHECK_THROWS_AS(mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 1, 9, coarse()),
                  std::invalid_argument);
  auto capped = mc_risk(d, 0.5, 2.0, LossSpec::capped(0.5), { 1000 }, 20, 9, coarse());
  CHECK(capped.rows[0].mean_risk <= 0.5);
  // min(x, C) <= x pointwise carries over to the means on shared seeds
  auto id = mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 20, 9, coarse());
  CHECK(capped.rows[0].mean_risk <= id.rows[0].mean_risk);
}

TEST_CASE("vicinity reports the worst member")
{
  auto d = AnalyticDensity::sech(1.0);
  std::vector<AnalyticDensity> near{ AnalyticDensity::sech(0.9), AnalyticDensity::parse("conv:1:uniform:0.2") };
  auto rep = mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 6, 2, coarse(), near);
  CHECK(rep.vicinity.size() == 2);
  CHECK(rep.rows[0].vicinity_max >= rep.rows[0].mean_risk);
  std::vector<AnalyticDensity> narrow{ AnalyticDensity::sech(0.4) };
  CHECK_THROWS_AS(mc_risk(d, 0.5, 2.0, LossSpec::identity(), { 1000 }, 6, 2, coarse(), narrow),
                  ClassViolation);
}

TEST_CASE("Monte Carlo behaviour at the largest sample size")
{
  auto d = AnalyticDensity::sech(1.0);
  MonteCarloSettings settings{};
  auto big = simulate_replicates(d, 0.5, 100000, 200, 42, { 1.0, 2.0 }, settings);
  auto small = simulate_replicates(d, 0.5, 1000, 200, 42, { 2.0 }, settings);

  // stochastic term moments approach beta_p^p
  auto x1 = xi_moment_from(big, 0, beta_p(d, 1.0));
  CHECK(std::fabs(x1.estimate / x1.target - 1.0) < 0.15);
  // E ||xi||_2^2 = n h (||k_h||^2 / n - ||E f_n||^2 / n) exactly
  auto x2 = xi_moment_from(big, 1, beta_p(d, 2.0));
  auto mean = smoothed_density(ScaledKernel::fejer(big.sched), d, settings.grid);
  double exact = kernel_norms(KernelSpec(big.sched.theta)).l2_sq -
                 big.sched.h * std::pow(lp_norm(mean, 2.0).value, 2);
  CHECK(std::fabs(x2.estimate - exact) < 3.0 * x2.std_error);
  // the limit 1/pi is approached at rate log N / N
  CHECK(std::fabs(x2.estimate * pi - 1.0) < std::log(big.sched.N) / big.sched.N);
  CHECK(x2.variance < xi_moment_from(small, 0, beta_p(d, 2.0)).variance);

  // normalized risk improves with n; the capped loss stays under l(1) + MC slack
  double psi_big = rate_psi(big.sched, beta_p(d, 2.0));
  double psi_small = rate_psi(small.sched, beta_p(d, 2.0));
  std::vector<double> rb, rs, cb;
  for (double e : big.error_norm[1]) {
    rb.push_back(e / psi_big);
    cb.push_back(LossSpec::capped(2.0)(e / psi_big));
  }
  for (double e : small.error_norm[0])
    rs.push_back(e / psi_small);
  auto sb = sample_stats(rb), ss = sample_stats(rs);
  CHECK(sb.mean < ss.mean + 3.0 * std::hypot(sb.std_error, ss.std_error));
  CHECK(sample_stats(cb).mean <= 1.2);
}

TEST_CASE("covariance of the stochastic term")
{
  auto d = AnalyticDensity::sech(1.0);
  auto s = bandwidth_schedule(0.5, 100000);
  std::vector<std::pair<double, double>> pairs{ { 0.0, 0.0 }, { 0.0, 1.0 }, { 0.0, 0.5 * s.h } };
  auto res = mc_covariance(d, 0.5, 100000, 500, 42, pairs, 0.5);
  REQUIRE(res.size() == 3);
  CHECK(res[0].cov == doctest::Approx(res[0].var_x).epsilon(1e-12));
  CHECK(res[0].corr == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(res[0].in_D_n);
  CHECK(res[1].in_D_n);
  double rho = exact_correlation(d, s, 0.0, 1.0);
  CHECK(std::fabs(res[1].corr - rho) < 4.0 * (1.0 - rho * rho) / std::sqrt(500.0 - 3.0));
  CHECK(std::fabs(rho) < std::pow(s.N, -0.5));
  CHECK_FALSE(res[2].in_D_n);
  CHECK(res[2].corr > 0.5);
  CHECK_THROWS_AS(mc_covariance(d, 0.5, 1000, 49, 1, pairs), std::invalid_argument);
  CHECK_THROWS_AS(mc_covariance(d, 0.5, 1000, 60, 1, pairs, 1.0), std::invalid_argument);
}

TEST_CASE("region D_n")
{
  // N^(-(1 - delta)/2) = 100^(-1/4) at N = 100, delta = 1/2
  double r = std::pow(100.0, -0.25);
  CHECK(in_region_dn(0.0, r, 100.0, 0.5));
  CHECK_FALSE(in_region_dn(0.0, 0.99 * r, 100.0, 0.5));
  CHECK(in_region_dn(2.0, 2.0 - r, 100.0, 0.5));
}

TEST_CASE("sample statistics")
{
  auto st = sample_stats({ 1.0, 2.0, 3.0, 4.0 });
  CHECK(st.mean == 2.5);
  CHECK(st.variance == doctest::Approx(5.0 / 3.0));
  CHECK(st.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(std::isnan(sample_stats({ 1.0 }).variance));
}
