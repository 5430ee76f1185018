#include "stripkde/cli.hpp"

#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/format.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"
#include "stripkde/report.hpp"
#include "stripkde/risk.hpp"
#include "stripkde/selfcheck.hpp"
#include "stripkde/svg.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace stripkde {

namespace {

constexpr double pi = std::numbers::pi;

bool
ends_with(const std::string& s, std::string_view suffix)
{
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

GridSpec
grid_of(const ExperimentConfig& cfg)
{
  return { cfg.half_width, cfg.step };
}

void
emit(const ExperimentConfig& cfg, const Table& t, const Json& extra, std::ostream& out)
{
  auto prov = Provenance::of(cfg.resolved());
  if (cfg.out.empty()) {
    out << result_document(t, prov, extra).dump(2) << '\n';
    return;
  }
  if (ends_with(cfg.out, ".csv")) {
    std::ostringstream os;
    write_table_csv(os, t, prov);
    write_file(cfg.out, os.str());
  } else {
    write_file(cfg.out, result_document(t, prov, extra).dump(2) + "\n");
  }
}

void
emit_svg(const ExperimentConfig& cfg, const ChartSpec& chart)
{
  if (!cfg.svg.empty())
    write_file(cfg.svg, line_chart(chart));
}

int
cmd_kernel_info(const ExperimentConfig& cfg, std::ostream& out)
{
  Table t{ { "theta", "k0", "l2_sq", "l2_sq_stated", "l2_sq_quadrature", "l1_lower", "l1_quadrature", "l1_upper" },
           {} };
  for (double th : cfg.thetas) {
    KernelSpec s(th);
    auto nb = kernel_norms(s);
    t.add({ th, fejer_kernel_eval(0.0, s), nb.l2_sq, nb.l2_sq_stated, kernel_l2sq_quadrature(s), nb.l1_lower,
            kernel_l1_quadrature(s), nb.l1_upper });
  }
  Json schedules = Json::array();
  for (auto n : cfg.n_list) {
    auto s = bandwidth_schedule(cfg.gamma, n);
    auto k = ScaledKernel::fejer(s);
    Json j = to_json(s);
    j["peak"] = k.peak();
    j["peak_asymptotic"] = 1.0 / (pi * s.h);
    double l2 = kernel_norms(KernelSpec(s.theta)).l2_sq / s.h;
    j["l2_sq_scaled"] = l2;
    j["multiplier_l2_deviation"] = std::fabs(pi / s.N * l2 - 1.0);
    j["multiplier_l2_bound"] = 2.0 / s.N;
    schedules.push_back(j);
  }
  emit(cfg, t, { { "schedules", schedules } }, out);
  return kExitOk;
}

int
cmd_bias(const ExperimentConfig& cfg, std::ostream& out)
{
  auto d = AnalyticDensity::parse(cfg.density);
  auto grid = grid_of(cfg);
  double beta = beta_p(d, cfg.p);
  Table t{ { "n", "N", "theta_n", "h_n", "bias_sup", "bias_l2", "bias_lp", "psi_p",
             "bias_lp_over_psi" },
           {} };
  std::vector<std::pair<double, double>> curve;
  for (auto n : cfg.n_list) {
    auto s = bandwidth_schedule(cfg.gamma, n);
    auto b = bias_function(s, d, grid);
    double sup = 0.0;
    for (double v : b.values())
      sup = std::max(sup, std::fabs(v));
    double lp = lp_norm(b, cfg.p).value;
    double psi = rate_psi(s, beta);
    t.add({ n, s.N, s.theta, s.h, sup, lp_norm(b, 2.0).value, lp, psi, lp / psi });
    curve.emplace_back(s.N, sup);
  }
  // least-squares slope of log sup|b_n| against N
  double slope = std::nan("");
  if (curve.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : curve) {
      mx += x;
      my += std::log(y);
    }
    mx /= static_cast<double>(curve.size());
    my /= static_cast<double>(curve.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : curve) {
      sxy += (x - mx) * (std::log(y) - my);
      sxx += (x - mx) * (x - mx);
    }
    slope = sxy / sxx;
  }
  Json extra = { { "log_sup_bias_slope_vs_N", std::isfinite(slope) ? Json(slope) : Json(nullptr) },
                 { "gamma", cfg.gamma } };
  emit(cfg, t, extra, out);
  ChartSpec chart{ "sup |b_n| vs N (" + d.id() + ")", "N", "sup |b_n|", false, true, 0.0, false, {} };
  chart.series.push_back({ "sup |b_n|", curve });
  emit_svg(cfg, chart);
  return kExitOk;
}

int
cmd_moments(const ExperimentConfig& cfg, std::ostream& out)
{
  auto d = AnalyticDensity::parse(cfg.density);
  Table t{ { "n", "x", "f", "mean", "second_moment", "mean_minus_f", "pi_h_second_moment",
             "var_xi", "f_over_pi" },
           {} };
  for (auto n : cfg.n_list) {
    auto s = bandwidth_schedule(cfg.gamma, n);
    for (double x : cfg.xs) {
      auto m = pointwise_moments(s, d, x);
      double f = d.pdf(x);
      t.add({ n, x, f, m.mean, m.second_moment, m.mean - f, pi * s.h * m.second_moment,
              s.h * (m.second_moment - m.mean * m.mean), f / pi });
    }
  }
  emit(cfg, t, Json::object(), out);
  return kExitOk;
}

MonteCarloSettings
mc_settings(const ExperimentConfig& cfg)
{
  return { grid_of(cfg), parse_evaluator(cfg.evaluator) };
}

int
cmd_risk(const ExperimentConfig& cfg, std::ostream& out)
{
  auto d = AnalyticDensity::parse(cfg.density);
  std::vector<AnalyticDensity> vic;
  for (const auto& v : cfg.vicinity)
    vic.push_back(AnalyticDensity::parse(v));
  auto rep = mc_risk(d, cfg.gamma, cfg.p, LossSpec::parse(cfg.loss), cfg.n_list, cfg.replicates,
                     cfg.seed, mc_settings(cfg), vic);
  emit(cfg, risk_table(rep), risk_metadata(rep), out);
  ChartSpec chart{ "normalized L_p risk vs n (" + rep.density + ", p = " + format_shortest(cfg.p) + ")",
                   "n", "mean l(||f_n - f||_p / psi_p(n))", true, false, 1.0, true, {} };
  ChartSeries series{ "mean risk", {} };
  for (const auto& r : rep.rows)
    series.points.emplace_back(static_cast<double>(r.n), r.mean_risk);
  chart.series.push_back(series);
  emit_svg(cfg, chart);
  return kExitOk;
}

int
cmd_xi_moment(const ExperimentConfig& cfg, std::ostream& out)
{
  auto d = AnalyticDensity::parse(cfg.density);
  double beta = beta_p(d, cfg.p);
  Table t{ { "n", "estimate", "std_error", "variance", "target", "ratio", "replicates" }, {} };
  for (auto n : cfg.n_list) {
    auto batch =
      simulate_replicates(d, cfg.gamma, n, cfg.replicates, cfg.seed, { cfg.p }, mc_settings(cfg));
    auto m = xi_moment_from(batch, 0, beta);
    t.add({ n, m.estimate, m.std_error, m.variance, m.target, m.estimate / m.target, m.replicates });
  }
  emit(cfg, t, { { "beta_p", beta } }, out);
  return kExitOk;
}

int
cmd_cov(const ExperimentConfig& cfg, std::ostream& out)
{
  auto d = AnalyticDensity::parse(cfg.density);
  Table t{ { "n", "x", "y", "cov", "corr", "var_x", "var_y", "f_x_over_pi", "in_D_n", "D_n_threshold" },
           {} };
  for (auto n : cfg.n_list) {
    auto s = bandwidth_schedule(cfg.gamma, n);
    auto res = mc_covariance(d, cfg.gamma, n, cfg.replicates, cfg.seed, cfg.pairs, cfg.delta);
    for (const auto& r : res)
      t.add({ n, r.x, r.y, r.cov, r.corr, r.var_x, r.var_y, d.pdf(r.x) / pi, r.in_D_n,
              std::pow(s.N, -0.5 * (1.0 - cfg.delta)) });
  }
  emit(cfg, t, Json::object(), out);
  return kExitOk;
}

int
cmd_ymoment(const ExperimentConfig& cfg, std::ostream& out)
{
  Table t{ { "n", "lambda", "theta_n", "h_n", "moment", "h_pow_lambda_moment" }, {} };
  for (auto n : cfg.n_list) {
    auto s = bandwidth_schedule(cfg.gamma, n);
    for (double l : cfg.lambdas) {
      double m = y_moment(l, s);
      t.add({ n, l, s.theta, s.h, m, std::pow(s.h, l) * m });
    }
  }
  emit(cfg, t, Json::object(), out);
  return kExitOk;
}

std::vector<double>
read_sample(const std::string& path)
{
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot read sample file '" + path + "'");
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#')
      continue;
    auto e = line.find_last_not_of(" \t\r");
    try {
      xs.push_back(parse_double(std::string_view(line).substr(b, e - b + 1)));
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  if (xs.size() < 2)
    throw ConfigError("sample file '" + path + "' needs at least two values");
  return xs;
}

int
cmd_estimate(const ExperimentConfig& cfg, std::ostream& out)
{
  auto grid = grid_of(cfg);
  auto ev = parse_evaluator(cfg.evaluator);
  Json config = cfg.resolved();
  EstimateResult est = [&] {
    if (cfg.input.empty())
      return estimate_from_density(AnalyticDensity::parse(cfg.density), cfg.gamma, cfg.n_list.front(),
                                   cfg.seed, grid, ev);
    auto xs = read_sample(cfg.input);
    std::ifstream is(cfg.input, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    config["input_fnv1a"] = hex64(fnv1a64(bytes));
    auto n = static_cast<std::int64_t>(xs.size());
    auto s = bandwidth_schedule(cfg.gamma, n);
    auto k = ScaledKernel::fejer(s);
    return EstimateResult{ kde_evaluate(xs, k, grid, ev), s, n, cfg.seed, k.describe() };
  }();
  auto prov = Provenance::of(config);
  std::ostringstream csv;
  csv << "# schema=" << kSchemaVersion << " input_hash=" << prov.input_hash
      << " config=" << prov.config.dump() << '\n';
  write_estimate_csv(csv, est);
  auto sidecar = Json::parse(estimate_sidecar_json(est));
  sidecar["input_hash"] = prov.input_hash;
  sidecar["config"] = prov.config;
  if (cfg.out.empty()) {
    out << csv.str();
  } else {
    write_file(cfg.out, csv.str());
    write_file(cfg.out + ".json", sidecar.dump(2) + "\n");
  }
  return kExitOk;
}

} // namespace

int
resolve_thread_count(int flag_value)
{
  if (flag_value > 0)
    return flag_value;
  if (const char* env = std::getenv("STRIPKDE_THREADS")) {
    try {
      double v = parse_double(env);
      if (v >= 1.0 && v <= 4096.0 && v == std::floor(v))
        return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("STRIPKDE_THREADS must be an integer in [1, 4096], got '" + std::string(env) + "'");
  }
  return 0;
}

int
run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err)
{
  const auto& c = cfg.command;
  if (c == "kernel-info")
    return cmd_kernel_info(cfg, out);
  if (c == "bias")
    return cmd_bias(cfg, out);
  if (c == "moments")
    return cmd_moments(cfg, out);
  if (c == "risk")
    return cmd_risk(cfg, out);
  if (c == "xi-moment")
    return cmd_xi_moment(cfg, out);
  if (c == "cov")
    return cmd_cov(cfg, out);
  if (c == "ymoment")
    return cmd_ymoment(cfg, out);
  if (c == "estimate")
    return cmd_estimate(cfg, out);
  if (c == "selfcheck") {
    auto names = selfcheck_names();
    if (!cfg.inject_fault.empty() &&
        std::find(names.begin(), names.end(), cfg.inject_fault) == names.end())
      throw ConfigError("unknown selfcheck '" + cfg.inject_fault + "' for --inject-fault");
    return run_selfcheck(out, cfg.inject_fault);
  }
  err << "unknown command '" << c << "'\n";
  return kExitConfigError;
}

int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  try {
    auto cfg = parse_config(argc, argv);
    if (!cfg)
      return kExitOk;
    int threads = resolve_thread_count(cfg->threads);
    if (threads > 0)
      omp_set_num_threads(threads);
    return run_command(*cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailure;
  }
}

} // namespace stripkde
