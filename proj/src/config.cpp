#include "stripkde/config.hpp"

#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/format.hpp"
#include "stripkde/kernels.hpp"
#include "stripkde/risk.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace stripkde {

namespace {

const char* const kKeys[] = { "density", "gamma",     "p",     "loss",   "n",      "reps",
                              "seed",    "L",         "step",  "delta",  "evaluator",
                              "vicinity", "pairs",    "lambda", "theta", "x",      "input",
                              "out",     "svg",       "threads", "inject_fault" };

[[noreturn]] void
fail(const std::string& key, const std::string& why)
{
  throw ConfigError("config '" + key + "': " + why);
}

std::vector<std::string>
split_list(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos)
      out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double
as_number(const std::string& key, const Json& v)
{
  try {
    if (v.is_number())
      return v.get<double>();
    if (v.is_string())
      return parse_double(v.get<std::string>());
  } catch (const std::exception& e) {
    fail(key, e.what());
  }
  fail(key, "expected a number");
}

std::int64_t
as_integer(const std::string& key, const Json& v)
{
  if (v.is_number_integer())
    return v.get<std::int64_t>();
  double d = as_number(key, v);
  if (!(std::fabs(d) < 9.0e15) || d != std::floor(d))
    fail(key, "expected an integer, got " + format_shortest(d));
  return static_cast<std::int64_t>(d);
}

std::string
as_string(const std::string& key, const Json& v)
{
  if (!v.is_string())
    fail(key, "expected a string");
  return v.get<std::string>();
}

template<class Item, class Parse>
std::vector<Item>
as_list(const std::string& key, const Json& v, char sep, Parse&& parse)
{
  std::vector<Item> out;
  if (v.is_array()) {
    for (const auto& e : v)
      out.push_back(parse(e));
  } else if (v.is_string()) {
    for (const auto& s : split_list(v.get<std::string>(), sep))
      out.push_back(parse(Json(s)));
  } else {
    out.push_back(parse(v));
  }
  if (out.empty())
    fail(key, "list must not be empty");
  return out;
}

std::pair<double, double>
as_pair(const Json& v)
{
  if (v.is_array() && v.size() == 2)
    return { as_number("pairs", v[0]), as_number("pairs", v[1]) };
  if (v.is_string()) {
    auto s = v.get<std::string>();
    auto colon = s.find(':');
    if (colon != std::string::npos)
      return { as_number("pairs", Json(s.substr(0, colon))),
               as_number("pairs", Json(s.substr(colon + 1))) };
  }
  fail("pairs", "expected X:Y items or [x, y] arrays");
}

void
require(bool ok, const std::string& key, const std::string& why)
{
  if (!ok)
    fail(key, why);
}

bool
needs_p(const std::string& command)
{
  return command == "risk" || command == "xi-moment" || command == "bias";
}

} // namespace

Json
ExperimentConfig::resolved() const
{
  Json j = Json::object();
  j["command"] = command;
  j["density"] = density;
  j["gamma"] = gamma;
  j["p"] = p;
  j["loss"] = loss;
  j["n"] = n_list;
  j["reps"] = replicates;
  j["seed"] = seed;
  j["L"] = half_width;
  j["step"] = step;
  j["delta"] = delta;
  j["evaluator"] = evaluator;
  j["vicinity"] = vicinity;
  Json pr = Json::array();
  for (auto [x, y] : pairs)
    pr.push_back({ x, y });
  j["pairs"] = pr;
  j["lambda"] = lambdas;
  j["theta"] = thetas;
  j["x"] = xs;
  j["input"] = input;
  return j;
}

ExperimentConfig
resolve_config(const std::string& command, const Json& values)
{
  if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands)) {
    std::string known;
    for (const char* c : kCommands)
      known += std::string(known.empty() ? "" : ", ") + c;
    throw ConfigError("unknown command '" + command + "' (expected one of: " + known + ")");
  }
  if (!values.is_object())
    throw ConfigError("configuration must be a JSON object");

  ExperimentConfig cfg;
  cfg.command = command;
  std::optional<double> gamma;
  for (auto it = values.begin(); it != values.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "density")
      cfg.density = as_string(key, v);
    else if (key == "gamma")
      gamma = as_number(key, v);
    else if (key == "p")
      cfg.p = as_number(key, v);
    else if (key == "loss")
      cfg.loss = as_string(key, v);
    else if (key == "n")
      cfg.n_list = as_list<std::int64_t>(key, v, ',', [&](const Json& e) { return as_integer(key, e); });
    else if (key == "reps")
      cfg.replicates = as_integer(key, v);
    else if (key == "seed") {
      if (v.is_number_unsigned())
        cfg.seed = v.get<std::uint64_t>();
      else {
        auto s = as_integer(key, v);
        require(s >= 0, key, "must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
      }
    } else if (key == "L")
      cfg.half_width = as_number(key, v);
    else if (key == "step")
      cfg.step = as_number(key, v);
    else if (key == "delta")
      cfg.delta = as_number(key, v);
    else if (key == "evaluator")
      cfg.evaluator = as_string(key, v);
    else if (key == "vicinity")
      cfg.vicinity = as_list<std::string>(key, v, ';', [&](const Json& e) { return as_string(key, e); });
    else if (key == "pairs")
      cfg.pairs = as_list<std::pair<double, double>>(key, v, ',', as_pair);
    else if (key == "lambda")
      cfg.lambdas = as_list<double>(key, v, ',', [&](const Json& e) { return as_number(key, e); });
    else if (key == "theta")
      cfg.thetas = as_list<double>(key, v, ',', [&](const Json& e) { return as_number(key, e); });
    else if (key == "x")
      cfg.xs = as_list<double>(key, v, ',', [&](const Json& e) { return as_number(key, e); });
    else if (key == "input")
      cfg.input = as_string(key, v);
    else if (key == "out")
      cfg.out = as_string(key, v);
    else if (key == "svg")
      cfg.svg = as_string(key, v);
    else if (key == "threads") {
      auto t = as_integer(key, v);
      require(t >= 0 && t <= 4096, key, "must lie in [0, 4096]");
      cfg.threads = static_cast<int>(t);
    } else if (key == "inject_fault")
      cfg.inject_fault = as_string(key, v);
    else
      throw ConfigError("unknown config key '" + key + "'");
  }

  // ranges and cross-field checks
  std::optional<AnalyticDensity> d;
  try {
    d = AnalyticDensity::parse(cfg.density);
  } catch (const std::exception& e) {
    fail("density", e.what());
  }
  cfg.density = d->id();
  cfg.gamma = gamma.value_or(0.5 * d->strip());
  require(cfg.gamma > 0.0 && std::isfinite(cfg.gamma), "gamma", "must be positive");
  require(cfg.p >= 1.0 && std::isfinite(cfg.p), "p", "must be a finite number >= 1");
  try {
    cfg.loss = LossSpec::parse(cfg.loss).id();
    parse_evaluator(cfg.evaluator);
  } catch (const std::exception& e) {
    fail("loss/evaluator", e.what());
  }
  std::int64_t min_reps = command == "cov" ? 50 : 2;
  require(cfg.replicates >= min_reps && cfg.replicates <= 100000000, "reps",
          "must lie in [" + std::to_string(min_reps) + ", 1e8] for " + command);
  require(cfg.half_width > 0.0 && cfg.step > 0.0, "L/step", "must be positive");
  try {
    GridSpec{ cfg.half_width, cfg.step }.size();
  } catch (const std::exception& e) {
    fail("L/step", e.what());
  }
  require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta", "must lie in (0, 1)");
  for (double t : cfg.thetas)
    require(t >= 0.0 && t <= 1.0, "theta", "values must lie in [0, 1]");
  for (double l : cfg.lambdas)
    require(l > 0.0 && l <= 2.0, "lambda", "values must lie in (0, 2]");
  for (auto n : cfg.n_list) {
    require(n >= 2 && n <= 1000000000, "n", "sample sizes must lie in [2, 1e9]");
    try {
      bandwidth_schedule(cfg.gamma, n);
    } catch (const SubcriticalSampleSize& e) {
      fail("n", e.what());
    }
  }
  if (command != "kernel-info" && command != "ymoment" && command != "selfcheck") {
    try {
      validate_strip(*d, cfg.gamma);
      for (const auto& v : cfg.vicinity)
        validate_strip(AnalyticDensity::parse(v), cfg.gamma);
    } catch (const std::exception& e) {
      fail("gamma", e.what());
    }
  }
  if (needs_p(command)) {
    try {
      validate_class(*d, cfg.p);
      for (const auto& v : cfg.vicinity)
        validate_class(AnalyticDensity::parse(v), cfg.p);
    } catch (const std::exception& e) {
      fail("p", e.what());
    }
  }
  return cfg;
}

std::optional<ExperimentConfig>
parse_config(int argc, const char* const* argv)
{
  CLI::App app{ "Strip-analytic density estimation with Fejér-type kernels" };
  app.set_help_flag("-h,--help", "Print help");
  std::string command, config_file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> vicinity;
  std::map<std::string, CLI::Option*> opts;

  app.add_option("command", command, "kernel-info | bias | moments | risk | xi-moment | cov | "
                                     "ymoment | selfcheck | estimate")
    ->required();
  app.add_option("--config", config_file, "JSON file with config keys (flags override it)");
  auto flag = [&](const std::string& key, const std::string& names, const std::string& help) {
    opts[key] = app.add_option(names, flags[key], help);
  };
  flag("density", "--density", "sech:G0 | cauchy:A | conv:G0:uniform:C | conv:G0:points:S@W,...");
  flag("gamma", "--gamma", "strip half-width used by the schedule (default: strip / 2)");
  flag("p", "--p", "L_p exponent");
  flag("loss", "--loss", "identity | power:Q | capped:C");
  flag("n", "--n", "comma-separated sample sizes");
  flag("reps", "--reps", "Monte Carlo replicates");
  flag("seed", "--seed", "master seed");
  flag("L", "--L,--half-width", "grid half-width");
  flag("step", "--step", "grid step");
  flag("delta", "--delta", "D_n exponent parameter in (0, 1)");
  flag("evaluator", "--evaluator", "reference | direct | spread");
  flag("pairs", "--pairs", "covariance pairs X:Y,X:Y");
  flag("lambda", "--lambda", "comma-separated moment orders in (0, 2]");
  flag("theta", "--theta", "comma-separated kernel shape parameters");
  flag("x", "--x", "comma-separated evaluation points");
  flag("input", "--input", "sample file (one value per line) for estimate");
  flag("out", "--out", "output file (.csv or .json); JSON to stdout when absent");
  flag("svg", "--svg", "SVG chart output");
  flag("threads", "--threads", "worker threads (default: STRIPKDE_THREADS or all cores)");
  flag("inject_fault", "--inject-fault", "selfcheck: corrupt the named check's constant");
  auto vic = app.add_option("--vicinity", vicinity, "neighbouring density (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  Json values = Json::object();
  if (!config_file.empty()) {
    std::ifstream is(config_file);
    if (!is)
      throw ConfigError("cannot read config file '" + config_file + "'");
    try {
      values = Json::parse(is);
    } catch (const std::exception& e) {
      throw ConfigError("config file '" + config_file + "' is not valid JSON: " + e.what());
    }
    if (!values.is_object())
      throw ConfigError("config file '" + config_file + "' must hold a JSON object");
    for (auto it = values.begin(); it != values.end(); ++it)
      if (std::find(std::begin(kKeys), std::end(kKeys), it.key()) == std::end(kKeys))
        throw ConfigError("unknown config key '" + it.key() + "' in " + config_file);
  }
  for (const auto& [key, opt] : opts)
    if (opt->count() > 0)
      values[key] = flags[key];
  if (vic->count() > 0)
    values["vicinity"] = vicinity;
  return resolve_config(command, values);
}

} // namespace stripkde
