#pragma once

#include "stripkde/report.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stripkde {

//! Invalid or out-of-range configuration; the CLI exits with status 2.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCommands[] = { "kernel-info", "bias",     "moments",  "risk",
                                             "xi-moment",   "cov",      "ymoment",  "selfcheck",
                                             "estimate" };

struct ExperimentConfig
{
  std::string command;
  std::string density = "sech:1";
  double gamma = 0.0; //!< resolved; defaults to half the density's strip
  double p = 2.0;
  std::string loss = "identity";
  std::vector<std::int64_t> n_list{ 1000, 10000, 100000 };
  std::int64_t replicates = 200;
  std::uint64_t seed = 42;
  double half_width = 50.0;
  double step = 0.01;
  double delta = 0.5;
  std::string evaluator = "spread";
  std::vector<std::string> vicinity;
  std::vector<std::pair<double, double>> pairs{ { 0.0, 1.0 } };
  std::vector<double> lambdas{ 1.0, 2.0 };
  std::vector<double> thetas{ 0.0, 0.25, 0.5, 0.9, 0.99 };
  std::vector<double> xs{ 0.0 };
  std::string input;
  std::string out;
  std::string svg;
  int threads = 0; //!< 0: STRIPKDE_THREADS or hardware default
  std::string inject_fault;

  //! The experiment definition echoed into outputs. Output paths, thread
  //! count and fault injection are excluded: they do not change results.
  Json resolved() const;
};

//! Resolves a JSON object of config keys (file contents merged with flag
//! overrides) into a validated config. Unknown keys are rejected.
ExperimentConfig resolve_config(const std::string& command, const Json& values);

//! Parses `stripkde <command> [--config FILE] [--key value ...]`.
//! Flags override file values. Throws ConfigError on any problem.
//! Returns nullopt after printing help.
std::optional<ExperimentConfig> parse_config(int argc, const char* const* argv);

} // namespace stripkde
