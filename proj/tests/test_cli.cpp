#include "stripkde/cli.hpp"
#include "stripkde/config.hpp"
#include "stripkde/selfcheck.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace stripkde;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run
cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "stripkde");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return { code, out.str(), err.str() };
}

std::string
slurp(const fs::path& p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path
scratch(const std::string& name)
{
  auto dir = fs::temp_directory_path() / "stripkde_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

ExperimentConfig
parse(std::vector<std::string> args)
{
  args.insert(args.begin(), "stripkde");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return *parse_config(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("flags resolve into a validated config")
{
  auto cfg = parse({ "risk", "--density", "cauchy:2", "--p", "4", "--n", "1000,5000", "--reps", "7",
                     "--loss", "capped:3" });
  CHECK(cfg.command == "risk");
  CHECK(cfg.density == "cauchy:2");
  CHECK(cfg.gamma == 1.0);
  CHECK(cfg.p == 4.0);
  CHECK(cfg.n_list == std::vector<std::int64_t>{ 1000, 5000 });
  CHECK(cfg.replicates == 7);
  CHECK(cfg.loss == "capped:3");
  auto j = cfg.resolved();
  CHECK(j["density"] == "cauchy:2");
  CHECK_FALSE(j.contains("out"));
  CHECK_FALSE(j.contains("threads"));
}

TEST_CASE("config file values yield to flags")
{
  auto path = scratch("cfg.json");
  std::ofstream(path) << R"({"density": "sech:2", "p": 1, "reps": 11})";
  auto cfg = parse({ "risk", "--config", path.string(), "--reps", "13" });
  CHECK(cfg.density == "sech:2");
  CHECK(cfg.p == 1.0);
  CHECK(cfg.replicates == 13);

  std::ofstream(path) << R"({"density": "sech:2", "colour": "red"})";
  auto r = cli({ "risk", "--config", path.string() });
  CHECK(r.code == kExitConfigError);
  CHECK(r.err.find("colour") != std::string::npos);
}

TEST_CASE("configuration errors exit with status 2")
{
  auto sub = cli({ "risk", "--n", "10", "--gamma", "1.2" });
  CHECK(sub.code == kExitConfigError);
  CHECK(sub.err.find("subcritical sample size") != std::string::npos);
  CHECK_THROWS_AS(parse({ "risk", "--n", "10", "--gamma", "1.2" }), ConfigError);

  auto cls = cli({ "risk", "--density", "cauchy:1", "--p", "1" });
  CHECK(cls.code == kExitConfigError);
  CHECK(cls.err.find("lambda") != std::string::npos);

  CHECK(cli({ "frobnicate" }).code == kExitConfigError);
  CHECK(cli({ "risk", "--reps", "many" }).code == kExitConfigError);
  CHECK(cli({ "risk", "--density", "gauss:1" }).code == kExitConfigError);
  CHECK(cli({ "risk", "--gamma", "1.5" }).code == kExitConfigError);
  CHECK(cli({ "cov", "--delta", "1" }).code == kExitConfigError);
  CHECK(cli({ "ymoment", "--lambda", "3" }).code == kExitConfigError);
  CHECK(cli({ "risk", "--bogus", "1" }).code == kExitConfigError);
  CHECK(cli({ "selfcheck", "--inject-fault", "no-such-check" }).code == kExitConfigError);
}

TEST_CASE("thread count resolution")
{
  ::unsetenv("STRIPKDE_THREADS");
  CHECK(resolve_thread_count(0) == 0);
  CHECK(resolve_thread_count(3) == 3);
  ::setenv("STRIPKDE_THREADS", "2", 1);
  CHECK(resolve_thread_count(0) == 2);
  CHECK(resolve_thread_count(5) == 5);
  ::setenv("STRIPKDE_THREADS", "lots", 1);
  CHECK_THROWS_AS(resolve_thread_count(0), ConfigError);
  ::unsetenv("STRIPKDE_THREADS");
}

TEST_CASE("selfcheck passes and reports injected faults")
{
  auto ok = cli({ "selfcheck" });
  CHECK(ok.code == kExitOk);
  CHECK(selfcheck_names().size() >= 15);
  for (const auto& name : selfcheck_names())
    CHECK(ok.out.find(name) != std::string::npos);

  auto bad = cli({ "selfcheck", "--inject-fault", "kernel-l2-norm" });
  CHECK(bad.code == kExitCheckFailure);
  CHECK(bad.out.find("kernel-l2-norm") != std::string::npos);
  auto results = run_selfcheck_suite("kernel-l2-norm");
  for (const auto& r : results)
    CHECK(r.pass == (r.name != "kernel-l2-norm"));
}

TEST_CASE("kernel-info writes JSON to stdout")
{
  auto r = cli({ "kernel-info", "--theta", "0,0.5" });
  REQUIRE(r.code == kExitOk);
  auto doc = Json::parse(r.out);
  CHECK(doc.contains("config"));
  CHECK(r.out.find("l2_sq") != std::string::npos);
}

TEST_CASE("reruns produce byte-identical CSV")
{
  auto a = scratch("risk_a.csv"), b = scratch("risk_b.csv");
  std::vector<std::string> common{ "risk", "--n", "1000,3000", "--reps", "6", "--L", "20",
                                   "--step", "0.02", "--seed", "5" };
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), { "--out", a.string(), "--threads", "1" });
  args_b.insert(args_b.end(), { "--out", b.string(), "--threads", "2" });
  REQUIRE(cli(args_a).code == kExitOk);
  REQUIRE(cli(args_b).code == kExitOk);
  auto ca = slurp(a);
  CHECK_FALSE(ca.empty());
  CHECK(ca == slurp(b));
}

TEST_CASE("estimate reads a sample file")
{
  auto in = scratch("sample.txt");
  {
    std::ofstream os(in);
    for (int i = 0; i < 200; ++i)
      os << (i % 20 - 10) * 0.1 << '\n';
  }
  auto out = scratch("estimate.csv");
  auto r = cli({ "estimate", "--input", in.string(), "--out", out.string(), "--L", "5", "--step", "0.1" });
  CHECK(r.code == kExitOk);
  CHECK_FALSE(slurp(out).empty());
  CHECK(cli({ "estimate", "--input", scratch("missing.txt").string() }).code == kExitConfigError);
}
