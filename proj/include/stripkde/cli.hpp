#pragma once

#include "stripkde/config.hpp"

#include <iosfwd>

namespace stripkde {

//! Exit statuses of the command-line tool.
enum ExitCode : int
{
  kExitOk = 0,
  kExitCheckFailure = 1,
  kExitConfigError = 2
};

//! Runs a resolved experiment; results go to cfg.out or `out`.
int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

//! Full entry point: parse, set threads, run, map exceptions to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

//! --threads, else STRIPKDE_THREADS, else 0 (leave the OpenMP default).
int resolve_thread_count(int flag_value);

} // namespace stripkde
