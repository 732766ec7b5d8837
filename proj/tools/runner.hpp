#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace pmllab::cli {

enum ExitCode { kPass = 0, kRuntimeError = 1, kCheckFailed = 2 };

/// Runs the experiment, writes its artifacts and manifest.txt under
/// config.output and returns the process exit code. Progress goes to `log`.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// SHA-256 of a file as lowercase hex.
std::string sha256_file(const std::string& path);

}  // namespace pmllab::cli
