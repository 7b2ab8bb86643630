#pragma once

#include <string>
#include <vector>

#include "hardylab/config.hpp"
#include "hardylab/report.hpp"

namespace hardylab::run {

/// 0 for PASS / CERTIFIED / DISCRETE and plain computations, 1 for
/// FAIL / INCONCLUSIVE verdicts, 2 for errors.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitVerdict = 1;
inline constexpr int kExitError = 2;

struct Outcome {
  int exit_code = kExitSuccess;
  report::json report;
  std::vector<std::string> files;   // written, in order
};

/// Runs one pipeline and writes <dir>/<command>.json and, when requested,
/// <dir>/<command>.csv. Library errors become an ERROR report with exit
/// code 2; only failures to write the report itself propagate.
Outcome execute(config::Command command, const config::RunConfig& cfg, bool dry_run = false);

} // namespace hardylab::run
