#pragma once

/// \file runner.hpp
/// Drives the configured suites in dependency order (simulate -> cook ->
/// decompose on one shared trajectory; lemma-lab and validate-potential
/// stand alone), writes the artifact directory (trajectory snapshots, CSV
/// series, JSON reports, manifest), evaluates the per-suite PASS criteria,
/// and maps every failure mode to a stable process exit code.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specloc/config.hpp"

namespace specloc {

/// Command-line adjustments applied on top of the config file.
struct RunOptions {
  std::vector<Suite> suites;  // non-empty: replaces the config's suite list
  std::string out_dir;        // non-empty: replaces the config's output dir
  bool seed_set = false;
  std::uint64_t seed = 0;     // applied when seed_set
  bool quiet = false;         // suppress progress and per-criterion lines
};

/// Process exit codes.
inline constexpr int kExitPass = 0;          // all enabled criteria hold
inline constexpr int kExitCriteriaFail = 1;  // a criterion failed
inline constexpr int kExitConfigError = 2;   // usage / malformed or invalid config
inline constexpr int kExitNumericError = 3;  // numeric failure or resource abort

/// One evaluated PASS criterion.
struct CriterionResult {
  std::string suite;
  std::string name;
  std::string detail;  // measured values and the threshold they met
  bool pass = false;
};

/// Everything a run produced, for callers that want the numbers rather
/// than the files (tests, the acceptance harness).
struct RunResult {
  int exit_code = kExitNumericError;
  std::string out_dir;                 // resolved output directory
  std::vector<CriterionResult> criteria;
  std::vector<std::string> artifacts;  // file names written under out_dir
  bool aborted = false;                // numeric / resource abort happened
  std::string abort_reason;
  nlohmann::json manifest;             // what manifest.json holds
};

/// Executes cfg with opt applied. The output directory is created if
/// missing; manifest.json is written even when a stage aborts, with the
/// missing artifacts flagged. Does not throw: every failure mode lands in
/// exit_code / abort_reason.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt,
                         std::ostream& log);

/// load_config + run_experiment with the error taxonomy applied: parse and
/// constraint problems print one line and return kExitConfigError; numeric
/// aborts return kExitNumericError; criteria failures kExitCriteriaFail.
int run(const std::string& config_path, const RunOptions& opt, std::ostream& log);

}  // namespace specloc
