#pragma once

/// \file config.hpp
/// Experiment configuration: a diff-friendly [section] key = value file
/// format with line-precise parse errors, defaults matching the standard
/// breathing-well experiment, re-validation against every owning module's
/// constraints, and round-trip serialization for manifests.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "specloc/decomposition.hpp"
#include "specloc/potential.hpp"
#include "specloc/propagator.hpp"

namespace specloc {

/// Pipeline stages. simulate -> cook -> decompose chain on one trajectory
/// (requesting a later stage pulls in the earlier ones); lemma_lab and
/// validate_potential are self-contained.
enum class Suite { simulate, cook, decompose, lemma_lab, validate_potential };

/// Config/CLI spellings: simulate, cook, decompose, lemma-lab,
/// validate-potential.
std::string to_string(Suite s);
/// std::invalid_argument on unknown names.
Suite suite_from_string(const std::string& name);

/// Initial datum
///   u0(x) = bound_amplitude * sech(x)
///         + packet_amplitude * exp(-x^2 / (2 w^2)) * exp(i v x),
/// optionally normalized to unit L2 mass. The default pairs the well's
/// bound profile with a slow packet (group speed 2v = 0.9) so the free
/// channel carries clean content that never outruns the box.
struct InitialSpec {
  double bound_amplitude = 1.0;
  double packet_amplitude = 0.5;
  double packet_width = 3.0;      // w
  double packet_velocity = 0.45;  // carrier frequency v
  bool normalize = true;
};

struct ExperimentConfig {
  // [grid]
  double half_width = 400.0;
  int points = 8192;
  // [initial]
  InitialSpec initial;
  // [potential]
  PotentialSpec potential;
  // [channel] (alpha, delta) + [microloc] (theta, rho, n, eps_weak, ...)
  MicrolocParams microloc;
  // [evolution] dt, t_hor, stride, boundary_warn
  EvolutionConfig evolution;
  // [report] times
  std::vector<double> report_times = {10, 16, 20, 32, 50, 64, 100, 128, 200};
  // [output] dir
  std::string out_dir = "artifacts";
  // [run] suites, seed (seed feeds only the lemma-lab trial draws;
  // 0 keeps their built-in benchmark streams)
  std::vector<Suite> suites = {Suite::simulate, Suite::cook, Suite::decompose,
                               Suite::lemma_lab, Suite::validate_potential};
  std::uint64_t seed = 0;
};

/// Defaults above, breathing well installed: V = -2 (1 + 0.5 cos t) sech^2 x
/// with sigma = 3, symbol order 4.
ExperimentConfig default_config();

/// Malformed config text; `line` is 1-based (0 when the failure is not tied
/// to one line, e.g. an unreadable file). The message already embeds
/// origin:line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line_arg)
      : std::runtime_error(what), line(line_arg) {}
  int line = 0;
};

/// Parses [section] key = value text ('#'/';' comments, blank lines
/// ignored). Unknown sections or keys, lines without '=', and unparseable
/// values raise ConfigError carrying the line number; `origin` names the
/// stream in messages. Values are syntax-checked only — call
/// validate_config for the semantic constraints.
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

/// Reads, parses, and validates the file. ConfigError on parse problems,
/// std::domain_error naming the offending parameter on constraint
/// violations.
ExperimentConfig load_config(const std::string& path);

/// Re-runs every owning module's constraint checks (potential spec, channel
/// wedge, microloc wedge — always the strict form) plus the runner-level
/// ones: grid shape, positive dt and horizon, stride >= 1, report times
/// strictly increasing inside (1, t_hor], nonempty output dir and suite
/// list, a not-identically-zero initial datum. Throws std::domain_error
/// whose message names the parameter.
void validate_config(const ExperimentConfig& cfg);

/// Serializes in the same format parse_config reads; parsing the result
/// reproduces cfg exactly (floats printed %.17g).
std::string to_config_text(const ExperimentConfig& cfg);

/// Grid(points, half_width) with the constructor's complaints rephrased as
/// named-parameter errors.
Grid make_grid(const ExperimentConfig& cfg);

/// The configured initial datum sampled on the configured grid.
Field make_initial(const ExperimentConfig& cfg);

}  // namespace specloc
