#pragma once

// Run configuration: a strict subset of TOML (tables, key = value, numbers,
// booleans, strings, nested arrays, # comments).
//
//   experiment = "ruin"
//   seed = 42
//   n_paths = 1000000
//
//   [model]
//   kind = "IidLogNormal"
//   m = 0.05
//   sigma2 = 0.04
//
//   [loss]
//   kind = "shifted_exponential"
//   rate = 1.0
//   shift = -1.5

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markov_ruin/markov_models.hpp"

namespace markov_ruin {

enum class Experiment { Solve, Ruin, Perpetuity, Garch, Verify, Minorize };

std::string_view to_string(Experiment e);
/// Accepts the lower-case subcommand names. Throws ParseError.
Experiment parse_experiment(std::string_view name);

struct MinorizationConfig {
  std::optional<double> a_level;
  std::optional<double> delta;  // overrides the certified delta_a
  std::size_t n_states = 100;
  std::size_t n_sets = 100;
  bool operator==(const MinorizationConfig&) const = default;
};

struct RuinConfig {
  std::vector<double> u_grid;  // empty: quantile window of the simulated suprema
  double q_lo = 0.95;
  double q_hi = 0.999;
  std::size_t grid_points = 12;
  bool dump_samples = false;
  bool operator==(const RuinConfig&) const = default;
};

struct SolveConfig {
  std::size_t cgf_steps = 100;
  std::size_t cgf_paths = 100000;
  std::optional<double> truncation_m;
  double kernel_half_width = 12.0;
  std::size_t kernel_points = 800;
  std::size_t bootstrap = 200;
  std::vector<double> alpha_grid;  // empty: derived from the exponent
  bool operator==(const SolveConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  Experiment experiment = Experiment::Solve;
  std::uint64_t seed = 0;
  std::size_t n_paths = 100000;
  std::uint64_t horizon = 10000;
  std::size_t n_cycles = 100000;
  std::string output_dir = "out";
  MinorizationConfig minorization;
  RuinConfig ruin;
  SolveConfig solve;
  double perpetuity_tol = 1e-10;
  std::uint64_t garch_burn_in = 1000;
  std::size_t hill_k = 2000;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates config text. `experiment`, when given (the CLI
/// subcommand), takes precedence over the file's own entry. Throws
/// ParseError (with line), UnknownKey, MissingRequired.
RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment = std::nullopt);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Extracts the config text echoed in a run manifest (JSON).
std::string config_text_from_manifest(std::string_view manifest_json);

}  // namespace markov_ruin
