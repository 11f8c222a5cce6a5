#pragma once

// Experiment dispatch: builds the model from a RunConfig, runs the selected
// pipeline, writes its data files and a JSON run manifest into output_dir.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markov_ruin/config.hpp"
#include "markov_ruin/exponent_solver.hpp"
#include "markov_ruin/minorization.hpp"

namespace markov_ruin {

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;  // names inside output_dir, manifest last
  std::vector<std::string> flags;
  std::vector<std::string> fatal;  // flags that force a nonzero exit
  nlohmann::json report;
};

/// Never throws for module errors: they are recorded in the manifest and
/// mapped to the exit code.
RunResult run(const RunConfig& config);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Exponent from the first deterministic route that applies (analytic,
/// spectral, discretized kernel); nullopt when none does.
std::optional<TailSolution> deterministic_exponent(const ModelSpec& model, const SolveConfig& solve = {});

/// Certificate from the model and the [minorization] settings.
MinorizationCert configured_cert(const ModelSpec& model, const MinorizationConfig& config);

/// Upper bracket for the cycle root: doubles alpha from 1 until the sample
/// log moment turns positive. Throws NoUpperBracket.
double discover_cycle_bracket(std::span<const RegenBlock> blocks, double max_alpha = 1e3);

/// Cycle route: n cycles, bracket discovery and solve_eta_cycles.
TailSolution solve_cycles(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_cycles,
                          std::uint64_t seed, std::size_t bootstrap);

/// Monte Carlo route with common random numbers across alpha.
TailSolution solve_mc(const ModelSpec& model, const SolveConfig& solve, std::uint64_t seed,
                      std::optional<Interval> bracket_hint, bool* collapsed = nullptr);

nlohmann::json to_json(const TailSolution& sol);

}  // namespace markov_ruin
