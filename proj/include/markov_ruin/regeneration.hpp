#pragma once

// Split chain and regeneration blocks.
//
// Block i covers the indices T_{i-1}, ..., T_i - 1. For a cycle the first
// state of the block is the nu-distributed regeneration state itself; the
// initial block starts at X_1 ~ P(x0, .) (T_{-1} = 1).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "markov_ruin/markov_models.hpp"
#include "markov_ruin/minorization.hpp"
#include "markov_ruin/numerics.hpp"

namespace markov_ruin {

inline constexpr std::uint64_t kDefaultCycleCap = 10'000'000;

struct RegenBlock {
  std::uint64_t tau = 0;
  double s_check = 0.0;
  double a_check = 1.0;
  double b_check = 0.0;
  double m_check = 0.0;
  double b_star_check = 0.0;
  bool is_initial = false;
};

struct SplitStep {
  std::vector<double> state;  // X_n
  bool regenerated = false;   // X_n was drawn from nu (n is some T_i)
  double a = 1.0;
  double log_a = 0.0;
  double b = 0.0;
};

struct SplitTrace {
  ChainState initial;               // X_0
  std::vector<SplitStep> steps;     // steps[n - 1] holds time n
  std::vector<std::uint64_t> regeneration_times;
};

/// One i.i.d. cycle started from X_0 ~ nu. Throws CycleOverflow.
RegenBlock simulate_cycle(const ModelSpec& model, const MinorizationCert& cert, Rng& rng,
                          std::uint64_t cap = kDefaultCycleCap);

/// Block from a fixed x0 up to the first regeneration T_0 >= 2.
RegenBlock simulate_initial_block(const ModelSpec& model, const MinorizationCert& cert, const ChainState& x0,
                                  Rng& rng, std::uint64_t cap = kDefaultCycleCap);

/// n cycles on per-cycle streams derived from seed, in parallel.
std::vector<RegenBlock> simulate_cycles(const ModelSpec& model, const MinorizationCert& cert, std::size_t n,
                                        std::uint64_t seed, std::uint64_t cap = kDefaultCycleCap);

/// Split chain path X_0 = x0, X_1, ..., X_horizon with its marks.
SplitTrace simulate_split_path(const ModelSpec& model, const MinorizationCert& cert, const ChainState& x0,
                               std::uint64_t horizon, Rng& rng);

struct Decomposition {
  std::vector<RegenBlock> blocks;  // blocks 0..K*, first is initial
  double remainder = 0.0;          // discounted sum from T_{K*} to the horizon
};

/// Splits a trace into the complete blocks ending by time T_{K*} - 1 with
/// K* = max{i : T_i <= horizon} and the partial remainder.
Decomposition decompose_trace(const SplitTrace& trace);

/// W_n from block statistics: B0 + A0 B1 + ... + (A0 ... A_K) R.
double blocks_to_w(std::span<const RegenBlock> blocks, double remainder);

/// Direct discounted sum W_n = B_1 + A_1 B_2 + ... from a trace.
double direct_w(const SplitTrace& trace);

/// Z*_i = B*_i + A_i Z*_{i-1} from Z*_{-1} = w0.
std::vector<double> garch_block_recursion(std::span<const RegenBlock> blocks, double w0);

/// Statistics of the steps with indices [first, last) of a trace.
RegenBlock block_from_steps(std::span<const SplitStep> steps, bool is_initial);

struct SplitCheckReport {
  TestResult horizon_test;
  TestResult regeneration_test;
  std::size_t n_regenerations = 0;
  bool finite = false;
};

/// Compares X_horizon under split and plain dynamics from the same start
/// (KS on the first coordinate, or chi-square on regimes), and the states
/// at regeneration instants against direct nu draws.
SplitCheckReport split_marginal_check(const ModelSpec& model, const MinorizationCert& cert, std::uint64_t horizon,
                                      std::size_t n_paths, Rng& rng, std::size_t n_regenerations = 10'000);

/// One block per line: tau, s_check, b_check, m_check, b_star_check.
void write_blocks(std::ostream& out, std::span<const RegenBlock> blocks);

}  // namespace markov_ruin
