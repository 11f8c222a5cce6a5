#include "markov_ruin/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

namespace {

enum StreamPurpose : std::uint64_t { kCycles = 11, kSplitPaths = 12, kPlainPaths = 13, kNuDraws = 14 };

struct BlockAccumulator {
  std::uint64_t tau = 0;
  double log_disc = 0.0;
  double b_sum = 0.0;
  double m = -std::numeric_limits<double>::infinity();
  double b_star = 0.0;

  void add(double log_a, double b) {
    b_sum += std::exp(log_disc) * b;
    m = std::max(m, b_sum);
    b_star = std::exp(log_a) * b_star + b;
    log_disc += log_a;
    ++tau;
  }

  RegenBlock finish(bool is_initial) const {
    RegenBlock blk;
    blk.tau = tau;
    blk.s_check = log_disc;
    blk.a_check = std::exp(log_disc);
    blk.b_check = b_sum;
    blk.m_check = tau > 0 ? m : 0.0;
    blk.b_star_check = b_star;
    blk.is_initial = is_initial;
    return blk;
  }
};

// Draws X_{n+1} given X_n = x under the split dynamics. Returns true when the
// Bernoulli mark fired and y came from nu.
bool split_transition(const ModelSpec& model, const MinorizationCert& cert, std::span<const double> x, Rng& rng,
                      std::span<double> y) {
  if (!cert.in_small_set(x)) {
    sample_next(model, x, rng, y);
    return false;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < cert.delta_a) {
    cert.nu_sample(rng, y);
    return true;
  }
  // Residual kernel (P - delta nu) / (1 - delta) by rejection from P.
  for (;;) {
    sample_next(model, x, rng, y);
    const double p = transition_density(model, x, y);
    const double q = cert.delta_a * cert.nu_density(y);
    if (unif(rng) * p >= q) return false;
  }
}

[[noreturn]] void overflow(std::uint64_t cap) {
  throw Error(ErrorCode::CycleOverflow,
              "cycle length exceeded " + std::to_string(cap) + " steps; the chain may not be recurrent");
}

RegenBlock run_block(const ModelSpec& model, const MinorizationCert& cert, std::vector<double>& x, Rng& rng,
                     std::uint64_t cap, bool is_initial) {
  std::vector<double> y(model.dim, 0.0);
  BlockAccumulator acc;
  for (;;) {
    const StepValues v = emit(model, x, rng);
    acc.add(v.log_a, v.b);
    if (acc.tau > cap) overflow(cap);
    const bool fired = split_transition(model, cert, x, rng, y);
    x.swap(y);
    if (fired) return acc.finish(is_initial);
  }
}

}  // namespace

RegenBlock simulate_cycle(const ModelSpec& model, const MinorizationCert& cert, Rng& rng, std::uint64_t cap) {
  std::vector<double> x(model.dim, 0.0);
  cert.nu_sample(rng, x);
  return run_block(model, cert, x, rng, cap, false);
}

RegenBlock simulate_initial_block(const ModelSpec& model, const MinorizationCert& cert, const ChainState& x0,
                                  Rng& rng, std::uint64_t cap) {
  if (x0.x.size() != model.dim) throw Error(ErrorCode::DimensionMismatch, "x0", "state dimension does not match model");
  std::vector<double> x(model.dim, 0.0);
  sample_next(model, x0.x, rng, x);
  return run_block(model, cert, x, rng, cap, true);
}

std::vector<RegenBlock> simulate_cycles(const ModelSpec& model, const MinorizationCert& cert, std::size_t n,
                                        std::uint64_t seed, std::uint64_t cap) {
  std::vector<RegenBlock> out(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kCycles);
    out[i] = simulate_cycle(model, cert, rng, cap);
  });
  return out;
}

SplitTrace simulate_split_path(const ModelSpec& model, const MinorizationCert& cert, const ChainState& x0,
                               std::uint64_t horizon, Rng& rng) {
  if (x0.x.size() != model.dim) throw Error(ErrorCode::DimensionMismatch, "x0", "state dimension does not match model");
  SplitTrace trace;
  trace.initial = x0;
  trace.steps.reserve(horizon);
  std::vector<double> x(model.dim, 0.0);
  std::vector<double> y(model.dim, 0.0);
  sample_next(model, x0.x, rng, x);
  bool regenerated = false;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const StepValues v = emit(model, x, rng);
    trace.steps.push_back({x, regenerated, std::exp(v.log_a), v.log_a, v.b});
    if (regenerated) trace.regeneration_times.push_back(n);
    if (n == horizon) break;
    regenerated = split_transition(model, cert, x, rng, y);
    x.swap(y);
  }
  return trace;
}

RegenBlock block_from_steps(std::span<const SplitStep> steps, bool is_initial) {
  BlockAccumulator acc;
  for (const auto& s : steps) acc.add(s.log_a, s.b);
  return acc.finish(is_initial);
}

Decomposition decompose_trace(const SplitTrace& trace) {
  Decomposition d;
  const std::span<const SplitStep> steps(trace.steps);
  std::uint64_t start = 1;
  bool initial = true;
  for (std::uint64_t t : trace.regeneration_times) {
    d.blocks.push_back(block_from_steps(steps.subspan(start - 1, t - start), initial));
    initial = false;
    start = t;
  }
  d.remainder = block_from_steps(steps.subspan(start - 1), false).b_check;
  return d;
}

double blocks_to_w(std::span<const RegenBlock> blocks, double remainder) {
  double w = 0.0;
  double log_disc = 0.0;
  for (const auto& blk : blocks) {
    w += std::exp(log_disc) * blk.b_check;
    log_disc += blk.s_check;
  }
  return w + std::exp(log_disc) * remainder;
}

double direct_w(const SplitTrace& trace) {
  double w = 0.0;
  double disc = 1.0;
  for (const auto& s : trace.steps) {
    w += disc * s.b;
    disc *= s.a;
  }
  return w;
}

std::vector<double> garch_block_recursion(std::span<const RegenBlock> blocks, double w0) {
  std::vector<double> z;
  z.reserve(blocks.size());
  double prev = w0;
  for (const auto& blk : blocks) {
    prev = blk.b_star_check + blk.a_check * prev;
    z.push_back(prev);
  }
  return z;
}

SplitCheckReport split_marginal_check(const ModelSpec& model, const MinorizationCert& cert, std::uint64_t horizon,
                                      std::size_t n_paths, Rng& rng, std::size_t n_regenerations) {
  const std::uint64_t master = rng();
  const ChainState x0 = default_state(model);
  std::vector<double> split_end(n_paths), plain_end(n_paths);
  std::vector<std::vector<double>> regen_states(n_paths);

  parallel_for(n_paths, [&](std::size_t i) {
    Rng split_rng = derive_stream(master, i, kSplitPaths);
    const SplitTrace trace = simulate_split_path(model, cert, x0, horizon, split_rng);
    split_end[i] = trace.steps.back().state[0];
    for (const auto& s : trace.steps) {
      if (s.regenerated && regen_states[i].size() < n_regenerations) regen_states[i].push_back(s.state[0]);
    }

    Rng plain_rng = derive_stream(master, i, kPlainPaths);
    std::vector<double> x = x0.x, y(model.dim, 0.0);
    for (std::uint64_t n = 0; n < horizon; ++n) {
      sample_next(model, x, plain_rng, y);
      x.swap(y);
    }
    plain_end[i] = x[0];
  });

  std::vector<double> regen;
  for (const auto& v : regen_states) {
    for (double s : v) {
      if (regen.size() == n_regenerations) break;
      regen.push_back(s);
    }
  }
  std::vector<double> direct(regen.size());
  Rng nu_rng = derive_stream(master, 0, kNuDraws);
  std::vector<double> y(model.dim, 0.0);
  for (double& d : direct) {
    cert.nu_sample(nu_rng, y);
    d = y[0];
  }

  SplitCheckReport report;
  report.n_regenerations = regen.size();
  report.finite = model.is_finite();
  if (report.finite) {
    const auto k = model.n_regimes();
    const auto counts = [k](const std::vector<double>& v) {
      std::vector<double> c(k, 0.0);
      for (double s : v) c[static_cast<std::size_t>(s)] += 1.0;
      return c;
    };
    report.horizon_test = chi_square_homogeneity(counts(split_end), counts(plain_end));
    report.regeneration_test = chi_square_homogeneity(counts(regen), counts(direct));
  } else {
    report.horizon_test = ks_two_sample(split_end, plain_end);
    report.regeneration_test = ks_two_sample(regen, direct);
  }
  return report;
}

void write_blocks(std::ostream& out, std::span<const RegenBlock> blocks) {
  const auto old = out.precision(17);
  for (const auto& b : blocks) {
    out << b.tau << '\t' << b.s_check << '\t' << b.b_check << '\t' << b.m_check << '\t' << b.b_star_check << '\n';
  }
  out.precision(old);
}

}  // namespace markov_ruin
