#pragma once

// Monte Carlo for ruin probabilities, perpetuities and GARCH stationary
// laws, with power-law fitting, the Hill estimator and the Goldie constant.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markov_ruin/markov_models.hpp"
#include "markov_ruin/minorization.hpp"
#include "markov_ruin/numerics.hpp"
#include "markov_ruin/regeneration.hpp"

namespace markov_ruin {

/// Paths stop once the discount product A_1 ... A_n drops below this.
inline constexpr double kDiscountFloor = 1e-16;
/// HorizonSuspect threshold on the fraction of paths still improving late.
inline constexpr double kLateFractionLimit = 1e-3;

struct Increment {
  double a = 1.0;
  double b = 0.0;
};

struct WSupResult {
  double w_sup = 0.0;
  double w_final = 0.0;
  std::uint64_t last_improvement = 0;  // step of the last material rise of the running max
  std::uint64_t steps = 0;
};

/// Runs W_n = W_{n-1} + (A_1 ... A_{n-1}) B_n for n = 1..horizon with
/// increments from next(), stopping early once the discount is negligible.
template <class Next>
WSupResult w_sup_from(Next&& next, std::uint64_t horizon) {
  WSupResult r;
  r.w_sup = -std::numeric_limits<double>::infinity();
  double w = 0.0;
  double disc = 1.0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const Increment inc = next();
    w += disc * inc.b;
    r.steps = n;
    if (w > r.w_sup) {
      if (w > r.w_sup + 1e-9 * (1.0 + std::abs(r.w_sup))) r.last_improvement = n;
      r.w_sup = w;
    }
    disc *= inc.a;
    if (disc < kDiscountFloor) break;
  }
  r.w_final = w;
  return r;
}

/// Iterates W_n until the discount falls below tol (1 + |W_n|). Returns
/// nullopt when max_steps pass first.
template <class Next>
std::optional<double> perpetuity_from(Next&& next, double tol, std::uint64_t max_steps) {
  double w = 0.0;
  double disc = 1.0;
  for (std::uint64_t n = 0; n < max_steps; ++n) {
    const Increment inc = next();
    w += disc * inc.b;
    disc *= inc.a;
    if (disc < tol * (1.0 + std::abs(w))) return w;
  }
  return std::nullopt;
}

/// Supremum and final value of W_n over one path. x0 defaults to a draw
/// from the stationary law.
WSupResult simulate_w_sup(const ModelSpec& model, std::uint64_t horizon, Rng& rng,
                          const std::optional<ChainState>& x0 = std::nullopt);

enum class TailKind { RuinSup, Perpetuity, GarchStationary };
std::string_view to_string(TailKind kind);

struct TailSampleSet {
  std::vector<double> samples;
  TailKind kind = TailKind::RuinSup;
  std::uint64_t horizon = 0;     // RuinSup horizon or GARCH burn-in
  double truncation_tol = 0.0;   // Perpetuity stopping tolerance
  std::size_t late_paths = 0;    // RuinSup paths whose max rose in the last 10% of the horizon
};

/// n_paths independent suprema on streams derived from seed.
TailSampleSet sample_w_sup(const ModelSpec& model, std::size_t n_paths, std::uint64_t horizon, std::uint64_t seed,
                           const std::optional<ChainState>& x0 = std::nullopt);

/// Suprema W^R with a forced regeneration at time 1 (X_1 ~ nu).
TailSampleSet sample_w_regenerative(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_paths,
                                    std::uint64_t horizon, std::uint64_t seed);

struct RuinCurve {
  std::vector<double> u_grid;
  std::vector<double> psi_hat;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::size_t n_paths = 0;
  std::uint64_t horizon = 0;
  std::optional<double> exponent_used;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double fitted_log_c = std::numeric_limits<double>::quiet_NaN();
  double late_fraction = 0.0;
  std::vector<std::string> flags;
};

/// Psi_hat(u) = fraction of samples above u with Wilson intervals.
RuinCurve curve_from_samples(const TailSampleSet& set, std::span<const double> u_grid);

/// Simulates one shared path set and evaluates the whole grid on it. Flags
/// HorizonSuspect when at least 0.1% of paths were still rising in the last
/// 10% of the horizon.
RuinCurve estimate_ruin_curve(const ModelSpec& model, std::span<const double> u_grid, std::size_t n_paths,
                              std::uint64_t horizon, Rng& rng);

/// Log-spaced grid between two empirical quantiles of the samples.
std::vector<double> quantile_window_grid(std::span<const double> samples, double q_lo, double q_hi,
                                         std::size_t points);

struct PowerFit {
  double slope = 0.0;
  double log_c = 0.0;
  double flatness = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_points = 0;
};

/// Weighted least squares of log psi on log u over grid points with
/// psi_hat > 10 / n_paths. With an exponent, log_c is the weighted mean of
/// log(u^r psi) and flatness the largest relative deviation of u^r psi from
/// its weighted mean. Throws TooFewEvents with fewer than 5 usable points.
PowerFit fit_power_tail(const RuinCurve& curve, std::optional<double> exponent = std::nullopt);

/// RuinCurve CSV with header u,psi_hat,ci_lo,ci_hi,u_pow_r_psi.
void write_ruin_curve_csv(std::ostream& out, const RuinCurve& curve);
/// One sample per line.
void write_samples(std::ostream& out, std::span<const double> samples);
/// Decimal notation with the given number of significant digits.
std::string format_significant(double v, int digits = 10);

/// One draw of W_infinity. Throws NonContracting when the drift probe finds
/// E_pi[log A] >= 0 or the discount fails to shrink within max_steps.
double simulate_perpetuity(const ModelSpec& model, double tol, Rng& rng,
                           const std::optional<ChainState>& x0 = std::nullopt,
                           std::uint64_t max_steps = 10'000'000);

TailSampleSet sample_perpetuities(const ModelSpec& model, std::size_t n, double tol, std::uint64_t seed);

/// sigma^2 after burn_in steps of W*_n = A_n W*_{n-1} + B_n from
/// a0 / (1 - b1 - a1) (a0 when that is not positive). Throws NonContracting.
double simulate_garch_stationary(const ModelSpec& model, std::uint64_t burn_in, Rng& rng);

TailSampleSet sample_garch_stationary(const ModelSpec& model, std::size_t n, std::uint64_t burn_in,
                                      std::uint64_t seed);

struct HillResult {
  double index = 0.0;
  Interval ci;
  std::size_t k = 0;
};

/// Reciprocal mean log-spacing over the top k order statistics, CI
/// index (1 +- 1.96 / sqrt k). Throws InsufficientTail.
HillResult hill_estimator(std::span<const double> samples, std::size_t k);

struct GoldieOptions {
  std::size_t bootstrap = 200;
  std::uint64_t seed = 0;
};

struct GoldieResult {
  double d_hat = 0.0;
  double std_error = 0.0;
  Interval ci;
  double m_check = 0.0;
  double m_check_se = 0.0;
  bool positive = false;
};

/// Plug-in Goldie constant pairing block i with wr_samples[i]. Throws
/// DegenerateMcheck when E[A^eta log A] is not more than two std errors
/// above zero.
GoldieResult estimate_goldie_constant(std::span<const RegenBlock> blocks, std::span<const double> wr_samples,
                                      double eta, const GoldieOptions& options = {});

/// E[A_check_0^r] over initial blocks started from stationary draws.
MeanSe initial_block_moment(const ModelSpec& model, const MinorizationCert& cert, double r, std::size_t n,
                            std::uint64_t seed);

}  // namespace markov_ruin
