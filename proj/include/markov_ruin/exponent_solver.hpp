#pragma once

// Tail exponent by independent routes: closed-form cumulants, the Perron
// root of the tilted kernel (finite chains and a quadrature discretization
// for AR(1)), naive Monte Carlo, and cycle moments of regeneration blocks.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "markov_ruin/markov_models.hpp"
#include "markov_ruin/numerics.hpp"
#include "markov_ruin/regeneration.hpp"

namespace markov_ruin {

enum class CgfMethod { Analytic, Spectral, MonteCarlo, DiscretizedKernel, CycleMoment };

std::string_view to_string(CgfMethod method);

struct CgfValue {
  double value = 0.0;
  double std_error = 0.0;
};

using CgfFunction = std::function<CgfValue(double)>;

/// Lambda evaluated on a grid. Values are per chain step (p periods for
/// ArpBlock), which leaves every root unchanged.
struct CgfEstimate {
  std::vector<double> alpha_grid;
  std::vector<double> lambda_values;
  std::vector<double> std_errors;
  CgfMethod method = CgfMethod::Analytic;
  std::optional<double> truncation_m;
};

CgfEstimate tabulate_cgf(std::span<const double> alpha_grid, const CgfFunction& cgf, CgfMethod method,
                         std::optional<double> truncation_m = std::nullopt);

/// Discrete second differences >= -(n_se pooled std errors) - abs_tol.
bool is_convex(const CgfEstimate& est, double n_se = 2.0, double abs_tol = 1e-10);

struct TailSolution {
  double exponent = 0.0;
  CgfMethod method = CgfMethod::Analytic;
  Interval bracket;
  double residual = 0.0;
  double std_error = 0.0;
  Interval ci;  // 95%; degenerate for deterministic routes
  std::vector<std::string> flags;
};

bool has_analytic_cgf(const ModelSpec& model);
/// Closed-form Lambda for IidLogNormal, Ar1LogReturn, ArpBlock and Garch11
/// with b1 = 0. Throws Unsupported otherwise.
double cgf_analytic(const ModelSpec& model, double alpha);

/// E[A^alpha | regime j] for finite-state kinds.
double regime_moment(const ModelSpec& model, std::size_t regime, double alpha);

/// Log Perron root of a nonnegative matrix by power iteration. Throws
/// PowerIterationStall when it does not settle within max_iter.
double perron_log_root(const Eigen::MatrixXd& m, double tol = 1e-12, int max_iter = 100000);

/// Log Perron root of P(i, j) E[A^alpha | j]. Throws PowerIterationStall
/// for reducible or periodic transition matrices, Unsupported for
/// continuous chains.
double cgf_spectral(const ModelSpec& model, double alpha);

struct CgfMcResult {
  double value = 0.0;
  double std_error = 0.0;
  double ess_fraction = 1.0;
  /// Relative effective sample size below 1%: the estimate is unreliable.
  bool collapsed = false;
};

/// (1/n) log mean exp(alpha S_n) over stationary-start paths, with f
/// replaced by max(f, -M) when truncation_m is set. Std error by the delta
/// method on 32 batch means. Paths use streams derived from one draw of rng,
/// so repeated calls with equal rng state share random numbers across alpha.
CgfMcResult cgf_mc(const ModelSpec& model, double alpha, std::size_t n, std::size_t n_paths,
                   std::optional<double> truncation_m, Rng& rng);

/// Log Perron root of the trapezoid discretization of exp(alpha f(y)) p(x, y)
/// on [-L, L]. Recomputed at 1.25 L with proportionally more points; throws
/// TruncationDominance when the two differ by more than 1e-4.
double cgf_discretized_kernel(const ModelSpec& model, double alpha, double domain_half_width,
                              std::size_t grid_points);

struct SolveOptions {
  double epsilon = 1e-3;
  double max_alpha = 1e3;
  double tolerance = 1e-10;
  int max_iter = 200;
};

/// Positive root of a convex cgf by bisection. Deterministic cgfs are solved
/// to machine precision; stochastic ones stop at the noise floor and get a
/// std error from the local slope. Throws NoPositiveRoot, NoUpperBracket.
TailSolution solve_exponent(const CgfFunction& cgf, std::optional<Interval> bracket_hint = std::nullopt,
                            CgfMethod method = CgfMethod::Analytic, const SolveOptions& options = {});

struct EtaOptions {
  std::size_t bootstrap = 200;
  std::uint64_t seed = 0;
  double min_ess_fraction = 0.01;
};

/// Root of log mean(A_check^alpha) over the blocks, with a percentile
/// bootstrap CI. Throws NoPositiveRoot, NoUpperBracket,
/// EffectiveSampleCollapse (at bracket.hi).
TailSolution solve_eta_cycles(std::span<const RegenBlock> blocks, Interval alpha_bracket,
                              const EtaOptions& options = {});

}  // namespace markov_ruin
