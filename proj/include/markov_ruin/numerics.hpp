#pragma once

// Shared numerical and statistical helpers: random streams, a deterministic
// parallel loop, Gaussian functions, quadrature, and the goodness-of-fit
// tests used by the diagnostics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace markov_ruin {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for item `index` of a computation identified by
/// `purpose`. Results never depend on how items are spread over threads.
Rng derive_stream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t purpose = 0);

/// Seed for a sub-computation, so nested routines can derive their own streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t purpose);

/// Worker count: explicit setting, else MARKOV_RUIN_THREADS, else 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n) on thread_count() workers. body must only
/// write to per-index storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

inline constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far in the tail.
double normal_sf(double x);
double normal_quantile(double p);
/// x such that normal_sf(x) = q.
double normal_isf(double q);

double log_sum_exp(std::span<const double> v);

/// Adaptive Gauss-Kronrod on [a, b] (infinite limits allowed). Throws
/// QuadratureFailure when the error estimate exceeds abs_tol + rel_tol*|I|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, double rel_tol = 1e-10);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanSe mean_and_se(std::span<const double> v);
/// Standard error of the mean from contiguous batch means.
MeanSe batch_means(std::span<const double> v, std::size_t n_batches = 32);

double sample_variance(std::span<const double> v);
/// Linear-interpolated empirical quantile of an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_sf(double lambda);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);
TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Chi-square test of homogeneity between two count vectors over the same
/// categories. Categories empty in both samples are dropped.
TestResult chi_square_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b);
/// Goodness of fit of observed counts against expected probabilities.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Weighted least squares y ~ intercept + slope*x (weights default to 1).
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w = {});

}  // namespace markov_ruin
