#pragma once

// Minorization certificates (a, delta_a, nu_a) for Nummelin splitting and
// the statistical check of delta_a nu_a(E) <= P(x, E).

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "markov_ruin/markov_models.hpp"
#include "markov_ruin/numerics.hpp"

namespace markov_ruin {

/// Regeneration law nu_a on the model's state space.
class NuLaw {
 public:
  virtual ~NuLaw() = default;
  virtual double density(std::span<const double> y) const = 0;
  virtual void sample(Rng& rng, std::span<double> y) const = 0;
};

enum class SmallSetKind {
  WholeSpace,          // every state
  FirstCoordinateAbs,  // |x[0]| <= a
  EuclideanBall,       // ||x|| <= a
};

struct MinorizationCert {
  double a_level = 1.0;
  double delta_a = 0.0;
  SmallSetKind small_set = SmallSetKind::WholeSpace;
  std::shared_ptr<const NuLaw> nu;
  /// supp nu_a lies in {h <= a_bound} and {|f| <= b_bound}; infinity when
  /// the corresponding coordinate is left untruncated.
  double a_bound = 0.0;
  double b_bound = 0.0;
  /// Per-coordinate bounding box of supp nu_a.
  std::vector<Interval> box;

  bool in_small_set(std::span<const double> x) const;
  double nu_density(std::span<const double> y) const { return nu->density(y); }
  void nu_sample(Rng& rng, std::span<double> y) const { nu->sample(rng, y); }
};

/// Mass fraction of nu_a discarded by truncation.
inline constexpr double kNuTailMass = 1e-6;

/// Certificate for X' = c X + sd * zeta on {|x| <= a}: nu_a proportional to
/// min over |x| <= a of the Normal(c x, sd^2) density, truncated to keep
/// 1 - kNuTailMass of its mass. delta_a comes from adaptive quadrature.
MinorizationCert minorize_ar1(double c, double a_level, double innovation_sd = 1.0);

/// Same construction for X' = intercept + c X + sd * zeta. When
/// trailing_std_normal is set, the state carries a second coordinate drawn
/// independently from Normal(0, 1) under both P and nu (SvMixed).
MinorizationCert minorize_gaussian_ar1(double c, double intercept, double innovation_sd, double a_level,
                                       bool trailing_std_normal);

/// Finite-state certificate: small set = whole space, delta = sum of
/// column minima of P, nu = normalized column minima times Normal(0, 1).
/// Throws Unsupported when every column has a zero entry.
MinorizationCert finite_state_cert(const ModelSpec& model);

/// Certificate for the p-step Gaussian kernel of an ArpBlock model on
/// {||x|| <= a}, using a radial lower bound in whitened coordinates.
MinorizationCert minorize_arp(const ModelSpec& model, double a_level);

/// Certificate the model ships with: finite kinds use finite_state_cert,
/// AR kinds the Gaussian constructions, SvMixed minorizes the log-volatility.
/// a_level defaults to 1 where it matters.
MinorizationCert default_cert(const ModelSpec& model, std::optional<double> a_level = std::nullopt);

/// Copy of cert with delta_a replaced, for experiments with the Bernoulli
/// mark (including deliberately invalid certificates).
MinorizationCert with_delta(MinorizationCert cert, double delta);

struct MinorizationReport {
  double worst_margin = 0.0;
  double slack = 0.0;
  std::vector<double> witness_x;
  Interval witness_set;  // interval in the coordinate being tested
  std::size_t witness_regime = 0;
  std::size_t n_states = 0;
  std::size_t n_sets = 0;
  bool passed = true;
};

/// Tests delta nu(E) <= P(x, E) + slack on sampled states of the small set
/// and interval sets E. Supported for Ar1LogReturn, ArpBlock with p = 1,
/// SvMixed (sets in the log-volatility coordinate) and finite kinds. P and
/// nu are evaluated exactly, so slack only covers rounding. Throws
/// MinorizationViolated with the witness in the message, or Unsupported.
MinorizationReport check_minorization(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_states,
                                      std::size_t n_sets, Rng& rng);

}  // namespace markov_ruin
