#pragma once

// Markov-modulated (A_n, B_n) environments.
//
// Every model is a Markov chain X_n on a state space of fixed dimension,
// with discount A_n = exp(f(X_n)) and loss B_n either drawn independently
// of the chain or computed as B_n = G(X_n). Finite-state kinds carry the
// regime index in coordinate 0 and the per-step Gaussian innovation that
// drives A_n in coordinate 1, so (regime, innovation) is itself Markov and
// f stays deterministic.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "markov_ruin/numerics.hpp"

namespace markov_ruin {

enum class ModelKind {
  IidLogNormal,
  RegimeSwitchLogNormal,
  Ar1LogReturn,
  ArpBlock,
  SvMixed,
  Garch11,
  Garch11RegimeSwitch,
};

std::string_view to_string(ModelKind kind);
/// Throws UnknownKind.
ModelKind parse_model_kind(std::string_view name);

struct LossSpec {
  enum class Kind {
    Normal,              // B ~ Normal(mean, sd^2)
    ShiftedExponential,  // B = E/rate + shift, E ~ Exp(1)
    Constant,            // B = value
    StateAffine,         // B = intercept + slope * x[0]
    PerRegime,           // B = per_regime[regime]
  };
  Kind kind = Kind::Normal;
  double mean = 0.0;
  double sd = 1.0;
  double rate = 1.0;
  double shift = 0.0;
  double value = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> per_regime;

  bool operator==(const LossSpec&) const = default;
  bool depends_on_state() const { return kind == Kind::StateAffine || kind == Kind::PerRegime; }
  /// Analytic E[B] for the independent families.
  std::optional<double> independent_mean() const;
  LossSpec scaled(double s) const;
};

std::string_view to_string(LossSpec::Kind kind);
LossSpec::Kind parse_loss_kind(std::string_view name);

/// Structured parameter record consumed by make_model. Fields not used by
/// the selected kind stay at their defaults.
struct ModelConfig {
  std::string kind;
  // IidLogNormal: log A ~ Normal(-m, sigma2)
  double m = 0.0;
  double sigma2 = 0.0;
  // finite-state kinds
  std::vector<std::vector<double>> transition;
  std::vector<double> regime_mu;
  std::vector<double> regime_sigma;
  bool ito_correction = false;
  // Ar1LogReturn (c) and ArpBlock (coeffs): log A = X - mu
  double c = 0.0;
  std::vector<double> coeffs;
  double mu = 0.0;
  double innovation_sd = 1.0;
  // SvMixed: log sigma_n = sv_intercept + sv_coeff log sigma_{n-1} + sv_sd zeta,
  // A = (bank_weight (1 + bank_rate) + (1 - bank_weight) e^{sigma xi})^{-1}
  double sv_intercept = 0.0;
  double sv_coeff = 0.0;
  double sv_sd = 1.0;
  double bank_weight = 0.5;
  double bank_rate = 0.0;
  // GARCH kinds, one entry per regime
  std::vector<double> a0;
  std::vector<double> a1;
  std::vector<double> b1;
  // small-set level for kinds whose certificate is built with the model
  std::optional<double> a_level;
  LossSpec loss;

  bool operator==(const ModelConfig&) const = default;
};

struct GarchParams {
  double a0 = 0.0;
  double a1 = 0.0;
  double b1 = 0.0;
};

struct MinorizationCert;

struct ModelSpec {
  ModelKind kind = ModelKind::IidLogNormal;
  std::size_t dim = 2;

  // finite-state kinds (IidLogNormal is the one-regime case)
  Eigen::MatrixXd transition;
  std::vector<double> stationary;
  std::vector<double> regime_mu;
  std::vector<double> regime_sigma;
  bool ito_correction = false;
  std::vector<GarchParams> garch;

  // AR kinds
  std::vector<double> ar_coeffs;
  double mu = 0.0;
  double innovation_sd = 1.0;
  Eigen::MatrixXd companion;        // p x p
  Eigen::MatrixXd companion_power;  // companion^p (block transition mean map)
  Eigen::MatrixXd block_chol;       // lower Cholesky factor of the p-step noise covariance
  Eigen::MatrixXd stationary_chol;  // Cholesky factor of the stationary covariance
  double companion_radius = 0.0;

  // SvMixed
  double sv_intercept = 0.0;
  double sv_coeff = 0.0;
  double sv_sd = 1.0;
  double bank_weight = 0.5;
  double bank_rate = 0.0;

  LossSpec loss;
  /// Certificate constructed together with the model (ArpBlock).
  std::shared_ptr<const MinorizationCert> attached_cert;

  bool is_finite() const;
  std::size_t n_regimes() const { return static_cast<std::size_t>(transition.rows()); }
  /// Underlying periods advanced by one chain step (p for ArpBlock, else 1).
  std::size_t periods_per_step() const;
};

struct ChainState {
  std::vector<double> x;
  std::uint64_t step_index = 0;
};

struct Transition {
  ChainState next;
  double a = 1.0;
  double log_a = 0.0;
  double b = 0.0;
};

/// Discount and loss attached to entering a state.
struct StepValues {
  double log_a = 0.0;
  double b = 0.0;
};

/// Validates the record and builds the model. Throws UnknownKind or
/// InvalidParameter naming the offending field.
ModelSpec make_model(const ModelConfig& config);

/// Block chain of an AR(p) log-return process: one step advances p periods,
/// with per-block discount and loss, h(x) = ||x||, and a certificate for the
/// p-step Gaussian kernel attached. Throws NonStationary.
ModelSpec build_arp_block(std::span<const double> coeffs, double mu, double innovation_sd,
                          double a_level = 1.0, LossSpec loss = {});

/// Spectral radius of the AR companion matrix.
double companion_spectral_radius(std::span<const double> coeffs);

/// f(x) = log A for a chain state.
double log_discount(const ModelSpec& model, std::span<const double> x);
/// Level function h used for the small sets.
double level_h(const ModelSpec& model, std::span<const double> x);

ChainState default_state(const ModelSpec& model);
ChainState stationary_state(const ModelSpec& model, Rng& rng);

/// Draws y ~ P(x, .).
void sample_next(const ModelSpec& model, std::span<const double> x, Rng& rng, std::span<double> y);
/// Density of P(x, dy) with respect to counting measure on regimes times
/// Lebesgue measure on the continuous coordinates.
double transition_density(const ModelSpec& model, std::span<const double> x, std::span<const double> y);
/// Discount and loss for the period(s) ending in state y.
StepValues emit(const ModelSpec& model, std::span<const double> y, Rng& rng);

/// One Markov transition with its (a_n, b_n). Throws DimensionMismatch.
Transition step_chain(const ModelSpec& model, const ChainState& state, Rng& rng);

/// E_pi[log A_1] per chain step, when available in closed form or by
/// quadrature; nullopt for SvMixed.
std::optional<double> stationary_mean_log_discount(const ModelSpec& model);

/// Copy of the model with every B_n multiplied by s > 0.
ModelSpec with_loss_scaled(const ModelSpec& model, double s);

}  // namespace markov_ruin
