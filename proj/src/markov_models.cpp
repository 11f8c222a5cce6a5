#include "markov_ruin/markov_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/minorization.hpp"

namespace markov_ruin {

namespace {

constexpr double kRowSumTol = 1e-12;
// E[log xi^2] for a standard normal xi: digamma(1/2) + log 2.
constexpr double kMeanLogChiSq1 = -1.2703628454614782;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidParameter, field, why);
}

std::size_t regime_of(double coordinate) { return static_cast<std::size_t>(coordinate); }

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, const std::string& field) {
  const auto k = rows.size();
  if (k == 0) invalid(field, "transition matrix is empty");
  Eigen::MatrixXd m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    if (rows[i].size() != k) invalid(field, "transition matrix must be square");
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = rows[i][j];
      if (!(p >= 0.0) || !std::isfinite(p)) invalid(field, "transition probabilities must be finite and >= 0");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      invalid(field, "row " + std::to_string(i) + " sums to " + std::to_string(sum) + ", not 1");
    }
  }
  return m;
}

std::vector<double> stationary_vector(const Eigen::MatrixXd& p) {
  const auto k = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
  return out;
}

void validate_loss(const LossSpec& loss, std::size_t n_regimes, bool finite) {
  switch (loss.kind) {
    case LossSpec::Kind::Normal:
      if (!(loss.sd >= 0.0)) invalid("loss.sd", "standard deviation must be >= 0");
      break;
    case LossSpec::Kind::ShiftedExponential:
      if (!(loss.rate > 0.0)) invalid("loss.rate", "rate must be > 0");
      break;
    case LossSpec::Kind::Constant:
    case LossSpec::Kind::StateAffine:
      break;
    case LossSpec::Kind::PerRegime:
      if (!finite) invalid("loss.kind", "per_regime losses need a finite-state model");
      if (loss.per_regime.size() != n_regimes) invalid("loss.per_regime", "one value per regime required");
      break;
  }
}

double draw_loss(const LossSpec& loss, double x0, std::size_t regime, Rng& rng) {
  switch (loss.kind) {
    case LossSpec::Kind::Normal:
      return loss.mean + loss.sd * std::normal_distribution<double>(0.0, 1.0)(rng);
    case LossSpec::Kind::ShiftedExponential:
      return std::exponential_distribution<double>(loss.rate)(rng) + loss.shift;
    case LossSpec::Kind::Constant:
      return loss.value;
    case LossSpec::Kind::StateAffine:
      return loss.intercept + loss.slope * x0;
    case LossSpec::Kind::PerRegime:
      return loss.per_regime[regime];
  }
  return 0.0;
}

Eigen::MatrixXd companion_of(std::span<const double> coeffs) {
  const auto p = static_cast<Eigen::Index>(coeffs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) a(0, j) = coeffs[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < p; ++i) a(i, i - 1) = 1.0;
  return a;
}

ModelSpec finite_lognormal(const ModelConfig& c, ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  m.dim = 2;
  if (kind == ModelKind::IidLogNormal) {
    if (!(c.sigma2 >= 0.0) || !std::isfinite(c.sigma2)) invalid("sigma2", "variance must be finite and >= 0");
    if (!std::isfinite(c.m)) invalid("m", "must be finite");
    m.transition = Eigen::MatrixXd::Ones(1, 1);
    m.regime_mu = {c.m};
    m.regime_sigma = {std::sqrt(c.sigma2)};
  } else {
    m.transition = to_matrix(c.transition, "transition");
    const auto k = static_cast<std::size_t>(m.transition.rows());
    if (c.regime_mu.size() != k) invalid("regime_mu", "one drift per regime required");
    if (c.regime_sigma.size() != k) invalid("regime_sigma", "one volatility per regime required");
    for (double s : c.regime_sigma) {
      if (!(s >= 0.0) || !std::isfinite(s)) invalid("regime_sigma", "volatility must be finite and >= 0");
    }
    m.regime_mu = c.regime_mu;
    m.regime_sigma = c.regime_sigma;
    m.ito_correction = c.ito_correction;
  }
  m.stationary = stationary_vector(m.transition);
  m.loss = c.loss;
  validate_loss(m.loss, m.n_regimes(), true);
  return m;
}

ModelSpec finite_garch(const ModelConfig& c, ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  m.dim = 2;
  if (kind == ModelKind::Garch11) {
    if (!c.transition.empty() && !(c.transition.size() == 1 && c.transition[0] == std::vector<double>{1.0})) {
      invalid("transition", "Garch11 has a single regime");
    }
    m.transition = Eigen::MatrixXd::Ones(1, 1);
  } else {
    m.transition = to_matrix(c.transition, "transition");
  }
  const auto k = m.n_regimes();
  if (c.a0.size() != k) invalid("a0", "one value per regime required");
  if (c.a1.size() != k) invalid("a1", "one value per regime required");
  if (c.b1.size() != k) invalid("b1", "one value per regime required");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(c.a0[i] > 0.0)) invalid("a0", "must be > 0");
    if (!(c.a1[i] > 0.0)) invalid("a1", "must be > 0");
    if (!(c.b1[i] >= 0.0)) invalid("b1", "must be >= 0");
    m.garch.push_back({c.a0[i], c.a1[i], c.b1[i]});
  }
  m.stationary = stationary_vector(m.transition);
  LossSpec loss;
  loss.kind = LossSpec::Kind::PerRegime;
  loss.per_regime = c.a0;
  m.loss = loss;
  return m;
}

ModelSpec ar1_model(const ModelConfig& c) {
  if (!(std::abs(c.c) < 1.0)) invalid("c", "stationarity requires |c| < 1");
  if (!(c.innovation_sd > 0.0)) invalid("innovation_sd", "must be > 0");
  if (!std::isfinite(c.mu)) invalid("mu", "must be finite");
  ModelSpec m;
  m.kind = ModelKind::Ar1LogReturn;
  m.dim = 1;
  m.ar_coeffs = {c.c};
  m.mu = c.mu;
  m.innovation_sd = c.innovation_sd;
  m.companion = Eigen::MatrixXd::Constant(1, 1, c.c);
  m.companion_power = m.companion;
  m.block_chol = Eigen::MatrixXd::Constant(1, 1, c.innovation_sd);
  m.stationary_chol = Eigen::MatrixXd::Constant(1, 1, c.innovation_sd / std::sqrt(1.0 - c.c * c.c));
  m.companion_radius = std::abs(c.c);
  m.loss = c.loss;
  validate_loss(m.loss, 0, false);
  return m;
}

ModelSpec sv_model(const ModelConfig& c) {
  if (!(std::abs(c.sv_coeff) < 1.0)) invalid("sv_coeff", "stationarity requires |sv_coeff| < 1");
  if (!(c.sv_sd > 0.0)) invalid("sv_sd", "must be > 0");
  if (!(c.bank_weight > 0.0 && c.bank_weight < 1.0)) invalid("bank_weight", "must lie in (0, 1)");
  if (!(c.bank_rate > -1.0)) invalid("bank_rate", "must be > -1");
  ModelSpec m;
  m.kind = ModelKind::SvMixed;
  m.dim = 2;
  m.sv_intercept = c.sv_intercept;
  m.sv_coeff = c.sv_coeff;
  m.sv_sd = c.sv_sd;
  m.bank_weight = c.bank_weight;
  m.bank_rate = c.bank_rate;
  m.loss = c.loss;
  validate_loss(m.loss, 0, false);
  return m;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::IidLogNormal: return "IidLogNormal";
    case ModelKind::RegimeSwitchLogNormal: return "RegimeSwitchLogNormal";
    case ModelKind::Ar1LogReturn: return "Ar1LogReturn";
    case ModelKind::ArpBlock: return "ArpBlock";
    case ModelKind::SvMixed: return "SvMixed";
    case ModelKind::Garch11: return "Garch11";
    case ModelKind::Garch11RegimeSwitch: return "Garch11RegimeSwitch";
  }
  return "IidLogNormal";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::IidLogNormal, ModelKind::RegimeSwitchLogNormal, ModelKind::Ar1LogReturn,
                 ModelKind::ArpBlock, ModelKind::SvMixed, ModelKind::Garch11,
                 ModelKind::Garch11RegimeSwitch}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::UnknownKind, "kind", "unsupported model kind '" + std::string(name) + "'");
}

std::string_view to_string(LossSpec::Kind kind) {
  switch (kind) {
    case LossSpec::Kind::Normal: return "normal";
    case LossSpec::Kind::ShiftedExponential: return "shifted_exponential";
    case LossSpec::Kind::Constant: return "constant";
    case LossSpec::Kind::StateAffine: return "state_affine";
    case LossSpec::Kind::PerRegime: return "per_regime";
  }
  return "normal";
}

LossSpec::Kind parse_loss_kind(std::string_view name) {
  for (auto k : {LossSpec::Kind::Normal, LossSpec::Kind::ShiftedExponential, LossSpec::Kind::Constant,
                 LossSpec::Kind::StateAffine, LossSpec::Kind::PerRegime}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidParameter, "loss.kind", "unknown loss family '" + std::string(name) + "'");
}

std::optional<double> LossSpec::independent_mean() const {
  switch (kind) {
    case Kind::Normal: return mean;
    case Kind::ShiftedExponential: return 1.0 / rate + shift;
    case Kind::Constant: return value;
    default: return std::nullopt;
  }
}

LossSpec LossSpec::scaled(double s) const {
  LossSpec out = *this;
  out.mean *= s;
  out.sd *= s;
  out.rate /= s;
  out.shift *= s;
  out.value *= s;
  out.intercept *= s;
  out.slope *= s;
  for (double& v : out.per_regime) v *= s;
  return out;
}

bool ModelSpec::is_finite() const {
  return kind == ModelKind::IidLogNormal || kind == ModelKind::RegimeSwitchLogNormal ||
         kind == ModelKind::Garch11 || kind == ModelKind::Garch11RegimeSwitch;
}

std::size_t ModelSpec::periods_per_step() const {
  return kind == ModelKind::ArpBlock ? ar_coeffs.size() : 1;
}

ModelSpec make_model(const ModelConfig& config) {
  const ModelKind kind = parse_model_kind(config.kind);
  switch (kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::RegimeSwitchLogNormal:
      return finite_lognormal(config, kind);
    case ModelKind::Garch11:
    case ModelKind::Garch11RegimeSwitch:
      return finite_garch(config, kind);
    case ModelKind::Ar1LogReturn:
      return ar1_model(config);
    case ModelKind::ArpBlock: {
      if (config.coeffs.empty()) invalid("coeffs", "at least one autoregressive coefficient required");
      if (!(config.innovation_sd > 0.0)) invalid("innovation_sd", "must be > 0");
      const double a = config.a_level.value_or(1.0);
      if (!(a > 0.0)) invalid("a_level", "must be > 0");
      validate_loss(config.loss, 0, false);
      return build_arp_block(config.coeffs, config.mu, config.innovation_sd, a, config.loss);
    }
    case ModelKind::SvMixed:
      return sv_model(config);
  }
  throw Error(ErrorCode::UnknownKind, "kind", "unsupported model kind");
}

double companion_spectral_radius(std::span<const double> coeffs) {
  const Eigen::MatrixXd a = companion_of(coeffs);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

ModelSpec build_arp_block(std::span<const double> coeffs, double mu, double innovation_sd, double a_level,
                          LossSpec loss) {
  if (coeffs.empty()) invalid("coeffs", "at least one autoregressive coefficient required");
  const double radius = companion_spectral_radius(coeffs);
  if (!(radius < 1.0)) {
    throw Error(ErrorCode::NonStationary, "coeffs",
                "companion spectral radius " + std::to_string(radius) + " is not below 1");
  }
  const auto p = static_cast<Eigen::Index>(coeffs.size());
  ModelSpec m;
  m.kind = ModelKind::ArpBlock;
  m.dim = coeffs.size();
  m.ar_coeffs.assign(coeffs.begin(), coeffs.end());
  m.mu = mu;
  m.innovation_sd = innovation_sd;
  m.companion = companion_of(coeffs);
  m.companion_radius = radius;
  m.loss = std::move(loss);

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
  q(0, 0) = innovation_sd * innovation_sd;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    cov += power * q * power.transpose();
    power = m.companion * power;
  }
  m.companion_power = power;
  m.block_chol = cov.llt().matrixL();

  // vec(G) = (I - A (x) A)^{-1} vec(Q) for the stationary covariance G.
  const Eigen::Index pp = p * p;
  Eigen::MatrixXd kron(pp, pp);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) kron.block(i * p, j * p, p, p) = m.companion(i, j) * m.companion;
  const Eigen::VectorXd vec_q = Eigen::Map<const Eigen::VectorXd>(q.data(), pp);
  const Eigen::VectorXd vec_g = (Eigen::MatrixXd::Identity(pp, pp) - kron).fullPivLu().solve(vec_q);
  Eigen::MatrixXd gamma = Eigen::Map<const Eigen::MatrixXd>(vec_g.data(), p, p);
  gamma = 0.5 * (gamma + gamma.transpose());
  m.stationary_chol = gamma.llt().matrixL();

  m.attached_cert = std::make_shared<const MinorizationCert>(minorize_arp(m, a_level));
  return m;
}

double log_discount(const ModelSpec& model, std::span<const double> x) {
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::RegimeSwitchLogNormal: {
      const std::size_t k = regime_of(x[0]);
      const double s = model.regime_sigma[k];
      const double drift = model.ito_correction ? model.regime_mu[k] - 0.5 * s * s : model.regime_mu[k];
      return -drift - s * x[1];
    }
    case ModelKind::Garch11:
    case ModelKind::Garch11RegimeSwitch: {
      const auto& g = model.garch[regime_of(x[0])];
      return std::log(g.b1 + g.a1 * x[1] * x[1]);
    }
    case ModelKind::Ar1LogReturn:
      return x[0] - model.mu;
    case ModelKind::ArpBlock: {
      double s = 0.0;
      for (double v : x) s += v - model.mu;
      return s;
    }
    case ModelKind::SvMixed: {
      const double r_star = std::exp(x[0]) * x[1];
      const double bank = std::log(model.bank_weight * (1.0 + model.bank_rate));
      const double stock = std::log1p(-model.bank_weight) + r_star;
      const double hi = std::max(bank, stock);
      return -(hi + std::log1p(std::exp(std::min(bank, stock) - hi)));
    }
  }
  return 0.0;
}

double level_h(const ModelSpec& model, std::span<const double> x) {
  switch (model.kind) {
    case ModelKind::Ar1LogReturn:
      return std::abs(log_discount(model, x));
    case ModelKind::ArpBlock:
    case ModelKind::SvMixed: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::sqrt(s);
    }
    default:
      return 1.0;
  }
}

ChainState default_state(const ModelSpec& model) {
  ChainState s;
  s.x.assign(model.dim, 0.0);
  return s;
}

ChainState stationary_state(const ModelSpec& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ChainState s;
  s.x.assign(model.dim, 0.0);
  if (model.is_finite()) {
    std::discrete_distribution<std::size_t> regime(model.stationary.begin(), model.stationary.end());
    s.x[0] = static_cast<double>(regime(rng));
    s.x[1] = normal(rng);
    return s;
  }
  switch (model.kind) {
    case ModelKind::Ar1LogReturn:
    case ModelKind::ArpBlock: {
      Eigen::VectorXd z(static_cast<Eigen::Index>(model.dim));
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
      const Eigen::VectorXd v = model.stationary_chol * z;
      for (Eigen::Index i = 0; i < z.size(); ++i) s.x[static_cast<std::size_t>(i)] = v(i);
      break;
    }
    case ModelKind::SvMixed: {
      const double mean = model.sv_intercept / (1.0 - model.sv_coeff);
      const double sd = model.sv_sd / std::sqrt(1.0 - model.sv_coeff * model.sv_coeff);
      s.x[0] = mean + sd * normal(rng);
      s.x[1] = normal(rng);
      break;
    }
    default:
      break;
  }
  return s;
}

void sample_next(const ModelSpec& model, std::span<const double> x, Rng& rng, std::span<double> y) {
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::Garch11:
      y[0] = 0.0;
      y[1] = normal(rng);
      return;
    case ModelKind::RegimeSwitchLogNormal:
    case ModelKind::Garch11RegimeSwitch: {
      const auto k = static_cast<Eigen::Index>(regime_of(x[0]));
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      double acc = 0.0;
      Eigen::Index next = model.transition.cols() - 1;
      for (Eigen::Index j = 0; j < model.transition.cols(); ++j) {
        acc += model.transition(k, j);
        if (u < acc) {
          next = j;
          break;
        }
      }
      y[0] = static_cast<double>(next);
      y[1] = normal(rng);
      return;
    }
    case ModelKind::Ar1LogReturn:
      y[0] = model.ar_coeffs[0] * x[0] + model.innovation_sd * normal(rng);
      return;
    case ModelKind::ArpBlock: {
      const std::size_t p = model.ar_coeffs.size();
      // Stacked layout (X_n, X_{n-1}, ..., X_{n-p+1}); advance p periods.
      std::copy(x.begin(), x.end(), y.begin());
      for (std::size_t step = 0; step < p; ++step) {
        double next = model.innovation_sd * normal(rng);
        for (std::size_t i = 0; i < p; ++i) next += model.ar_coeffs[i] * y[i];
        for (std::size_t i = p - 1; i > 0; --i) y[i] = y[i - 1];
        y[0] = next;
      }
      return;
    }
    case ModelKind::SvMixed:
      y[0] = model.sv_intercept + model.sv_coeff * x[0] + model.sv_sd * normal(rng);
      y[1] = normal(rng);
      return;
  }
}

double transition_density(const ModelSpec& model, std::span<const double> x, std::span<const double> y) {
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::Garch11:
    case ModelKind::RegimeSwitchLogNormal:
    case ModelKind::Garch11RegimeSwitch: {
      const auto i = static_cast<Eigen::Index>(regime_of(x[0]));
      const auto j = static_cast<Eigen::Index>(regime_of(y[0]));
      if (j < 0 || j >= model.transition.cols()) return 0.0;
      return model.transition(i, j) * normal_pdf(y[1]);
    }
    case ModelKind::Ar1LogReturn: {
      const double sd = model.innovation_sd;
      return normal_pdf((y[0] - model.ar_coeffs[0] * x[0]) / sd) / sd;
    }
    case ModelKind::ArpBlock: {
      const auto p = static_cast<Eigen::Index>(model.dim);
      const Eigen::Map<const Eigen::VectorXd> xv(x.data(), p);
      const Eigen::Map<const Eigen::VectorXd> yv(y.data(), p);
      const Eigen::VectorXd resid = yv - model.companion_power * xv;
      const Eigen::VectorXd z = model.block_chol.triangularView<Eigen::Lower>().solve(resid);
      const double log_det = model.block_chol.diagonal().array().log().sum();
      return std::exp(-0.5 * z.squaredNorm() - 0.5 * static_cast<double>(p) * std::log(2.0 * kPi) - log_det);
    }
    case ModelKind::SvMixed: {
      const double mean = model.sv_intercept + model.sv_coeff * x[0];
      return normal_pdf((y[0] - mean) / model.sv_sd) / model.sv_sd * normal_pdf(y[1]);
    }
  }
  return 0.0;
}

StepValues emit(const ModelSpec& model, std::span<const double> y, Rng& rng) {
  StepValues out;
  if (model.kind == ModelKind::ArpBlock) {
    // Chronological order within the block is y[p-1], ..., y[0].
    double log_disc = 0.0;
    for (std::size_t j = y.size(); j-- > 0;) {
      out.b += std::exp(log_disc) * draw_loss(model.loss, y[j], 0, rng);
      log_disc += y[j] - model.mu;
    }
    out.log_a = log_disc;
    return out;
  }
  out.log_a = log_discount(model, y);
  const std::size_t regime = model.is_finite() ? regime_of(y[0]) : 0;
  out.b = draw_loss(model.loss, y[0], regime, rng);
  return out;
}

Transition step_chain(const ModelSpec& model, const ChainState& state, Rng& rng) {
  if (state.x.size() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "state",
                "state has dimension " + std::to_string(state.x.size()) + ", model expects " +
                    std::to_string(model.dim));
  }
  Transition t;
  t.next.x.assign(model.dim, 0.0);
  t.next.step_index = state.step_index + 1;
  sample_next(model, state.x, rng, t.next.x);
  const StepValues v = emit(model, t.next.x, rng);
  t.log_a = v.log_a;
  t.a = std::exp(v.log_a);
  t.b = v.b;
  return t;
}

std::optional<double> stationary_mean_log_discount(const ModelSpec& model) {
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::RegimeSwitchLogNormal: {
      double s = 0.0;
      for (std::size_t k = 0; k < model.n_regimes(); ++k) {
        const double sig = model.regime_sigma[k];
        const double drift = model.ito_correction ? model.regime_mu[k] - 0.5 * sig * sig : model.regime_mu[k];
        s -= model.stationary[k] * drift;
      }
      return s;
    }
    case ModelKind::Garch11:
    case ModelKind::Garch11RegimeSwitch: {
      double s = 0.0;
      for (std::size_t k = 0; k < model.n_regimes(); ++k) {
        const auto& g = model.garch[k];
        double e = 0.0;
        if (g.b1 == 0.0) {
          e = std::log(g.a1) + kMeanLogChiSq1;
        } else {
          e = 2.0 * integrate([&](double z) { return std::log(g.b1 + g.a1 * z * z) * normal_pdf(z); }, 0.0,
                              std::numeric_limits<double>::infinity(), 1e-10, 1e-10);
        }
        s += model.stationary[k] * e;
      }
      return s;
    }
    case ModelKind::Ar1LogReturn:
      return -model.mu;
    case ModelKind::ArpBlock:
      return -model.mu * static_cast<double>(model.ar_coeffs.size());
    case ModelKind::SvMixed:
      return std::nullopt;
  }
  return std::nullopt;
}

ModelSpec with_loss_scaled(const ModelSpec& model, double s) {
  if (!(s > 0.0)) invalid("scale", "loss scale must be > 0");
  ModelSpec out = model;
  out.loss = model.loss.scaled(s);
  for (auto& g : out.garch) g.a0 *= s;
  return out;
}

}  // namespace markov_ruin
