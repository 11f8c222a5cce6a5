#include "markov_ruin/minorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCheckSlack = 1e-9;

// nu proportional to phi_sd(|y - centre| + shift) on |y - centre| <= half_width,
// optionally times an independent Normal(0, 1) second coordinate.
class FoldedGaussianNu final : public NuLaw {
 public:
  FoldedGaussianNu(double centre, double shift, double sd, double half_width, double mass, bool trailing)
      : centre_(centre), shift_(shift), sd_(sd), half_width_(half_width), mass_(mass), trailing_(trailing) {
    full_mass_ = 2.0 * normal_sf(shift_ / sd_);
    tail_lo_ = normal_sf(shift_ / sd_);
    tail_hi_ = normal_sf((shift_ + half_width_) / sd_);
  }

  double lower_envelope(double y) const {
    const double u = std::abs(y - centre_);
    if (u > half_width_) return 0.0;
    return normal_pdf((u + shift_) / sd_) / sd_;
  }

  double density(std::span<const double> y) const override {
    double d = lower_envelope(y[0]) / mass_;
    if (trailing_) d *= normal_pdf(y[1]);
    return d;
  }

  void sample(Rng& rng, std::span<double> y) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (full_mass_ >= 0.05) {
      // Rejection against the equal mixture of the two extreme kernels.
      for (;;) {
        const double sign = unif(rng) < 0.5 ? 1.0 : -1.0;
        const double v = centre_ + sign * shift_ + sd_ * normal(rng);
        const double mix = 0.5 * (normal_pdf((v - centre_ - shift_) / sd_) +
                                  normal_pdf((v - centre_ + shift_) / sd_)) / sd_;
        if (unif(rng) * mix <= lower_envelope(v)) {
          y[0] = v;
          break;
        }
      }
    } else {
      // Inverse CDF of the folded, truncated normal; rejection would stall.
      const double q = tail_lo_ - unif(rng) * (tail_lo_ - tail_hi_);
      const double v = std::clamp(sd_ * normal_isf(q) - shift_, 0.0, half_width_);
      y[0] = centre_ + (unif(rng) < 0.5 ? v : -v);
    }
    if (trailing_) y[1] = normal(rng);
  }

 private:
  double centre_, shift_, sd_, half_width_, mass_;
  bool trailing_;
  double full_mass_ = 0.0, tail_lo_ = 0.0, tail_hi_ = 0.0;
};

class FiniteNu final : public NuLaw {
 public:
  explicit FiniteNu(std::vector<double> probs) : probs_(std::move(probs)) {}

  double density(std::span<const double> y) const override {
    const auto k = static_cast<std::size_t>(y[0]);
    if (y[0] < 0.0 || k >= probs_.size()) return 0.0;
    return probs_[k] * normal_pdf(y[1]);
  }

  void sample(Rng& rng, std::span<double> y) const override {
    std::discrete_distribution<std::size_t> pick(probs_.begin(), probs_.end());
    y[0] = static_cast<double>(pick(rng));
    y[1] = std::normal_distribution<double>(0.0, 1.0)(rng);
  }

  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// nu with density phi_p(||L^{-1} y|| + r) / (det L * mass) on ||L^{-1} y|| <= radius.
class RadialNu final : public NuLaw {
 public:
  RadialNu(Eigen::MatrixXd chol, double r, double radius, double mass)
      : chol_(std::move(chol)), r_(r), radius_(radius), mass_(mass) {
    const auto p = static_cast<double>(chol_.rows());
    log_norm_ = -0.5 * p * std::log(2.0 * kPi) - chol_.diagonal().array().log().sum() - std::log(mass_);
  }

  double density(std::span<const double> y) const override {
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), chol_.rows());
    const double rho = chol_.triangularView<Eigen::Lower>().solve(yv).norm();
    if (rho > radius_) return 0.0;
    return std::exp(log_norm_ - 0.5 * (rho + r_) * (rho + r_));
  }

  void sample(Rng& rng, std::span<double> y) const override {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd g(chol_.rows());
    for (;;) {
      for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(rng);
      const double rho = g.norm();
      if (rho <= radius_ && unif(rng) < std::exp(-r_ * rho)) break;
    }
    const Eigen::VectorXd v = chol_ * g;
    for (Eigen::Index i = 0; i < v.size(); ++i) y[static_cast<std::size_t>(i)] = v(i);
  }

 private:
  Eigen::MatrixXd chol_;
  double r_, radius_, mass_;
  double log_norm_ = 0.0;
};

void require_level(double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidParameter, "a_level", "small-set level must be > 0");
}

}  // namespace

bool MinorizationCert::in_small_set(std::span<const double> x) const {
  switch (small_set) {
    case SmallSetKind::WholeSpace:
      return true;
    case SmallSetKind::FirstCoordinateAbs:
      return std::abs(x[0]) <= a_level;
    case SmallSetKind::EuclideanBall: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s <= a_level * a_level;
    }
  }
  return false;
}

MinorizationCert minorize_gaussian_ar1(double c, double intercept, double innovation_sd, double a_level,
                                       bool trailing_std_normal) {
  require_level(a_level);
  if (!(innovation_sd > 0.0)) throw Error(ErrorCode::InvalidParameter, "innovation_sd", "must be > 0");
  const double shift = std::abs(c) * a_level;
  const double sd = innovation_sd;
  const double half_width = sd * normal_isf(kNuTailMass * normal_sf(shift / sd)) - shift;
  // The envelope is symmetric about the intercept; integrate one side.
  const double delta = 2.0 * integrate([&](double u) { return normal_pdf((u + shift) / sd) / sd; }, 0.0,
                                       half_width, 1e-10, 1e-10);

  MinorizationCert cert;
  cert.a_level = a_level;
  cert.delta_a = delta;
  cert.small_set = SmallSetKind::FirstCoordinateAbs;
  cert.nu = std::make_shared<FoldedGaussianNu>(intercept, shift, sd, half_width, delta, trailing_std_normal);
  cert.box = {{intercept - half_width, intercept + half_width}};
  if (trailing_std_normal) cert.box.push_back({-kInf, kInf});
  cert.a_bound = std::abs(intercept) + half_width;
  cert.b_bound = trailing_std_normal ? kInf : std::abs(intercept) + half_width;
  return cert;
}

MinorizationCert minorize_ar1(double c, double a_level, double innovation_sd) {
  if (!(std::abs(c) < 1.0)) throw Error(ErrorCode::InvalidParameter, "c", "stationarity requires |c| < 1");
  return minorize_gaussian_ar1(c, 0.0, innovation_sd, a_level, false);
}

MinorizationCert finite_state_cert(const ModelSpec& model) {
  if (!model.is_finite()) throw Error(ErrorCode::Unsupported, "kind", "finite-state certificate needs a finite chain");
  const auto& p = model.transition;
  std::vector<double> mins(static_cast<std::size_t>(p.cols()));
  double delta = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    mins[static_cast<std::size_t>(j)] = p.col(j).minCoeff();
    delta += mins[static_cast<std::size_t>(j)];
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::Unsupported, "transition", "every column has a zero entry; no one-step minorization");
  }
  for (double& m : mins) m /= delta;

  MinorizationCert cert;
  cert.a_level = kInf;
  cert.delta_a = std::min(delta, 1.0);
  cert.small_set = SmallSetKind::WholeSpace;
  cert.nu = std::make_shared<FiniteNu>(std::move(mins));
  cert.box = {{0.0, static_cast<double>(p.cols() - 1)}, {-kInf, kInf}};
  cert.a_bound = 1.0;
  cert.b_bound = kInf;
  return cert;
}

MinorizationCert minorize_arp(const ModelSpec& model, double a_level) {
  require_level(a_level);
  if (model.kind != ModelKind::ArpBlock) throw Error(ErrorCode::Unsupported, "kind", "needs an ArpBlock model");
  const auto p = static_cast<Eigen::Index>(model.dim);
  const Eigen::MatrixXd& l = model.block_chol;
  const Eigen::MatrixXd whitened = l.triangularView<Eigen::Lower>().solve(model.companion_power);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened);
  const double r = a_level * svd.singularValues()(0);

  const double pd = static_cast<double>(p);
  const auto radial = [&](double rho) {
    return std::pow(rho, pd - 1.0) * std::exp(-0.5 * (rho + r) * (rho + r));
  };
  const double surface = 2.0 * std::pow(kPi, 0.5 * pd) / boost::math::tgamma(0.5 * pd);
  const double norm = surface * std::pow(2.0 * kPi, -0.5 * pd);
  const double total = integrate(radial, 0.0, kInf, 1e-12, 1e-10);
  // Radius keeping 1 - kNuTailMass of the mass.
  double lo = 0.0, hi = 1.0;
  while (integrate(radial, hi, kInf, 1e-14, 1e-10) > kNuTailMass * total) hi *= 2.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integrate(radial, mid, kInf, 1e-14, 1e-10) > kNuTailMass * total) lo = mid; else hi = mid;
  }
  const double radius = hi;
  const double delta = norm * integrate(radial, 0.0, radius, 1e-12, 1e-10);

  MinorizationCert cert;
  cert.a_level = a_level;
  cert.delta_a = delta;
  cert.small_set = p == 1 ? SmallSetKind::FirstCoordinateAbs : SmallSetKind::EuclideanBall;
  cert.nu = std::make_shared<RadialNu>(l, r, radius, delta);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double w = radius * l.row(i).norm();
    cert.box.push_back({-w, w});
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> lsvd(l);
  cert.a_bound = radius * lsvd.singularValues()(0);
  cert.b_bound = radius * (l.transpose() * Eigen::VectorXd::Ones(p)).norm() + pd * std::abs(model.mu);
  return cert;
}

MinorizationCert default_cert(const ModelSpec& model, std::optional<double> a_level) {
  const double a = a_level.value_or(1.0);
  switch (model.kind) {
    case ModelKind::Ar1LogReturn: {
      MinorizationCert cert = minorize_ar1(model.ar_coeffs[0], a, model.innovation_sd);
      cert.b_bound += std::abs(model.mu);
      return cert;
    }
    case ModelKind::ArpBlock:
      if (!a_level && model.attached_cert) return *model.attached_cert;
      return minorize_arp(model, a);
    case ModelKind::SvMixed:
      return minorize_gaussian_ar1(model.sv_coeff, model.sv_intercept, model.sv_sd, a, true);
    default:
      return finite_state_cert(model);
  }
}

MinorizationCert with_delta(MinorizationCert cert, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidParameter, "delta_a", "must lie in (0, 1]");
  cert.delta_a = delta;
  return cert;
}

namespace {

struct KernelAr1 {
  double coeff;
  double intercept;
  double sd;
  bool trailing;
};

std::optional<KernelAr1> scalar_kernel(const ModelSpec& model) {
  switch (model.kind) {
    case ModelKind::Ar1LogReturn:
      return KernelAr1{model.ar_coeffs[0], 0.0, model.innovation_sd, false};
    case ModelKind::ArpBlock:
      if (model.dim == 1) return KernelAr1{model.companion_power(0, 0), 0.0, model.block_chol(0, 0), false};
      return std::nullopt;
    case ModelKind::SvMixed:
      return KernelAr1{model.sv_coeff, model.sv_intercept, model.sv_sd, true};
    default:
      return std::nullopt;
  }
}

[[noreturn]] void report_violation(const MinorizationReport& r) {
  std::ostringstream msg;
  msg.precision(10);
  msg << "delta*nu(E) exceeds P(x, E) by " << -r.worst_margin << " at x = (";
  for (std::size_t i = 0; i < r.witness_x.size(); ++i) msg << (i ? ", " : "") << r.witness_x[i];
  msg << "), E = [" << r.witness_set.lo << ", " << r.witness_set.hi << "]";
  throw Error(ErrorCode::MinorizationViolated, msg.str());
}

}  // namespace

MinorizationReport check_minorization(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_states,
                                      std::size_t n_sets, Rng& rng) {
  MinorizationReport report;
  report.slack = kCheckSlack;
  report.worst_margin = kInf;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> y(model.dim, 0.0);

  if (model.is_finite()) {
    const auto k = model.n_regimes();
    const auto* nu = dynamic_cast<const FiniteNu*>(cert.nu.get());
    if (nu == nullptr) throw Error(ErrorCode::Unsupported, "cert", "finite model needs a finite-state nu");
    // Interval sets in the innovation coordinate, plus the whole line.
    std::vector<Interval> sets{{-kInf, kInf}};
    for (std::size_t s = 0; s < n_sets; ++s) {
      const double centre = std::normal_distribution<double>(0.0, 1.0)(rng);
      const double half = 0.01 + 2.0 * unif(rng);
      sets.push_back({centre - half, centre + half});
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        for (const auto& e : sets) {
          const double z_mass = normal_cdf(e.hi) - normal_cdf(e.lo);
          const double p = model.transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z_mass;
          const double margin = p - cert.delta_a * nu->probs()[j] * z_mass;
          if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.witness_x = {static_cast<double>(i), 0.0};
            report.witness_set = e;
            report.witness_regime = j;
          }
        }
      }
    }
    report.n_states = k;
    report.n_sets = sets.size() * k;
  } else {
    const auto kernel = scalar_kernel(model);
    if (!kernel) {
      throw Error(ErrorCode::Unsupported, "kind", "P(x, E) is only evaluated for one-dimensional or finite chains");
    }
    if (cert.small_set == SmallSetKind::WholeSpace) {
      throw Error(ErrorCode::Unsupported, "cert", "continuous chains need a bounded small set");
    }
    const double a = cert.a_level;
    std::vector<double> states{-a, a};
    while (states.size() < std::max<std::size_t>(n_states, 2)) states.push_back(-a + 2.0 * a * unif(rng));

    std::vector<Interval> sets;
    std::vector<double> nu_mass;
    for (std::size_t s = 0; s < n_sets; ++s) {
      cert.nu_sample(rng, y);
      const double half = kernel->sd * (s % 4 == 0 ? 0.02 * unif(rng) + 1e-3 : 2.0 * unif(rng) + 0.01);
      const Interval e{y[0] - half, y[0] + half};
      const double lo = std::max(e.lo, cert.box[0].lo);
      const double hi = std::min(e.hi, cert.box[0].hi);
      double mass = 0.0;
      if (hi > lo) {
        std::vector<double> point(model.dim, 0.0);
        const double scale = kernel->trailing ? 1.0 / normal_pdf(0.0) : 1.0;
        const auto density = [&](double v) {
          point[0] = v;
          return cert.nu_density(point) * scale;
        };
        // nu has a kink at the intercept
        const double kink = kernel->intercept;
        if (lo < kink && kink < hi) {
          mass = integrate(density, lo, kink, 1e-12, 1e-10) + integrate(density, kink, hi, 1e-12, 1e-10);
        } else {
          mass = integrate(density, lo, hi, 1e-12, 1e-10);
        }
      }
      sets.push_back(e);
      nu_mass.push_back(mass);
    }
    for (double x : states) {
      const double mean = kernel->intercept + kernel->coeff * x;
      for (std::size_t s = 0; s < sets.size(); ++s) {
        const double p = normal_cdf((sets[s].hi - mean) / kernel->sd) - normal_cdf((sets[s].lo - mean) / kernel->sd);
        const double margin = p - cert.delta_a * nu_mass[s];
        if (margin < report.worst_margin) {
          report.worst_margin = margin;
          report.witness_x.assign(model.dim, 0.0);
          report.witness_x[0] = x;
          report.witness_set = sets[s];
        }
      }
    }
    report.n_states = states.size();
    report.n_sets = sets.size();
  }
  report.passed = report.worst_margin >= -report.slack;
  if (!report.passed) report_violation(report);
  return report;
}

}  // namespace markov_ruin
