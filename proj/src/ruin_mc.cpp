#include "markov_ruin/ruin_mc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

namespace {

enum StreamPurpose : std::uint64_t {
  kRuinPaths = 31,
  kRegenerativePaths = 32,
  kPerpetuityPaths = 33,
  kGarchPaths = 34,
  kGoldieBootstrap = 35,
  kInitialBlocks = 36,
};

// Chain-driven increments. When start_is_first is set, `start` is X_1 itself;
// otherwise it is X_0 and X_1 ~ P(X_0, .).
class ModelStepper {
 public:
  ModelStepper(const ModelSpec& model, Rng& rng, std::vector<double> start, bool start_is_first)
      : model_(model), rng_(rng), x_(std::move(start)), y_(model.dim, 0.0), pending_(start_is_first) {}

  Increment operator()() {
    if (pending_) {
      pending_ = false;
    } else {
      sample_next(model_, x_, rng_, y_);
      x_.swap(y_);
    }
    const StepValues v = emit(model_, x_, rng_);
    return {std::exp(v.log_a), v.b};
  }

 private:
  const ModelSpec& model_;
  Rng& rng_;
  std::vector<double> x_, y_;
  bool pending_;
};

std::vector<double> start_state(const ModelSpec& model, Rng& rng, const std::optional<ChainState>& x0) {
  if (!x0) return stationary_state(model, rng).x;
  if (x0->x.size() != model.dim) throw Error(ErrorCode::DimensionMismatch, "x0", "state dimension does not match model");
  return x0->x;
}

void require_contracting(const ModelSpec& model) {
  const auto drift = stationary_mean_log_discount(model);
  if (drift && !(*drift < 0.0)) {
    std::ostringstream msg;
    msg << "E_pi[log A] = " << *drift << " is not negative";
    throw Error(ErrorCode::NonContracting, msg.str());
  }
}

bool is_late(const WSupResult& r, std::uint64_t horizon) {
  return static_cast<double>(r.last_improvement) > 0.9 * static_cast<double>(horizon);
}

}  // namespace

std::string_view to_string(TailKind kind) {
  switch (kind) {
    case TailKind::RuinSup: return "RuinSup";
    case TailKind::Perpetuity: return "Perpetuity";
    case TailKind::GarchStationary: return "GarchStationary";
  }
  return "RuinSup";
}

WSupResult simulate_w_sup(const ModelSpec& model, std::uint64_t horizon, Rng& rng,
                          const std::optional<ChainState>& x0) {
  if (horizon == 0) throw Error(ErrorCode::InvalidParameter, "horizon", "must be >= 1");
  ModelStepper step(model, rng, start_state(model, rng, x0), false);
  return w_sup_from(step, horizon);
}

TailSampleSet sample_w_sup(const ModelSpec& model, std::size_t n_paths, std::uint64_t horizon, std::uint64_t seed,
                           const std::optional<ChainState>& x0) {
  if (n_paths == 0) throw Error(ErrorCode::InvalidParameter, "n_paths", "must be positive");
  if (horizon == 0) throw Error(ErrorCode::InvalidParameter, "horizon", "must be >= 1");
  TailSampleSet set;
  set.kind = TailKind::RuinSup;
  set.horizon = horizon;
  set.samples.resize(n_paths);
  std::vector<char> late(n_paths, 0);
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kRuinPaths);
    const WSupResult r = simulate_w_sup(model, horizon, rng, x0);
    set.samples[i] = r.w_sup;
    late[i] = is_late(r, horizon) ? 1 : 0;
  });
  set.late_paths = static_cast<std::size_t>(std::count(late.begin(), late.end(), 1));
  return set;
}

TailSampleSet sample_w_regenerative(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_paths,
                                    std::uint64_t horizon, std::uint64_t seed) {
  if (n_paths == 0) throw Error(ErrorCode::InvalidParameter, "n_paths", "must be positive");
  if (horizon == 0) throw Error(ErrorCode::InvalidParameter, "horizon", "must be >= 1");
  TailSampleSet set;
  set.kind = TailKind::RuinSup;
  set.horizon = horizon;
  set.samples.resize(n_paths);
  std::vector<char> late(n_paths, 0);
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kRegenerativePaths);
    std::vector<double> first(model.dim, 0.0);
    cert.nu_sample(rng, first);
    ModelStepper step(model, rng, std::move(first), true);
    const WSupResult r = w_sup_from(step, horizon);
    set.samples[i] = r.w_sup;
    late[i] = is_late(r, horizon) ? 1 : 0;
  });
  set.late_paths = static_cast<std::size_t>(std::count(late.begin(), late.end(), 1));
  return set;
}

RuinCurve curve_from_samples(const TailSampleSet& set, std::span<const double> u_grid) {
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (!(u_grid[i] > 0.0) || (i > 0 && !(u_grid[i] > u_grid[i - 1]))) {
      throw Error(ErrorCode::InvalidParameter, "u_grid", "grid must be positive and strictly ascending");
    }
  }
  std::vector<double> sorted = set.samples;
  std::sort(sorted.begin(), sorted.end());
  RuinCurve curve;
  curve.n_paths = sorted.size();
  curve.horizon = set.horizon;
  curve.late_fraction = sorted.empty() ? 0.0 : static_cast<double>(set.late_paths) / static_cast<double>(sorted.size());
  if (set.kind == TailKind::RuinSup && curve.late_fraction >= kLateFractionLimit) curve.flags.push_back("HorizonSuspect");
  for (double u : u_grid) {
    const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), u));
    const Interval ci = wilson_interval(above, sorted.size());
    curve.u_grid.push_back(u);
    curve.psi_hat.push_back(static_cast<double>(above) / static_cast<double>(sorted.size()));
    curve.ci_lo.push_back(ci.lo);
    curve.ci_hi.push_back(ci.hi);
  }
  return curve;
}

RuinCurve estimate_ruin_curve(const ModelSpec& model, std::span<const double> u_grid, std::size_t n_paths,
                              std::uint64_t horizon, Rng& rng) {
  const TailSampleSet set = sample_w_sup(model, n_paths, horizon, rng());
  return curve_from_samples(set, u_grid);
}

std::vector<double> quantile_window_grid(std::span<const double> samples, double q_lo, double q_hi,
                                         std::size_t points) {
  if (points < 2) throw Error(ErrorCode::InvalidParameter, "points", "need at least two grid points");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted_quantile(sorted, q_lo);
  const double hi = sorted_quantile(sorted, q_hi);
  if (!(lo > 0.0 && hi > lo)) {
    throw Error(ErrorCode::TooFewEvents, "quantile window does not span a positive range of u");
  }
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

PowerFit fit_power_tail(const RuinCurve& curve, std::optional<double> exponent) {
  const double n = static_cast<double>(curve.n_paths);
  std::vector<double> lx, ly, w, u, psi;
  for (std::size_t i = 0; i < curve.u_grid.size(); ++i) {
    const double p = curve.psi_hat[i];
    if (!(p > 10.0 / n)) continue;
    lx.push_back(std::log(curve.u_grid[i]));
    ly.push_back(std::log(p));
    // var(log psi_hat) ~ (1 - psi) / (n psi)
    w.push_back(n * p / std::max(1.0 - p, 1.0 / n));
    u.push_back(curve.u_grid[i]);
    psi.push_back(p);
  }
  if (lx.size() < 5) {
    throw Error(ErrorCode::TooFewEvents,
                "only " + std::to_string(lx.size()) + " grid points have psi_hat above 10 / n_paths");
  }
  const LineFit fit = weighted_line_fit(lx, ly, w);
  PowerFit out;
  out.slope = fit.slope;
  out.log_c = fit.intercept;
  out.n_points = lx.size();
  if (exponent) {
    const double w_sum = std::accumulate(w.begin(), w.end(), 0.0);
    double log_mean = 0.0, level = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      log_mean += w[i] * (ly[i] + *exponent * lx[i]);
      level += w[i] * std::pow(u[i], *exponent) * psi[i];
    }
    out.log_c = log_mean / w_sum;
    level /= w_sum;
    double dev = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      dev = std::max(dev, std::abs(std::pow(u[i], *exponent) * psi[i] - level) / level);
    }
    out.flatness = dev;
  }
  return out;
}

std::string format_significant(double v, int digits) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) return "0";
  std::ostringstream s;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
  s << std::fixed << std::setprecision(std::max(0, digits - 1 - magnitude)) << v;
  return s.str();
}

void write_ruin_curve_csv(std::ostream& out, const RuinCurve& curve) {
  // NaN exponent (no exponent, no fit) propagates to a nan column
  const double r = curve.exponent_used.value_or(-curve.fitted_slope);
  out << "u,psi_hat,ci_lo,ci_hi,u_pow_r_psi\n";
  for (std::size_t i = 0; i < curve.u_grid.size(); ++i) {
    const double scaled = std::isfinite(r) ? std::pow(curve.u_grid[i], r) * curve.psi_hat[i] : std::nan("");
    out << format_significant(curve.u_grid[i]) << ',' << format_significant(curve.psi_hat[i]) << ','
        << format_significant(curve.ci_lo[i]) << ',' << format_significant(curve.ci_hi[i]) << ','
        << format_significant(scaled) << '\n';
  }
}

void write_samples(std::ostream& out, std::span<const double> samples) {
  for (double v : samples) out << format_significant(v, 17) << '\n';
}

double simulate_perpetuity(const ModelSpec& model, double tol, Rng& rng, const std::optional<ChainState>& x0,
                           std::uint64_t max_steps) {
  if (!(tol > 0.0 && tol <= 1e-6)) throw Error(ErrorCode::InvalidParameter, "tol", "must lie in (0, 1e-6]");
  require_contracting(model);
  ModelStepper step(model, rng, start_state(model, rng, x0), false);
  const auto w = perpetuity_from(step, tol, max_steps);
  if (!w) {
    throw Error(ErrorCode::NonContracting,
                "discount product did not fall below tolerance within " + std::to_string(max_steps) + " steps");
  }
  return *w;
}

TailSampleSet sample_perpetuities(const ModelSpec& model, std::size_t n, double tol, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "n_paths", "must be positive");
  TailSampleSet set;
  set.kind = TailKind::Perpetuity;
  set.truncation_tol = tol;
  set.samples.resize(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kPerpetuityPaths);
    set.samples[i] = simulate_perpetuity(model, tol, rng);
  });
  return set;
}

double simulate_garch_stationary(const ModelSpec& model, std::uint64_t burn_in, Rng& rng) {
  if (model.kind != ModelKind::Garch11 && model.kind != ModelKind::Garch11RegimeSwitch) {
    throw Error(ErrorCode::Unsupported, "kind", "GARCH stationary draws need a GARCH model");
  }
  if (burn_in == 0) throw Error(ErrorCode::InvalidParameter, "burn_in", "must be positive");
  require_contracting(model);
  std::vector<double> x = stationary_state(model, rng).x, y(model.dim, 0.0);
  const GarchParams& g = model.garch[static_cast<std::size_t>(x[0])];
  const double persistence = g.a1 + g.b1;
  double w = persistence < 1.0 ? g.a0 / (1.0 - persistence) : g.a0;
  for (std::uint64_t n = 0; n < burn_in; ++n) {
    sample_next(model, x, rng, y);
    x.swap(y);
    const auto& gn = model.garch[static_cast<std::size_t>(x[0])];
    w = (gn.b1 + gn.a1 * x[1] * x[1]) * w + gn.a0;
  }
  return w;
}

TailSampleSet sample_garch_stationary(const ModelSpec& model, std::size_t n, std::uint64_t burn_in,
                                      std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "n_paths", "must be positive");
  TailSampleSet set;
  set.kind = TailKind::GarchStationary;
  set.horizon = burn_in;
  set.samples.resize(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kGarchPaths);
    set.samples[i] = simulate_garch_stationary(model, burn_in, rng);
  });
  return set;
}

HillResult hill_estimator(std::span<const double> samples, std::size_t k) {
  if (k < 50 || k > samples.size() / 10) {
    throw Error(ErrorCode::InsufficientTail, "k",
                "need 50 <= k <= n / 10 (k = " + std::to_string(k) + ", n = " + std::to_string(samples.size()) + ")");
  }
  std::vector<double> top(samples.begin(), samples.end());
  std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k + 1), top.end(), std::greater<>());
  const double threshold = top[k];
  if (!(threshold > 0.0)) throw Error(ErrorCode::InsufficientTail, "fewer than k + 1 positive samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(top[i] / threshold);
  if (!(sum > 0.0)) throw Error(ErrorCode::InsufficientTail, "top order statistics are all equal");
  HillResult r;
  r.k = k;
  r.index = static_cast<double>(k) / sum;
  const double half = 1.959963984540054 / std::sqrt(static_cast<double>(k));
  r.ci = {r.index * (1.0 - half), r.index * (1.0 + half)};
  return r;
}

GoldieResult estimate_goldie_constant(std::span<const RegenBlock> blocks, std::span<const double> wr_samples,
                                      double eta, const GoldieOptions& options) {
  const std::size_t n = std::min(blocks.size(), wr_samples.size());
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "blocks", "need at least two paired blocks");
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidParameter, "eta", "must be > 0");
  std::vector<double> term(n), mterm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = blocks[i];
    const double aw = b.a_check * wr_samples[i];
    const double lead = b.b_check + std::max(b.m_check - b.b_check, aw);
    term[i] = std::pow(std::max(lead, 0.0), eta) - std::pow(std::max(aw, 0.0), eta);
    mterm[i] = std::exp(eta * b.s_check) * b.s_check;
  }
  const MeanSe m = mean_and_se(mterm);
  GoldieResult r;
  r.m_check = m.mean;
  r.m_check_se = m.std_error;
  if (!(m.mean > 2.0 * m.std_error)) {
    std::ostringstream msg;
    msg << "E[A^eta log A] estimate " << m.mean << " is not significantly positive (std error " << m.std_error << ")";
    throw Error(ErrorCode::DegenerateMcheck, msg.str());
  }
  const double t_mean = std::accumulate(term.begin(), term.end(), 0.0) / static_cast<double>(n);
  r.d_hat = t_mean / (eta * m.mean);
  r.positive = r.d_hat > 0.0;

  std::vector<double> boot(options.bootstrap);
  parallel_for(options.bootstrap, [&](std::size_t k) {
    Rng rng = derive_stream(options.seed, k, kGoldieBootstrap);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double ts = 0.0, ms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(rng);
      ts += term[j];
      ms += mterm[j];
    }
    boot[k] = ts / (eta * ms);
  });
  if (boot.size() >= 2) {
    std::sort(boot.begin(), boot.end());
    r.std_error = std::sqrt(sample_variance(boot));
    r.ci = {sorted_quantile(boot, 0.025), sorted_quantile(boot, 0.975)};
  } else {
    r.ci = {r.d_hat, r.d_hat};
  }
  return r;
}

MeanSe initial_block_moment(const ModelSpec& model, const MinorizationCert& cert, double r, std::size_t n,
                            std::uint64_t seed) {
  std::vector<double> v(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = derive_stream(seed, i, kInitialBlocks);
    const ChainState x0 = stationary_state(model, rng);
    v[i] = std::exp(r * simulate_initial_block(model, cert, x0, rng).s_check);
  });
  return mean_and_se(v);
}

}  // namespace markov_ruin
