#include "markov_ruin/exponent_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

namespace {

constexpr std::uint64_t kCgfPaths = 21;
constexpr std::uint64_t kBootstrap = 22;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

// Strong connectivity and period of the support graph of p.
void require_primitive(const Eigen::MatrixXd& p) {
  const auto k = p.rows();
  std::vector<long> level(static_cast<std::size_t>(k), -1);
  std::queue<Eigen::Index> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (Eigen::Index v = 0; v < k; ++v) {
      if (p(u, v) > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
    }
  }
  std::vector<bool> back(static_cast<std::size_t>(k), false);
  back[0] = true;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (Eigen::Index v = 0; v < k; ++v) {
      if (p(v, u) > 0.0 && !back[static_cast<std::size_t>(v)]) {
        back[static_cast<std::size_t>(v)] = true;
        q.push(v);
      }
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (level[static_cast<std::size_t>(i)] < 0 || !back[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::PowerIterationStall, "transition", "transition matrix is reducible");
    }
  }
  long period = 0;
  for (Eigen::Index u = 0; u < k; ++u) {
    for (Eigen::Index v = 0; v < k; ++v) {
      if (p(u, v) > 0.0) {
        period = std::gcd(period, std::abs(level[static_cast<std::size_t>(u)] + 1 - level[static_cast<std::size_t>(v)]));
      }
    }
  }
  if (period != 1) {
    throw Error(ErrorCode::PowerIterationStall, "transition",
                "transition matrix is periodic (period " + std::to_string(period) + ")");
  }
}

double log_mean_exp(std::span<const double> s, double alpha, std::span<const double> log_counts, double log_n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) hi = std::max(hi, alpha * s[i] + log_counts[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::exp(alpha * s[i] + log_counts[i] - hi);
  return hi + std::log(acc) - log_n;
}

// Value and derivative of log mean(exp(alpha s)) with multiplicities.
std::pair<double, double> log_moment_and_slope(std::span<const double> s, double alpha,
                                               std::span<const double> log_counts, double log_n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) hi = std::max(hi, alpha * s[i] + log_counts[i]);
  double w_sum = 0.0, ws_sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = std::exp(alpha * s[i] + log_counts[i] - hi);
    w_sum += w;
    ws_sum += w * s[i];
  }
  return {hi + std::log(w_sum) - log_n, ws_sum / w_sum};
}

// Root of the convex sample log-moment inside (lo, hi), where it changes sign.
double cycle_root(std::span<const double> s, std::span<const double> log_counts, double log_n, double lo, double hi,
                  double tol) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [g, dg] = log_moment_and_slope(s, x, log_counts, log_n);
    if (g > 0.0) hi = x; else lo = x;
    double next = dg != 0.0 ? x - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= tol * std::max(1.0, std::abs(x)) || hi - lo <= tol * std::max(1.0, hi)) break;
  }
  return x;
}

double ess_fraction(std::span<const double> log_w) {
  const double hi = *std::max_element(log_w.begin(), log_w.end());
  double s1 = 0.0, s2 = 0.0;
  for (double l : log_w) {
    const double w = std::exp(l - hi);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2 / static_cast<double>(log_w.size());
}

}  // namespace

std::string_view to_string(CgfMethod method) {
  switch (method) {
    case CgfMethod::Analytic: return "Analytic";
    case CgfMethod::Spectral: return "Spectral";
    case CgfMethod::MonteCarlo: return "MonteCarlo";
    case CgfMethod::DiscretizedKernel: return "DiscretizedKernel";
    case CgfMethod::CycleMoment: return "CycleMoment";
  }
  return "Analytic";
}

CgfEstimate tabulate_cgf(std::span<const double> alpha_grid, const CgfFunction& cgf, CgfMethod method,
                         std::optional<double> truncation_m) {
  CgfEstimate est;
  est.method = method;
  est.truncation_m = truncation_m;
  for (double a : alpha_grid) {
    const CgfValue v = cgf(a);
    est.alpha_grid.push_back(a);
    est.lambda_values.push_back(v.value);
    est.std_errors.push_back(v.std_error);
  }
  return est;
}

bool is_convex(const CgfEstimate& est, double n_se, double abs_tol) {
  const auto& x = est.alpha_grid;
  const auto& y = est.lambda_values;
  const auto& se = est.std_errors;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double wp = 1.0 / (x[i + 1] - x[i]);
    const double wm = 1.0 / (x[i] - x[i - 1]);
    const double d2 = wp * y[i + 1] + wm * y[i - 1] - (wp + wm) * y[i];
    const double sd = std::sqrt(std::pow(wp * se[i + 1], 2) + std::pow(wm * se[i - 1], 2) +
                                std::pow((wp + wm) * se[i], 2));
    const double scale = (wp + wm) * std::max({std::abs(y[i - 1]), std::abs(y[i]), std::abs(y[i + 1]), 1.0});
    if (d2 < -n_se * sd - abs_tol * scale) return false;
  }
  return true;
}

bool has_analytic_cgf(const ModelSpec& model) {
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::Ar1LogReturn:
    case ModelKind::ArpBlock:
      return true;
    case ModelKind::Garch11:
      return model.garch[0].b1 == 0.0;
    default:
      return false;
  }
}

double cgf_analytic(const ModelSpec& model, double alpha) {
  switch (model.kind) {
    case ModelKind::IidLogNormal: {
      const double m = model.regime_mu[0];
      const double s2 = model.regime_sigma[0] * model.regime_sigma[0];
      return -m * alpha + 0.5 * s2 * alpha * alpha;
    }
    case ModelKind::Ar1LogReturn:
    case ModelKind::ArpBlock: {
      // Long-run variance of the partial sums: sd^2 / (1 - sum of coefficients)^2.
      const double persistence = std::accumulate(model.ar_coeffs.begin(), model.ar_coeffs.end(), 0.0);
      const double lr_var = model.innovation_sd * model.innovation_sd / std::pow(1.0 - persistence, 2);
      const double p = static_cast<double>(model.ar_coeffs.size());
      return p * (-model.mu * alpha + 0.5 * lr_var * alpha * alpha);
    }
    case ModelKind::Garch11:
      if (model.garch[0].b1 == 0.0) {
        // E[(a1 xi^2)^alpha] = (2 a1)^alpha Gamma(alpha + 1/2) / Gamma(1/2)
        return alpha * std::log(2.0 * model.garch[0].a1) + std::lgamma(alpha + 0.5) - std::lgamma(0.5);
      }
      break;
    default:
      break;
  }
  throw Error(ErrorCode::Unsupported, "kind",
              "no closed-form cumulant for " + std::string(to_string(model.kind)));
}

double regime_moment(const ModelSpec& model, std::size_t regime, double alpha) {
  if (alpha == 0.0) return 1.0;
  switch (model.kind) {
    case ModelKind::IidLogNormal:
    case ModelKind::RegimeSwitchLogNormal: {
      const double s = model.regime_sigma[regime];
      const double drift = model.ito_correction ? model.regime_mu[regime] - 0.5 * s * s : model.regime_mu[regime];
      return std::exp(-alpha * drift + 0.5 * alpha * alpha * s * s);
    }
    case ModelKind::Garch11:
    case ModelKind::Garch11RegimeSwitch: {
      const auto& g = model.garch[regime];
      if (g.b1 == 0.0) {
        return std::exp(alpha * std::log(2.0 * g.a1) + std::lgamma(alpha + 0.5) - std::lgamma(0.5));
      }
      return 2.0 * integrate([&](double z) { return std::pow(g.b1 + g.a1 * z * z, alpha) * normal_pdf(z); }, 0.0,
                             std::numeric_limits<double>::infinity(), 1e-12, 1e-11);
    }
    default:
      throw Error(ErrorCode::Unsupported, "kind", "regime moments need a finite-state model");
  }
}

double perron_log_root(const Eigen::MatrixXd& m, double tol, int max_iter) {
  const auto k = m.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  double rho = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd w = m * v;
    const double next_rho = w.sum();
    if (!(next_rho > 0.0) || !std::isfinite(next_rho)) {
      throw Error(ErrorCode::PowerIterationStall, "power iteration lost positivity");
    }
    const Eigen::VectorXd next_v = w / next_rho;
    const double dv = (next_v - v).cwiseAbs().maxCoeff();
    const bool settled = it > 0 && std::abs(next_rho - rho) <= tol * next_rho && dv <= tol * next_v.maxCoeff();
    rho = next_rho;
    v = next_v;
    if (settled || k == 1) return std::log(rho);
  }
  throw Error(ErrorCode::PowerIterationStall,
              "power iteration did not settle within " + std::to_string(max_iter) + " iterations");
}

double cgf_spectral(const ModelSpec& model, double alpha) {
  if (!model.is_finite()) throw Error(ErrorCode::Unsupported, "kind", "spectral route needs a finite-state model");
  require_primitive(model.transition);
  Eigen::MatrixXd m = model.transition;
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) *= regime_moment(model, static_cast<std::size_t>(j), alpha);
  return perron_log_root(m);
}

CgfMcResult cgf_mc(const ModelSpec& model, double alpha, std::size_t n, std::size_t n_paths,
                   std::optional<double> truncation_m, Rng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "n", "path length must be positive");
  if (n_paths < 2) throw Error(ErrorCode::InvalidParameter, "n_paths", "need at least two paths");
  const std::uint64_t master = rng();
  if (alpha == 0.0) return {};
  const double floor = truncation_m ? -*truncation_m : -std::numeric_limits<double>::infinity();

  std::vector<double> log_w(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    Rng path_rng = derive_stream(master, i, kCgfPaths);
    ChainState s = stationary_state(model, path_rng);
    std::vector<double> x = std::move(s.x), y(model.dim, 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sample_next(model, x, path_rng, y);
      sum += std::max(log_discount(model, y), floor);
      x.swap(y);
    }
    log_w[i] = alpha * sum;
  });

  const double hi = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) w[i] = std::exp(log_w[i] - hi);
  const MeanSe m = batch_means(w, 32);
  const double nd = static_cast<double>(n);

  CgfMcResult out;
  out.value = (hi + std::log(m.mean)) / nd;
  out.std_error = m.std_error / m.mean / nd;
  out.ess_fraction = ess_fraction(log_w);
  out.collapsed = out.ess_fraction < 0.01;
  return out;
}

namespace {

double discretized_root(const ModelSpec& model, double alpha, double half_width, std::size_t points) {
  const double c = model.kind == ModelKind::Ar1LogReturn ? model.ar_coeffs[0] : model.companion_power(0, 0);
  const double sd = model.kind == ModelKind::Ar1LogReturn ? model.innovation_sd : model.block_chol(0, 0);
  const auto n = static_cast<Eigen::Index>(points);
  const double h = 2.0 * half_width / static_cast<double>(points - 1);
  Eigen::VectorXd grid(n), tilt(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    grid(j) = -half_width + h * static_cast<double>(j);
    const double weight = (j == 0 || j == n - 1) ? 0.5 * h : h;
    tilt(j) = weight * std::exp(alpha * (grid(j) - model.mu));
  }
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = normal_pdf((grid(j) - c * grid(i)) / sd) / sd * tilt(j);
  return perron_log_root(m, 1e-13, 100000);
}

}  // namespace

double cgf_discretized_kernel(const ModelSpec& model, double alpha, double domain_half_width,
                              std::size_t grid_points) {
  const bool scalar = model.kind == ModelKind::Ar1LogReturn || (model.kind == ModelKind::ArpBlock && model.dim == 1);
  if (!scalar) throw Error(ErrorCode::Unsupported, "kind", "kernel discretization needs a one-dimensional AR chain");
  if (grid_points < 2) throw Error(ErrorCode::InvalidParameter, "grid_points", "need at least two points");
  if (!(domain_half_width > 0.0)) throw Error(ErrorCode::InvalidParameter, "domain_half_width", "must be > 0");
  const double base = discretized_root(model, alpha, domain_half_width, grid_points);
  const auto wider_points = static_cast<std::size_t>(std::llround(1.25 * static_cast<double>(grid_points)));
  const double wider = discretized_root(model, alpha, 1.25 * domain_half_width, std::max<std::size_t>(wider_points, 3));
  if (!(std::abs(wider - base) <= 1e-4)) {
    throw Error(ErrorCode::TruncationDominance,
                "Perron root moved from " + fmt(base) + " to " + fmt(wider) + " when the domain grew by 25%");
  }
  return base;
}

TailSolution solve_exponent(const CgfFunction& cgf, std::optional<Interval> bracket_hint, CgfMethod method,
                            const SolveOptions& options) {
  double lo = bracket_hint ? bracket_hint->lo : options.epsilon;
  CgfValue v_lo = cgf(lo);
  if (!(v_lo.value < 0.0) && lo != options.epsilon) {
    lo = options.epsilon;
    v_lo = cgf(lo);
  }
  if (!(v_lo.value < 0.0)) {
    throw Error(ErrorCode::NoPositiveRoot,
                "cgf(" + fmt(lo) + ") = " + fmt(v_lo.value) + " is not negative; the drift condition fails");
  }
  double hi = bracket_hint ? std::max(bracket_hint->hi, lo * 2.0) : std::max(1.0, 2.0 * lo);
  hi = std::min(hi, options.max_alpha);
  for (;;) {
    const CgfValue v = cgf(hi);
    if (v.value > 0.0) break;
    if (hi >= options.max_alpha) {
      throw Error(ErrorCode::NoUpperBracket,
                  "cgf stays non-positive up to alpha = " + fmt(hi) + "; the exponent is infinite or beyond range");
    }
    lo = hi;
    hi = std::min(2.0 * hi, options.max_alpha);
  }

  TailSolution sol;
  sol.method = method;
  sol.bracket = {lo, hi};
  double a = lo, b = hi;
  double best = 0.5 * (a + b);
  CgfValue best_v{std::numeric_limits<double>::infinity(), 0.0};
  bool stochastic = false;
  for (int it = 0; it < options.max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    const CgfValue v = cgf(mid);
    if (v.std_error > 0.0) stochastic = true;
    if (std::abs(v.value) <= std::abs(best_v.value)) {
      best = mid;
      best_v = v;
    }
    if (v.value == 0.0) break;
    if (v.value > 0.0) b = mid; else a = mid;
    if (stochastic && std::abs(v.value) <= v.std_error) break;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) break;
  }
  sol.exponent = best;
  sol.residual = std::abs(best_v.value);
  if (stochastic) {
    const double h = std::max(0.05 * best, 1e-3);
    const double slope = (cgf(best + h).value - cgf(best - h).value) / (2.0 * h);
    sol.std_error = slope != 0.0 ? best_v.std_error / std::abs(slope) : std::numeric_limits<double>::infinity();
    if (sol.residual > 2.0 * best_v.std_error) sol.flags.push_back("ResidualAboveNoise");
  } else if (sol.residual > options.tolerance) {
    sol.flags.push_back("ResidualAboveTolerance");
  }
  sol.ci = {sol.exponent - 1.959963984540054 * sol.std_error, sol.exponent + 1.959963984540054 * sol.std_error};
  return sol;
}

TailSolution solve_eta_cycles(std::span<const RegenBlock> blocks, Interval alpha_bracket, const EtaOptions& options) {
  if (blocks.size() < 2) throw Error(ErrorCode::InvalidParameter, "blocks", "need at least two blocks");
  if (!(alpha_bracket.lo > 0.0 && alpha_bracket.hi > alpha_bracket.lo)) {
    throw Error(ErrorCode::InvalidParameter, "alpha_bracket", "need 0 < lo < hi");
  }
  std::vector<double> s(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) s[i] = blocks[i].s_check;
  const bool degenerate = std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; });
  if (degenerate) throw Error(ErrorCode::NoPositiveRoot, "every block has A_check = 1; log moment vanishes");

  const std::vector<double> unit(s.size(), 0.0);
  const double log_n = std::log(static_cast<double>(s.size()));
  {
    std::vector<double> lw(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) lw[i] = alpha_bracket.hi * s[i];
    const double ess = ess_fraction(lw);
    if (ess < options.min_ess_fraction) {
      throw Error(ErrorCode::EffectiveSampleCollapse,
                  "relative effective sample size " + fmt(ess) + " at alpha = " + fmt(alpha_bracket.hi) +
                      "; narrow the bracket");
    }
  }
  const double g_lo = log_mean_exp(s, alpha_bracket.lo, unit, log_n);
  if (!(g_lo < 0.0)) {
    throw Error(ErrorCode::NoPositiveRoot, "log mean A_check^alpha = " + fmt(g_lo) + " at the lower bracket");
  }
  const double g_hi = log_mean_exp(s, alpha_bracket.hi, unit, log_n);
  if (!(g_hi > 0.0)) {
    throw Error(ErrorCode::NoUpperBracket, "log mean A_check^alpha = " + fmt(g_hi) + " at the upper bracket");
  }

  TailSolution sol;
  sol.method = CgfMethod::CycleMoment;
  sol.bracket = alpha_bracket;
  sol.exponent = cycle_root(s, unit, log_n, alpha_bracket.lo, alpha_bracket.hi, 1e-13);
  sol.residual = std::abs(log_mean_exp(s, sol.exponent, unit, log_n));

  std::vector<double> roots(options.bootstrap, std::numeric_limits<double>::quiet_NaN());
  parallel_for(options.bootstrap, [&](std::size_t r) {
    Rng rng = derive_stream(options.seed, r, kBootstrap);
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    std::vector<double> counts(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) counts[pick(rng)] += 1.0;
    std::vector<double> ss, lc;
    ss.reserve(s.size());
    lc.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (counts[i] > 0.0) {
        ss.push_back(s[i]);
        lc.push_back(std::log(counts[i]));
      }
    }
    if (log_mean_exp(ss, alpha_bracket.lo, lc, log_n) < 0.0 && log_mean_exp(ss, alpha_bracket.hi, lc, log_n) > 0.0) {
      roots[r] = cycle_root(ss, lc, log_n, alpha_bracket.lo, alpha_bracket.hi, 1e-9);
    }
  });
  std::vector<double> ok;
  for (double r : roots) {
    if (std::isfinite(r)) ok.push_back(r);
  }
  if (ok.size() < roots.size()) sol.flags.push_back("BootstrapRootsOutsideBracket");
  if (ok.size() >= 2) {
    std::sort(ok.begin(), ok.end());
    sol.std_error = std::sqrt(sample_variance(ok));
    sol.ci = {sorted_quantile(ok, 0.025), sorted_quantile(ok, 0.975)};
  } else {
    sol.std_error = std::numeric_limits<double>::infinity();
    sol.ci = {alpha_bracket.lo, alpha_bracket.hi};
  }
  return sol;
}

}  // namespace markov_ruin
