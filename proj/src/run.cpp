#include "markov_ruin/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/regeneration.hpp"
#include "markov_ruin/ruin_mc.hpp"
#include "markov_ruin/verify.hpp"

#ifndef MARKOV_RUIN_VERSION
#define MARKOV_RUIN_VERSION "dev"
#endif

namespace markov_ruin {

using nlohmann::json;

namespace {

// stream purposes, fixed so manifests stay reproducible across versions
constexpr std::uint64_t kRuinPaths = 101;
constexpr std::uint64_t kPerpetuityPaths = 102;
constexpr std::uint64_t kGarchPaths = 103;
constexpr std::uint64_t kCyclePurpose = 104;
constexpr std::uint64_t kMcPurpose = 105;
constexpr std::uint64_t kBootstrapPurpose = 106;
constexpr std::uint64_t kMinorizePurpose = 107;
constexpr std::uint64_t kSplitPurpose = 108;

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"field", e.field()}, {"message", e.what()}};
}

class Context {
 public:
  explicit Context(const RunConfig& c) : config(c), dir(c.output_dir) {}

  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      Context* ctx;
      std::string stage;
      std::chrono::steady_clock::time_point t0;
      ~Record() {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ctx->timings[stage] = ctx->timings.value(stage, 0.0) + s;
      }
    } record{this, stage, t0};
    return f();
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    result.files.push_back(name);
  }

  void flag(const std::string& f, bool fatal, int exit_code = 4) {
    if (std::find(result.flags.begin(), result.flags.end(), f) == result.flags.end()) result.flags.push_back(f);
    if (fatal) {
      if (std::find(result.fatal.begin(), result.fatal.end(), f) == result.fatal.end()) result.fatal.push_back(f);
      if (result.exit_code == 0) result.exit_code = exit_code;
    }
  }

  void fail(const Error& e) {
    flag(std::string(to_string(e.code())), true, exit_status(e.code()));
    errors.push_back(error_json(e));
  }

  const RunConfig& config;
  std::filesystem::path dir;
  RunResult result;
  json timings = json::object();
  json exponents = json::array();
  json errors = json::array();
};

std::string csv_number(double v) { return format_significant(v, 10); }

std::vector<double> default_alpha_grid(double upper) {
  std::vector<double> g(21);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = upper * static_cast<double>(i) / 20.0;
  return g;
}

CgfEstimate cycle_cgf_estimate(std::span<const RegenBlock> blocks, std::span<const double> grid) {
  std::vector<double> s(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) s[i] = blocks[i].s_check;
  const double n = static_cast<double>(s.size());
  return tabulate_cgf(grid, [&](double alpha) -> CgfValue {
    if (alpha == 0.0) return {};
    std::vector<double> lw(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) lw[i] = alpha * s[i];
    const double top = *std::max_element(lw.begin(), lw.end());
    double m1 = 0.0, m2 = 0.0;
    for (double v : lw) {
      const double w = std::exp(v - top);
      m1 += w;
      m2 += w * w;
    }
    m1 /= n;
    m2 /= n;
    const double var = std::max(m2 - m1 * m1, 0.0);
    return {top + std::log(m1), std::sqrt(var / n) / m1};
  }, CgfMethod::CycleMoment);
}

json estimate_json(const CgfEstimate& est) {
  return {{"method", std::string(to_string(est.method))},
          {"alpha", est.alpha_grid},
          {"lambda", est.lambda_values},
          {"std_error", est.std_errors},
          {"convex", is_convex(est)}};
}

void append_cgf_rows(std::ostringstream& out, const CgfEstimate& est) {
  for (std::size_t i = 0; i < est.alpha_grid.size(); ++i) {
    out << csv_number(est.alpha_grid[i]) << ',' << to_string(est.method) << ',' << csv_number(est.lambda_values[i])
        << ',' << csv_number(est.std_errors[i]) << '\n';
  }
}

void record_exponent(Context& ctx, const std::string& route, const TailSolution& sol) {
  json j = to_json(sol);
  j["route"] = route;
  ctx.exponents.push_back(j);
}

std::optional<TailSolution> try_deterministic(Context& ctx, const ModelSpec& model) {
  try {
    auto sol = ctx.timed("exponent", [&] { return deterministic_exponent(model, ctx.config.solve); });
    if (sol) record_exponent(ctx, "deterministic", *sol);
    return sol;
  } catch (const Error& e) {
    ctx.errors.push_back(error_json(e));
    ctx.flag(std::string(to_string(e.code())), false);
    return std::nullopt;
  }
}

void run_solve(Context& ctx, const ModelSpec& model) {
  const RunConfig& c = ctx.config;
  std::vector<std::pair<std::string, TailSolution>> sols;
  json skipped = json::array();
  json route_errors = json::array();

  const auto attempt = [&](const std::string& name, auto&& solve) {
    try {
      TailSolution s = ctx.timed(name, solve);
      for (const auto& f : s.flags) ctx.flag(f, false);
      record_exponent(ctx, name, s);
      sols.emplace_back(name, std::move(s));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Unsupported) {
        skipped.push_back({{"route", name}, {"reason", e.what()}});
      } else {
        json j = error_json(e);
        j["route"] = name;
        route_errors.push_back(j);
        ctx.fail(e);
      }
    }
  };

  if (has_analytic_cgf(model)) {
    attempt("analytic", [&] {
      return solve_exponent([&](double a) { return CgfValue{cgf_analytic(model, a), 0.0}; }, std::nullopt,
                            CgfMethod::Analytic);
    });
  }
  if (model.is_finite()) {
    attempt("spectral", [&] {
      return solve_exponent([&](double a) { return CgfValue{cgf_spectral(model, a), 0.0}; }, std::nullopt,
                            CgfMethod::Spectral);
    });
  }
  if (model.kind == ModelKind::Ar1LogReturn || (model.kind == ModelKind::ArpBlock && model.dim == 1)) {
    attempt("kernel", [&] {
      return solve_exponent(
          [&](double a) {
            return CgfValue{cgf_discretized_kernel(model, a, c.solve.kernel_half_width, c.solve.kernel_points), 0.0};
          },
          std::nullopt, CgfMethod::DiscretizedKernel);
    });
  }
  std::optional<Interval> hint;
  if (!sols.empty()) hint = Interval{0.5 * sols.front().second.exponent, 1.5 * sols.front().second.exponent};

  bool collapsed = false;
  attempt("monte_carlo", [&] { return solve_mc(model, c.solve, derive_seed(c.seed, kMcPurpose), hint, &collapsed); });
  if (collapsed) ctx.flag("EffectiveSampleCollapse", false);

  std::optional<MinorizationCert> cert;
  try {
    cert = configured_cert(model, c.minorization);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unsupported) throw;
    skipped.push_back({{"route", "cycles"}, {"reason", e.what()}});
  }
  std::vector<RegenBlock> blocks;
  if (cert) {
    attempt("cycles", [&] {
      blocks = simulate_cycles(model, *cert, c.n_cycles, derive_seed(c.seed, kCyclePurpose));
      const double hi = discover_cycle_bracket(blocks);
      EtaOptions opt;
      opt.bootstrap = c.solve.bootstrap;
      opt.seed = derive_seed(c.seed, kBootstrapPurpose);
      return solve_eta_cycles(blocks, {std::min(1e-3, 0.5 * hi), hi}, opt);
    });
  }

  // cross-check: every pair within two combined std errors plus a small
  // numerical allowance for the deterministic routes
  json pairs = json::array();
  bool agree = true;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      const auto& [ni, si] = sols[i];
      const auto& [nj, sj] = sols[j];
      if ((ni == "monte_carlo" || nj == "monte_carlo") && collapsed) continue;
      const double diff = std::abs(si.exponent - sj.exponent);
      const double tol = 2.0 * std::hypot(si.std_error, sj.std_error) +
                         1e-3 * std::max({1.0, si.exponent, sj.exponent});
      const bool ok = diff <= tol;
      agree = agree && ok;
      pairs.push_back({{"routes", {ni, nj}}, {"difference", diff}, {"tolerance", tol}, {"agree", ok}});
    }
  }
  if (!agree) ctx.flag("RouteDisagreement", true);

  // cgf tables
  const double upper = sols.empty() ? 3.0 : 2.0 * sols.front().second.exponent;
  const std::vector<double> grid = c.solve.alpha_grid.empty() ? default_alpha_grid(upper) : c.solve.alpha_grid;
  std::vector<CgfEstimate> tables;
  ctx.timed("cgf_tables", [&] {
    try {
      if (has_analytic_cgf(model)) {
        tables.push_back(tabulate_cgf(grid, [&](double a) { return CgfValue{cgf_analytic(model, a), 0.0}; },
                                      CgfMethod::Analytic));
      }
      if (model.is_finite()) {
        tables.push_back(tabulate_cgf(grid, [&](double a) { return CgfValue{cgf_spectral(model, a), 0.0}; },
                                      CgfMethod::Spectral));
      }
      const std::uint64_t mc_seed = derive_seed(c.seed, kMcPurpose);
      tables.push_back(tabulate_cgf(grid, [&](double a) {
        Rng rng(mc_seed);
        const auto r = cgf_mc(model, a, c.solve.cgf_steps, c.solve.cgf_paths, c.solve.truncation_m, rng);
        return CgfValue{r.value, r.std_error};
      }, CgfMethod::MonteCarlo, c.solve.truncation_m));
      if (!blocks.empty()) tables.push_back(cycle_cgf_estimate(blocks, grid));
    } catch (const Error& e) {
      ctx.fail(e);
    }
    return 0;
  });
  std::ostringstream csv;
  csv << "alpha,method,lambda,std_error\n";
  json table_json = json::array();
  for (const auto& t : tables) {
    append_cgf_rows(csv, t);
    table_json.push_back(estimate_json(t));
  }
  ctx.write("cgf_table.csv", csv.str());

  json routes = json::array();
  for (const auto& [name, s] : sols) {
    json j = to_json(s);
    j["route"] = name;
    routes.push_back(j);
  }
  ctx.result.report = {{"model", c.model.kind},
                       {"routes", routes},
                       {"skipped", skipped},
                       {"errors", route_errors},
                       {"cross_check", {{"agree", agree}, {"pairs", pairs}}},
                       {"cgf_tables", table_json}};
  if (!sols.empty()) ctx.result.report["exponent"] = sols.front().second.exponent;
  ctx.write("exponent_report.json", ctx.result.report.dump(2) + "\n");
}

void run_ruin(Context& ctx, const ModelSpec& model) {
  const RunConfig& c = ctx.config;
  const auto det = try_deterministic(ctx, model);
  const TailSampleSet set =
      ctx.timed("simulate", [&] { return sample_w_sup(model, c.n_paths, c.horizon, derive_seed(c.seed, kRuinPaths)); });
  std::vector<double> grid = c.ruin.u_grid;
  if (grid.empty()) grid = quantile_window_grid(set.samples, c.ruin.q_lo, c.ruin.q_hi, c.ruin.grid_points);
  RuinCurve curve = curve_from_samples(set, grid);
  for (const auto& f : curve.flags) ctx.flag(f, false);

  json fit = json::object();
  try {
    const PowerFit free = fit_power_tail(curve);
    curve.fitted_slope = free.slope;
    curve.fitted_log_c = free.log_c;
    fit["slope"] = free.slope;
    fit["log_c_free"] = free.log_c;
    fit["n_points"] = free.n_points;
    if (det) {
      curve.exponent_used = det->exponent;
      const PowerFit fixed = fit_power_tail(curve, det->exponent);
      curve.fitted_log_c = fixed.log_c;
      fit["exponent"] = det->exponent;
      fit["exponent_method"] = std::string(to_string(det->method));
      fit["log_c"] = fixed.log_c;
      fit["flatness"] = fixed.flatness;
    }
  } catch (const Error& e) {
    ctx.fail(e);
  }

  std::ostringstream csv;
  write_ruin_curve_csv(csv, curve);
  ctx.write("ruin_curve.csv", csv.str());
  if (c.ruin.dump_samples) {
    std::ostringstream s;
    write_samples(s, set.samples);
    ctx.write("w_sup_samples.txt", s.str());
  }
  ctx.result.report = {{"n_paths", curve.n_paths},
                       {"horizon", curve.horizon},
                       {"late_fraction", curve.late_fraction},
                       {"u_grid", curve.u_grid},
                       {"psi_hat", curve.psi_hat},
                       {"fit", fit},
                       {"flags", curve.flags}};
  ctx.write("ruin_fit.json", ctx.result.report.dump(2) + "\n");
}

void tail_report(Context& ctx, const ModelSpec& model, const TailSampleSet& set, const std::string& sample_file) {
  const RunConfig& c = ctx.config;
  std::ostringstream s;
  write_samples(s, set.samples);
  ctx.write(sample_file, s.str());

  json report = {{"kind", std::string(to_string(set.kind))}, {"n", set.samples.size()}};
  if (set.kind == TailKind::Perpetuity) report["truncation_tol"] = set.truncation_tol;
  if (set.kind == TailKind::GarchStationary) report["burn_in"] = set.horizon;
  const MeanSe m = mean_and_se(set.samples);
  report["mean"] = m.mean;
  report["mean_se"] = m.std_error;

  const auto det = try_deterministic(ctx, model);
  try {
    const HillResult hill = hill_estimator(set.samples, c.hill_k);
    report["hill"] = {{"index", hill.index}, {"ci", interval_json(hill.ci)}, {"k", hill.k}};
    if (det) {
      const double hill_se = hill.index / std::sqrt(static_cast<double>(hill.k));
      const double diff = std::abs(hill.index - det->exponent);
      const double tol = 2.0 * std::hypot(hill_se, det->std_error);
      report["exponent"] = det->exponent;
      report["exponent_method"] = std::string(to_string(det->method));
      report["hill_consistent"] = diff <= tol;
      if (diff > tol) ctx.flag("HillExponentMismatch", false);
    }
  } catch (const Error& e) {
    ctx.fail(e);
  }

  if (set.kind == TailKind::Perpetuity && model.kind == ModelKind::IidLogNormal) {
    // fixed point E[V] = E[B] / (1 - E[A]) when the first moment exists
    const double ea = regime_moment(model, 0, 1.0);
    const auto eb = model.loss.independent_mean();
    if (ea < 1.0 && eb) {
      const double target = *eb / (1.0 - ea);
      report["mean_identity"] = {{"expected", target}, {"within_3se", std::abs(m.mean - target) <= 3.0 * m.std_error}};
    }
  }
  ctx.result.report = report;
  ctx.write("hill_report.json", report.dump(2) + "\n");
}

void run_perpetuity(Context& ctx, const ModelSpec& model) {
  const RunConfig& c = ctx.config;
  const TailSampleSet set = ctx.timed("simulate", [&] {
    return sample_perpetuities(model, c.n_paths, c.perpetuity_tol, derive_seed(c.seed, kPerpetuityPaths));
  });
  tail_report(ctx, model, set, "perpetuity_samples.txt");
}

void run_garch(Context& ctx, const ModelSpec& model) {
  const RunConfig& c = ctx.config;
  const TailSampleSet set = ctx.timed("simulate", [&] {
    return sample_garch_stationary(model, c.n_paths, c.garch_burn_in, derive_seed(c.seed, kGarchPaths));
  });
  tail_report(ctx, model, set, "garch_samples.txt");
}

std::string_view small_set_name(SmallSetKind k) {
  switch (k) {
    case SmallSetKind::WholeSpace: return "whole_space";
    case SmallSetKind::FirstCoordinateAbs: return "first_coordinate_abs";
    case SmallSetKind::EuclideanBall: return "euclidean_ball";
  }
  return "whole_space";
}

void run_minorize(Context& ctx, const ModelSpec& model) {
  const RunConfig& c = ctx.config;
  const MinorizationCert cert = configured_cert(model, c.minorization);
  json box = json::array();
  for (const auto& b : cert.box) box.push_back(interval_json(b));
  json report = {{"certificate",
                  {{"a_level", cert.a_level},
                   {"delta_a", cert.delta_a},
                   {"small_set", std::string(small_set_name(cert.small_set))},
                   {"a_bound", cert.a_bound},
                   {"b_bound", cert.b_bound},
                   {"box", box}}}};
  try {
    Rng rng = derive_stream(c.seed, 0, kMinorizePurpose);
    const MinorizationReport r = ctx.timed("check_minorization", [&] {
      return check_minorization(model, cert, c.minorization.n_states, c.minorization.n_sets, rng);
    });
    report["check"] = {{"passed", r.passed},     {"worst_margin", r.worst_margin}, {"slack", r.slack},
                       {"n_states", r.n_states}, {"n_sets", r.n_sets},             {"witness_x", r.witness_x},
                       {"witness_set", interval_json(r.witness_set)}};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Unsupported) {
      report["check"] = {{"skipped", e.what()}};
    } else {
      report["check"] = {{"passed", false}, {"error", error_json(e)}};
      ctx.fail(e);
    }
  }
  try {
    Rng rng = derive_stream(c.seed, 0, kSplitPurpose);
    const std::size_t n = std::min<std::size_t>(c.n_paths, 100000);
    const std::uint64_t horizon = std::min<std::uint64_t>(c.horizon, 50);
    const SplitCheckReport s =
        ctx.timed("split_check", [&] { return split_marginal_check(model, cert, horizon, n, rng); });
    const bool ok = s.horizon_test.p_value > 0.01 && s.regeneration_test.p_value > 0.01;
    report["split_check"] = {{"horizon", horizon},
                             {"n_paths", n},
                             {"horizon_p_value", s.horizon_test.p_value},
                             {"regeneration_p_value", s.regeneration_test.p_value},
                             {"n_regenerations", s.n_regenerations},
                             {"passed", ok}};
    if (!ok) ctx.flag("SplitCheckRejected", false);
  } catch (const Error& e) {
    report["split_check"] = {{"error", error_json(e)}};
    ctx.fail(e);
  }
  ctx.result.report = report;
  ctx.write("minorization_report.json", report.dump(2) + "\n");
}

void run_verify(Context& ctx) {
  const VerifyReport r = ctx.timed("verify", [&] { return run_verify_suite(ctx.config); });
  json checks = json::array();
  for (const auto& ch : r.checks) {
    checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}, {"seconds", ch.seconds}});
  }
  ctx.result.report = {{"passed", r.all_passed()}, {"checks", checks}};
  ctx.write("verify_report.json", ctx.result.report.dump(2) + "\n");
  if (!r.all_passed()) ctx.flag("VerifyFailed", true);
}

}  // namespace

json to_json(const TailSolution& sol) {
  return {{"method", std::string(to_string(sol.method))},
          {"exponent", sol.exponent},
          {"std_error", sol.std_error},
          {"ci", interval_json(sol.ci)},
          {"bracket", interval_json(sol.bracket)},
          {"residual", sol.residual},
          {"flags", sol.flags}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Internal, path.string(), "cannot open output file");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Internal, path.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Internal, path.string(), "rename failed: " + ec.message());
}

std::optional<TailSolution> deterministic_exponent(const ModelSpec& model, const SolveConfig& solve) {
  if (has_analytic_cgf(model)) {
    return solve_exponent([&](double a) { return CgfValue{cgf_analytic(model, a), 0.0}; }, std::nullopt,
                          CgfMethod::Analytic);
  }
  if (model.is_finite()) {
    return solve_exponent([&](double a) { return CgfValue{cgf_spectral(model, a), 0.0}; }, std::nullopt,
                          CgfMethod::Spectral);
  }
  if (model.kind == ModelKind::Ar1LogReturn) {
    return solve_exponent(
        [&](double a) {
          return CgfValue{cgf_discretized_kernel(model, a, solve.kernel_half_width, solve.kernel_points), 0.0};
        },
        std::nullopt, CgfMethod::DiscretizedKernel);
  }
  return std::nullopt;
}

MinorizationCert configured_cert(const ModelSpec& model, const MinorizationConfig& config) {
  MinorizationCert cert = default_cert(model, config.a_level);
  if (config.delta) cert = with_delta(std::move(cert), *config.delta);
  return cert;
}

double discover_cycle_bracket(std::span<const RegenBlock> blocks, double max_alpha) {
  std::vector<double> lw(blocks.size());
  const double log_n = std::log(static_cast<double>(blocks.size()));
  for (double alpha = 1.0; alpha <= max_alpha; alpha *= 2.0) {
    for (std::size_t i = 0; i < blocks.size(); ++i) lw[i] = alpha * blocks[i].s_check;
    if (log_sum_exp(lw) - log_n > 0.0) return alpha;
  }
  throw Error(ErrorCode::NoUpperBracket, "cycle log moment stays non-positive up to alpha = 1e3");
}

TailSolution solve_cycles(const ModelSpec& model, const MinorizationCert& cert, std::size_t n_cycles,
                          std::uint64_t seed, std::size_t bootstrap) {
  const auto blocks = simulate_cycles(model, cert, n_cycles, derive_seed(seed, kCyclePurpose));
  const double hi = discover_cycle_bracket(blocks);
  EtaOptions opt;
  opt.bootstrap = bootstrap;
  opt.seed = derive_seed(seed, kBootstrapPurpose);
  return solve_eta_cycles(blocks, {std::min(1e-3, 0.5 * hi), hi}, opt);
}

TailSolution solve_mc(const ModelSpec& model, const SolveConfig& solve, std::uint64_t seed,
                      std::optional<Interval> bracket_hint, bool* collapsed) {
  const auto eval = [&](double a) {
    Rng rng(seed);
    return cgf_mc(model, a, solve.cgf_steps, solve.cgf_paths, solve.truncation_m, rng);
  };
  TailSolution sol = solve_exponent(
      [&](double a) {
        const auto r = eval(a);
        return CgfValue{r.value, r.std_error};
      },
      bracket_hint, CgfMethod::MonteCarlo);
  // reliability is judged at the root only
  const bool at_root = eval(sol.exponent).collapsed;
  if (at_root) sol.flags.push_back("EffectiveSampleCollapse");
  if (collapsed) *collapsed = at_root;
  return sol;
}

RunResult run(const RunConfig& config) {
  Context ctx(config);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::filesystem::create_directories(ctx.dir);
  } catch (const std::filesystem::filesystem_error& e) {
    ctx.result.exit_code = exit_status(ErrorCode::Internal);
    ctx.result.fatal.push_back("Internal");
    return ctx.result;
  }
  try {
    if (config.experiment == Experiment::Verify) {
      run_verify(ctx);
    } else {
      const ModelSpec model = ctx.timed("build_model", [&] { return make_model(config.model); });
      switch (config.experiment) {
        case Experiment::Solve: run_solve(ctx, model); break;
        case Experiment::Ruin: run_ruin(ctx, model); break;
        case Experiment::Perpetuity: run_perpetuity(ctx, model); break;
        case Experiment::Garch: run_garch(ctx, model); break;
        case Experiment::Minorize: run_minorize(ctx, model); break;
        case Experiment::Verify: break;
      }
    }
  } catch (const Error& e) {
    ctx.fail(e);
  } catch (const std::exception& e) {
    ctx.fail(Error(ErrorCode::Internal, e.what()));
  }
  ctx.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest = {{"version", MARKOV_RUIN_VERSION},
                   {"experiment", std::string(to_string(config.experiment))},
                   {"seed", config.seed},
                   {"config", serialize_config(config)},
                   {"exponents", ctx.exponents},
                   {"flags", ctx.result.flags},
                   {"fatal", ctx.result.fatal},
                   {"errors", ctx.errors},
                   {"exit_code", ctx.result.exit_code},
                   {"files", ctx.result.files},
                   {"elapsed_seconds", ctx.timings}};
  try {
    ctx.write("manifest.json", manifest.dump(2) + "\n");
  } catch (const Error&) {
    if (ctx.result.exit_code == 0) ctx.result.exit_code = exit_status(ErrorCode::Internal);
  }
  return ctx.result;
}

}  // namespace markov_ruin
