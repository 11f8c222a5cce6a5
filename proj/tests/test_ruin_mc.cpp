#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/ruin_mc.hpp"

using namespace markov_ruin;

namespace {

ModelSpec iid(double m, double s2, LossSpec loss = {}) {
  ModelConfig c;
  c.kind = "IidLogNormal";
  c.m = m;
  c.sigma2 = s2;
  c.loss = loss;
  return make_model(c);
}

LossSpec constant(double v) {
  LossSpec l;
  l.kind = LossSpec::Kind::Constant;
  l.value = v;
  return l;
}

LossSpec normal(double mean, double sd) {
  LossSpec l;
  l.kind = LossSpec::Kind::Normal;
  l.mean = mean;
  l.sd = sd;
  return l;
}

ModelSpec garch(double a0, double a1, double b1) {
  ModelConfig c;
  c.kind = "Garch11";
  c.a0 = {a0};
  c.a1 = {a1};
  c.b1 = {b1};
  return make_model(c);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

RuinCurve synthetic_curve(double c, double r, std::size_t n_paths) {
  RuinCurve curve;
  curve.n_paths = n_paths;
  for (int i = 0; i < 10; ++i) {
    const double u = std::pow(10.0, 0.1 * i);
    curve.u_grid.push_back(u);
    curve.psi_hat.push_back(c * std::pow(u, -r));
    curve.ci_lo.push_back(0.0);
    curve.ci_hi.push_back(1.0);
  }
  return curve;
}

}  // namespace

TEST_CASE("deterministic sums") {
  const auto half = [] { return Increment{0.5, 1.0}; };
  const WSupResult r = w_sup_from(half, 20);
  CHECK(r.w_sup == 2.0 - std::ldexp(1.0, -19));
  CHECK(r.w_final == r.w_sup);
  CHECK(r.steps == 20);
  // discount floor stops the path early
  CHECK(w_sup_from(half, 1000).steps < 60);

  const WSupResult zero = w_sup_from([] { return Increment{0.5, 0.0}; }, 20);
  CHECK(zero.w_sup == 0.0);

  const ModelSpec m = iid(std::log(2.0), 0.0, constant(1.0));
  const TailSampleSet set = sample_w_sup(m, 100, 20, 1);
  for (double v : set.samples) CHECK(v == doctest::Approx(2.0 - std::ldexp(1.0, -19)).epsilon(1e-15));
  const std::vector<double> grid{1.0, 3.0};
  const RuinCurve curve = curve_from_samples(set, grid);
  CHECK(curve.psi_hat[0] == 1.0);
  CHECK(curve.psi_hat[1] == 0.0);
  // the running max still rises at the last step
  CHECK(curve.flags == std::vector<std::string>{"HorizonSuspect"});
  CHECK(curve_from_samples(sample_w_sup(m, 100, 1000, 1), grid).flags.empty());
}

TEST_CASE("mean of W_n under negative drift") {
  const double m = 0.3, s2 = 0.04;
  const ModelSpec model = iid(m, s2, normal(1.0, 1.0));
  const double ea = std::exp(-m + 0.5 * s2);
  const std::uint64_t n = 20;
  const double expected = (1.0 - std::pow(ea, static_cast<double>(n))) / (1.0 - ea);
  std::vector<double> w(100'000);
  for (std::size_t i = 0; i < w.size(); ++i) {
    Rng rng = derive_stream(2, i);
    w[i] = simulate_w_sup(model, n, rng).w_final;
  }
  const MeanSe ms = mean_and_se(w);
  CHECK(std::abs(ms.mean - expected) <= 3.0 * ms.std_error);
}

TEST_CASE("slow drift is flagged as a suspect horizon") {
  const ModelSpec m = iid(0.001, 0.01, normal(1.0, 0.1));
  Rng rng(3);
  const std::vector<double> grid{1.0, 10.0};
  const RuinCurve c = estimate_ruin_curve(m, grid, 2000, 100, rng);
  CHECK(c.flags == std::vector<std::string>{"HorizonSuspect"});
}

TEST_CASE("perpetuities") {
  Rng rng(4);
  CHECK(simulate_perpetuity(iid(std::log(2.0), 0.0, constant(1.0)), 1e-12, rng) == doctest::Approx(2.0).epsilon(1e-11));

  const double m = 0.5, s2 = 0.04;
  const TailSampleSet set = sample_perpetuities(iid(m, s2, normal(1.0, 1.0)), 100'000, 1e-10, 5);
  const MeanSe ms = mean_and_se(set.samples);
  CHECK(std::abs(ms.mean - 1.0 / (1.0 - std::exp(-m + 0.5 * s2))) <= 3.0 * ms.std_error);

  CHECK(code_of([&] { simulate_perpetuity(iid(-0.1, 0.01), 1e-10, rng); }) == ErrorCode::NonContracting);
  CHECK(code_of([&] { simulate_perpetuity(iid(0.1, 0.01), 1e-3, rng); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("GARCH stationary draws") {
  Rng rng(6);
  // negligible ARCH term: W* converges to a0 / (1 - b1)
  CHECK(simulate_garch_stationary(garch(1.0, 1e-15, 0.5), 200, rng) == doctest::Approx(2.0).epsilon(1e-9));
  const TailSampleSet set = sample_garch_stationary(garch(1.0, 0.1, 0.8), 10'000, 500, 7);
  for (double v : set.samples) {
    if (v < 1.0) {
      FAIL("sample below a0: " << v);
    }
  }
  // E[sigma^2] = a0 / (1 - a1 - b1)
  const MeanSe ms = mean_and_se(set.samples);
  CHECK(std::abs(ms.mean - 10.0) <= 4.0 * ms.std_error);
}

TEST_CASE("Hill estimator") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pareto(1'000'000);
  for (auto& v : pareto) v = std::pow(1.0 - u(rng), -0.5);
  const HillResult h = hill_estimator(pareto, 1000);
  CHECK(std::abs(h.index - 2.0) <= 3.0 * 2.0 / std::sqrt(1000.0));
  CHECK(h.ci.lo < h.index);
  CHECK(h.ci.hi > h.index);

  const std::vector<double> flat(10'000, 3.0);
  CHECK(code_of([&] { hill_estimator(flat, 100); }) == ErrorCode::InsufficientTail);
  CHECK(code_of([&] { hill_estimator(pareto, 10); }) == ErrorCode::InsufficientTail);
}

TEST_CASE("power-law fit") {
  const RuinCurve c = synthetic_curve(0.1, 2.0, 1'000'000'000);
  const PowerFit free = fit_power_tail(c);
  CHECK(free.slope == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(free.log_c == doctest::Approx(std::log(0.1)).epsilon(1e-10));
  CHECK(std::isnan(free.flatness));
  const PowerFit fixed = fit_power_tail(c, 2.0);
  CHECK(fixed.flatness <= 1e-12);
  CHECK(fixed.log_c == doctest::Approx(std::log(0.1)).epsilon(1e-12));
  CHECK(fixed.n_points == 10);

  // below 10 / n_paths every point is dropped
  CHECK(code_of([] { fit_power_tail(synthetic_curve(1e-6, 2.0, 1000)); }) == ErrorCode::TooFewEvents);
}

TEST_CASE("quantile window grid") {
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i + 1);
  const auto g = quantile_window_grid(s, 0.5, 0.9, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(sorted_quantile(s, 0.5)));
  CHECK(g.back() == doctest::Approx(sorted_quantile(s, 0.9)));
  CHECK(g[2] == doctest::Approx(std::sqrt(g.front() * g.back())));
  const std::vector<double> zeros(100, 0.0);
  CHECK(code_of([&] { quantile_window_grid(zeros, 0.5, 0.9, 5); }) == ErrorCode::TooFewEvents);
}

TEST_CASE("Goldie constant") {
  RegenBlock up, down;
  up.s_check = std::log(2.0);
  up.a_check = 2.0;
  up.b_check = 1.0;
  up.m_check = 1.0;
  down.s_check = std::log(0.5);
  down.a_check = 0.5;
  down.b_check = 1.0;
  down.m_check = 1.5;
  std::vector<RegenBlock> blocks;
  for (int i = 0; i < 100; ++i) {
    blocks.push_back(up);
    blocks.push_back(down);
  }
  const std::vector<double> wr(blocks.size(), 1.0);
  // both terms equal 1; E[A log A] = (2 log 2 - 0.5 log 2) / 2
  const GoldieResult g = estimate_goldie_constant(blocks, wr, 1.0);
  CHECK(g.m_check == doctest::Approx(0.75 * std::log(2.0)));
  CHECK(g.d_hat == doctest::Approx(1.0 / (0.75 * std::log(2.0))));
  CHECK(g.positive);

  const std::vector<RegenBlock> flat(50);
  const std::vector<double> ones(50, 1.0);
  CHECK(code_of([&] { estimate_goldie_constant(flat, ones, 1.0); }) == ErrorCode::DegenerateMcheck);
}

TEST_CASE("CSV output") {
  CHECK(format_significant(1.0 / 3.0) == "0.3333333333");
  CHECK(format_significant(12345.678901234) == "12345.67890");
  CHECK(format_significant(0.0) == "0");

  RuinCurve c = synthetic_curve(0.5, 1.0, 1000);
  c.exponent_used = 1.0;
  std::ostringstream out;
  write_ruin_curve_csv(out, c);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "u,psi_hat,ci_lo,ci_hi,u_pow_r_psi");
  std::getline(in, line);
  CHECK(line == "1.000000000,0.5000000000,0,1.000000000,0.5000000000");
}
