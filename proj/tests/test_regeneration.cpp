#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/minorization.hpp"
#include "markov_ruin/regeneration.hpp"

using namespace markov_ruin;

namespace {

ModelSpec iid() {
  ModelConfig c;
  c.kind = "IidLogNormal";
  c.m = 0.05;
  c.sigma2 = 0.04;
  return make_model(c);
}

ModelSpec ar1() {
  ModelConfig c;
  c.kind = "Ar1LogReturn";
  c.c = 0.5;
  c.mu = 2.0;
  return make_model(c);
}

ModelSpec regime() {
  ModelConfig c;
  c.kind = "RegimeSwitchLogNormal";
  c.transition = {{0.9, 0.1}, {0.1, 0.9}};
  c.regime_mu = {0.06, -0.02};
  c.regime_sigma = {0.1, 0.3};
  c.loss.kind = LossSpec::Kind::PerRegime;
  c.loss.per_regime = {-1.0, 2.0};
  return make_model(c);
}

ModelSpec garch() {
  ModelConfig c;
  c.kind = "Garch11";
  c.a0 = {1.0};
  c.a1 = {0.1};
  c.b1 = {0.8};
  return make_model(c);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("whole-space certificate with delta = 1 regenerates every step") {
  const ModelSpec m = iid();
  const MinorizationCert cert = default_cert(m);
  REQUIRE(cert.delta_a == 1.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const RegenBlock b = simulate_cycle(m, cert, rng);
    CHECK(b.tau == 1);
    CHECK(b.m_check == b.b_check);
    CHECK(rel(b.a_check, std::exp(b.s_check)) <= 1e-12);
    CHECK_FALSE(b.is_initial);
  }
}

TEST_CASE("cycle length is geometric under a whole-space certificate") {
  const ModelSpec m = iid();
  const MinorizationCert cert = with_delta(default_cert(m), 0.25);
  const auto blocks = simulate_cycles(m, cert, 100'000, 2);
  std::vector<double> tau(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) tau[i] = static_cast<double>(blocks[i].tau);
  const MeanSe ms = mean_and_se(tau);
  CHECK(std::abs(ms.mean - 4.0) <= 3.0 * ms.std_error);
}

TEST_CASE("AR(1) cycle lengths have a geometric tail") {
  const ModelSpec m = ar1();
  const auto blocks = simulate_cycles(m, default_cert(m), 100'000, 3);
  std::vector<double> n_axis, log_tail;
  for (std::uint64_t n = 5; n <= 50; ++n) {
    const auto above = std::count_if(blocks.begin(), blocks.end(), [n](const RegenBlock& b) { return b.tau > n; });
    if (above < 20) break;
    n_axis.push_back(static_cast<double>(n));
    log_tail.push_back(std::log(static_cast<double>(above) / static_cast<double>(blocks.size())));
  }
  REQUIRE(n_axis.size() >= 5);
  const LineFit fit = weighted_line_fit(n_axis, log_tail);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r_squared > 0.99);
}

TEST_CASE("initial blocks") {
  SUBCASE("one-state chain regenerates at T0 = 2 with A0 = A1") {
    const ModelSpec m = iid();
    const MinorizationCert cert = default_cert(m);
    Rng rng(4);
    const SplitTrace t = simulate_split_path(m, cert, default_state(m), 20, rng);
    REQUIRE(!t.regeneration_times.empty());
    CHECK(t.regeneration_times.front() == 2);
    const Decomposition d = decompose_trace(t);
    CHECK(d.blocks.front().is_initial);
    CHECK(d.blocks.front().a_check == doctest::Approx(t.steps[0].a).epsilon(1e-14));
  }
  SUBCASE("AR(1) started far from the small set takes longer") {
    const ModelSpec m = ar1();
    const MinorizationCert cert = default_cert(m);
    std::vector<double> far(100'000), near(100'000);
    ChainState x_far = default_state(m), x_near = default_state(m);
    x_far.x[0] = 5.0;
    x_near.x[0] = 0.0;
    for (std::size_t i = 0; i < far.size(); ++i) {
      Rng r1 = derive_stream(5, i, 1), r2 = derive_stream(5, i, 2);
      far[i] = static_cast<double>(simulate_initial_block(m, cert, x_far, r1).tau);
      near[i] = static_cast<double>(simulate_initial_block(m, cert, x_near, r2).tau);
    }
    const MeanSe a = mean_and_se(far), b = mean_and_se(near);
    CHECK(a.mean - b.mean > 3.0 * std::hypot(a.std_error, b.std_error));
  }
}

TEST_CASE("blocks_to_w arithmetic") {
  RegenBlock b0;
  b0.b_check = 1.7;
  b0.is_initial = true;
  const std::vector<RegenBlock> single{b0};
  CHECK(blocks_to_w(single, 0.0) == 1.7);

  RegenBlock unit;
  unit.a_check = 1.0;
  unit.s_check = 0.0;
  unit.b_check = 1.0;
  std::vector<RegenBlock> four(4, unit);
  four[0].is_initial = true;
  CHECK(blocks_to_w(four, 0.0) == doctest::Approx(4.0));
}

TEST_CASE("block reconstruction equals the direct discounted sum") {
  for (const ModelSpec& m : {ar1(), regime(), iid()}) {
    const MinorizationCert cert = m.kind == ModelKind::IidLogNormal ? with_delta(default_cert(m), 0.3) : default_cert(m);
    double worst = 0.0;
    for (std::size_t p = 0; p < 200; ++p) {
      Rng rng = derive_stream(6, p);
      const SplitTrace t = simulate_split_path(m, cert, stationary_state(m, rng), 300, rng);
      const Decomposition d = decompose_trace(t);
      worst = std::max(worst, rel(blocks_to_w(d.blocks, d.remainder), direct_w(t)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("block maxima and GARCH block recursion against the step record") {
  const ModelSpec m = garch();
  const MinorizationCert cert = with_delta(default_cert(m), 0.3);
  Rng rng(7);
  const SplitTrace t = simulate_split_path(m, cert, default_state(m), 2000, rng);
  const Decomposition d = decompose_trace(t);
  REQUIRE(d.blocks.size() > 10);

  // direct W*_n = A_n W*_{n-1} + B_n from W*_0 = w0
  const double w0 = 3.0;
  std::vector<double> wstar(t.steps.size() + 1, w0);
  for (std::size_t n = 1; n <= t.steps.size(); ++n) wstar[n] = t.steps[n - 1].a * wstar[n - 1] + t.steps[n - 1].b;
  const auto z = garch_block_recursion(d.blocks, w0);
  std::uint64_t start = 1;
  for (std::size_t i = 0; i < d.blocks.size(); ++i) {
    const std::uint64_t end = t.regeneration_times[i];  // block i covers [start, end)
    CHECK(rel(z[i], wstar[end - 1]) <= 1e-9);

    double partial = 0.0, disc = 1.0, best = -INFINITY;
    for (std::uint64_t n = start; n < end; ++n) {
      partial += disc * t.steps[n - 1].b;
      disc *= t.steps[n - 1].a;
      best = std::max(best, partial);
    }
    CHECK(rel(d.blocks[i].m_check, best) <= 1e-12);
    CHECK(d.blocks[i].m_check >= t.steps[start - 1].b);
    CHECK(d.blocks[i].tau == end - start);
    start = end;
  }
}

TEST_CASE("cycles are independent and identically distributed") {
  const ModelSpec m = ar1();
  const auto blocks = simulate_cycles(m, default_cert(m), 100'000, 8);
  std::vector<double> s(blocks.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = blocks[i].s_check;
  const MeanSe ms = mean_and_se(s);
  const double var = sample_variance(s);
  double cov = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) cov += (s[i] - ms.mean) * (s[i + 1] - ms.mean);
  const double corr = cov / static_cast<double>(s.size() - 1) / var;
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(s.size())));

  const std::vector<double> first(s.begin(), s.begin() + 50'000), second(s.begin() + 50'000, s.end());
  CHECK(ks_two_sample(first, second).p_value > 0.01);
}

TEST_CASE("split chain marginals") {
  SUBCASE("finite chain") {
    const ModelSpec m = regime();
    Rng rng(9);
    const SplitCheckReport r = split_marginal_check(m, default_cert(m), 20, 20'000, rng, 5000);
    CHECK(r.finite);
    CHECK(r.horizon_test.p_value > 0.001);
    CHECK(r.regeneration_test.p_value > 0.001);
  }
  SUBCASE("AR(1) with the minorize_ar1 certificate") {
    const ModelSpec m = ar1();
    Rng rng(10);
    const SplitCheckReport r = split_marginal_check(m, minorize_ar1(0.5, 1.0), 50, 20'000, rng, 10'000);
    CHECK(r.n_regenerations >= 10'000);
    CHECK(r.horizon_test.p_value > 0.01);
    CHECK(r.regeneration_test.p_value > 0.01);
  }
}

TEST_CASE("cycle cap") {
  const ModelSpec m = iid();
  const MinorizationCert cert = with_delta(default_cert(m), 1e-9);
  Rng rng(11);
  bool overflow = false;
  try {
    simulate_cycle(m, cert, rng, 100);
  } catch (const Error& e) {
    overflow = e.code() == ErrorCode::CycleOverflow;
  }
  CHECK(overflow);
}

TEST_CASE("block dump") {
  RegenBlock b;
  b.tau = 3;
  b.s_check = -0.5;
  b.b_check = 1.25;
  b.m_check = 2.0;
  b.b_star_check = 0.75;
  std::ostringstream out;
  const std::vector<RegenBlock> v{b};
  write_blocks(out, v);
  CHECK(out.str() == "3\t-0.5\t1.25\t2\t0.75\n");
}

TEST_CASE("cycle simulation is independent of thread count") {
  const ModelSpec m = ar1();
  const int saved = thread_count();
  set_thread_count(1);
  const auto a = simulate_cycles(m, default_cert(m), 2000, 12);
  set_thread_count(3);
  const auto b = simulate_cycles(m, default_cert(m), 2000, 12);
  set_thread_count(saved);
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].s_check == b[i].s_check && a[i].tau == b[i].tau;
  CHECK(same);
}
