#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/markov_models.hpp"
#include "markov_ruin/minorization.hpp"

using namespace markov_ruin;

namespace {

ModelConfig ar1(double c, double mu) {
  ModelConfig m;
  m.kind = "Ar1LogReturn";
  m.c = c;
  m.mu = mu;
  return m;
}

ModelConfig regime() {
  ModelConfig m;
  m.kind = "RegimeSwitchLogNormal";
  m.transition = {{0.9, 0.1}, {0.1, 0.9}};
  m.regime_mu = {0.06, -0.02};
  m.regime_sigma = {0.1, 0.3};
  return m;
}

ModelConfig garch(double a0, double a1, double b1) {
  ModelConfig m;
  m.kind = "Garch11";
  m.a0 = {a0};
  m.a1 = {a1};
  m.b1 = {b1};
  return m;
}

std::vector<ModelConfig> every_kind() {
  std::vector<ModelConfig> out;
  ModelConfig iid;
  iid.kind = "IidLogNormal";
  iid.m = 0.05;
  iid.sigma2 = 0.04;
  out.push_back(iid);
  out.push_back(regime());
  out.push_back(ar1(0.5, 2.0));
  ModelConfig arp;
  arp.kind = "ArpBlock";
  arp.coeffs = {0.5, 0.3};
  arp.mu = 2.0;
  out.push_back(arp);
  ModelConfig sv;
  sv.kind = "SvMixed";
  sv.sv_coeff = 0.8;
  sv.sv_intercept = -0.5;
  sv.sv_sd = 0.3;
  sv.bank_weight = 0.5;
  sv.bank_rate = 0.02;
  out.push_back(sv);
  out.push_back(garch(1.0, 0.1, 0.8));
  ModelConfig rg;
  rg.kind = "Garch11RegimeSwitch";
  rg.transition = {{0.95, 0.05}, {0.2, 0.8}};
  rg.a0 = {1.0, 2.0};
  rg.a1 = {0.1, 0.3};
  rg.b1 = {0.8, 0.5};
  out.push_back(rg);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.field();
  }
  return "";
}

// independent overlap oracle: trapezoid on a fine grid
double overlap(double c, double a) {
  double sum = 0.0;
  const double h = 1e-4;
  for (double y = -12.0; y <= 12.0; y += h) {
    sum += std::min(normal_pdf(y - c * a), normal_pdf(y + c * a)) * h;
  }
  return sum;
}

}  // namespace

TEST_CASE("make_model validation") {
  CHECK(code_of([] { make_model(ar1(1.2, 0.5)); }) == ErrorCode::InvalidParameter);
  CHECK(field_of([] { make_model(ar1(1.2, 0.5)); }) == "c");
  ModelConfig bad = regime();
  bad.transition = {{0.9, 0.2}, {0.1, 0.9}};
  CHECK(field_of([&] { make_model(bad); }) == "transition");
  ModelConfig neg;
  neg.kind = "IidLogNormal";
  neg.sigma2 = -1.0;
  CHECK(field_of([&] { make_model(neg); }) == "sigma2");
  CHECK(field_of([] { make_model(garch(1.0, 0.0, 0.5)); }) == "a1");
  CHECK(field_of([] { make_model(garch(1.0, 0.5, -0.1)); }) == "b1");
  ModelConfig unknown;
  unknown.kind = "Heston";
  CHECK(code_of([&] { make_model(unknown); }) == ErrorCode::UnknownKind);
}

TEST_CASE("iid lognormal has a one-point chain") {
  ModelConfig c;
  c.kind = "IidLogNormal";
  c.m = 0.05;
  c.sigma2 = 0.04;
  const ModelSpec m = make_model(c);
  CHECK(m.n_regimes() == 1);
  CHECK(*stationary_mean_log_discount(m) == doctest::Approx(-0.05));
}

TEST_CASE("regime model has negative stationary drift") {
  const ModelSpec m = make_model(regime());
  REQUIRE(m.stationary.size() == 2);
  CHECK(m.stationary[0] == doctest::Approx(0.5));
  // pi = (1/2, 1/2): E log A = -(0.06 - 0.02) / 2
  CHECK(*stationary_mean_log_discount(m) == doctest::Approx(-0.02));
}

TEST_CASE("step_chain examples") {
  SUBCASE("zero-variance lognormal gives A = 1 exactly") {
    ModelConfig c;
    c.kind = "IidLogNormal";
    const ModelSpec m = make_model(c);
    Rng rng(1);
    ChainState s = default_state(m);
    for (int i = 0; i < 100; ++i) {
      const Transition t = step_chain(m, s, rng);
      CHECK(t.a == 1.0);
      s = t.next;
    }
  }
  SUBCASE("GARCH with b1 = 0, a1 = 1 has E[A] = 1 and B = a0") {
    const ModelSpec m = make_model(garch(1.0, 1.0, 0.0));
    Rng rng(2);
    ChainState s = default_state(m);
    std::vector<double> a(1'000'000);
    for (auto& v : a) {
      const Transition t = step_chain(m, s, rng);
      REQUIRE(t.b == 1.0);
      v = t.a;
      s = t.next;
    }
    const MeanSe ms = mean_and_se(a);
    CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.std_error);
  }
  SUBCASE("AR(1) from x = 0 moves to a standard normal") {
    const ModelSpec m = make_model(ar1(0.5, 2.0));
    Rng rng(3);
    std::vector<double> x(100'000);
    for (auto& v : x) {
      ChainState s = default_state(m);
      s.x[0] = 0.0;
      const Transition t = step_chain(m, s, rng);
      CHECK(t.a == doctest::Approx(std::exp(t.next.x[0] - 2.0)).epsilon(1e-14));
      v = t.next.x[0];
    }
    CHECK(ks_one_sample(x, normal_cdf).p_value > 0.01);
  }
  SUBCASE("dimension mismatch") {
    const ModelSpec m = make_model(ar1(0.5, 2.0));
    Rng rng(4);
    ChainState s;
    s.x = {0.0, 0.0, 0.0};
    CHECK(code_of([&] { step_chain(m, s, rng); }) == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("every kind produces positive finite discounts") {
  for (const auto& c : every_kind()) {
    CAPTURE(c.kind);
    const ModelSpec m = make_model(c);
    Rng rng(5);
    ChainState s = stationary_state(m, rng);
    bool ok = true;
    for (int i = 0; i < 1'000'000 && ok; ++i) {
      const Transition t = step_chain(m, s, rng);
      ok = t.a > 0.0 && std::isfinite(t.a) && std::isfinite(t.b);
      s = t.next;
    }
    CHECK(ok);
  }
}

TEST_CASE("finite chains occupy regimes at the stationary frequencies") {
  const ModelSpec m = make_model(regime());
  Rng rng(6);
  ChainState s = stationary_state(m, rng);
  std::vector<double> in0(1'000'000);
  for (auto& v : in0) {
    s = step_chain(m, s, rng).next;
    v = s.x[0] == 0.0 ? 1.0 : 0.0;
  }
  const MeanSe ms = batch_means(in0, 50);
  CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.std_error);
}

TEST_CASE("AR(1) log discount has stationary mean -mu") {
  const ModelSpec m = make_model(ar1(0.5, 2.0));
  Rng rng(7);
  ChainState s = stationary_state(m, rng);
  std::vector<double> f(1'000'000);
  for (auto& v : f) {
    const Transition t = step_chain(m, s, rng);
    v = t.log_a;
    s = t.next;
  }
  const MeanSe ms = batch_means(f, 50);
  CHECK(std::abs(ms.mean + 2.0) <= 3.0 * ms.std_error);
}

TEST_CASE("minorize_ar1 regeneration probability") {
  const MinorizationCert a = minorize_ar1(0.5, 1.0);
  CHECK(a.delta_a == doctest::Approx(0.6171).epsilon(1e-3 / 0.6171));
  CHECK(a.delta_a == doctest::Approx(overlap(0.5, 1.0)).epsilon(1e-5));
  CHECK(overlap(0.5, 1.0) == doctest::Approx(2.0 * normal_cdf(-0.5)).epsilon(1e-6));

  const MinorizationCert b = minorize_ar1(0.0, 3.0);
  CHECK(b.delta_a == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(b.nu_density(std::vector<double>{0.3}) == doctest::Approx(normal_pdf(0.3)).epsilon(1e-5));

  CHECK(minorize_ar1(0.9, 10.0).delta_a < 0.01);

  // nu integrates to one over its support
  const double mass = integrate([&](double y) { return a.nu_density(std::vector<double>{y}); }, a.box[0].lo,
                                a.box[0].hi, 1e-12, 1e-12);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  Rng rng(8);
  std::vector<double> y(1);
  for (int i = 0; i < 10000; ++i) {
    a.nu_sample(rng, y);
    REQUIRE(y[0] >= a.box[0].lo);
    REQUIRE(y[0] <= a.box[0].hi);
  }
}

TEST_CASE("check_minorization") {
  SUBCASE("AR(1) certificates pass on their model") {
    for (double c : {0.0, 0.5, -0.7, 0.9}) {
      for (double a : {0.5, 1.0, 3.0}) {
        CAPTURE(c);
        CAPTURE(a);
        const ModelSpec m = make_model(ar1(c, 2.0));
        Rng rng(9);
        const MinorizationReport r = check_minorization(m, minorize_ar1(c, a), 100, 100, rng);
        CHECK(r.passed);
        CHECK(r.worst_margin >= -r.slack);
      }
    }
  }
  SUBCASE("doubling delta is caught") {
    const ModelSpec m = make_model(ar1(0.9, 2.0));
    MinorizationCert cert = minorize_ar1(0.9, 1.0);
    cert = with_delta(cert, 2.0 * cert.delta_a);
    Rng rng(10);
    CHECK(code_of([&] { check_minorization(m, cert, 100, 100, rng); }) == ErrorCode::MinorizationViolated);

    const ModelSpec m2 = make_model(ar1(0.5, 2.0));
    MinorizationCert cert2 = minorize_ar1(0.5, 1.0);
    cert2.delta_a *= 2.0;
    CHECK(code_of([&] { check_minorization(m2, cert2, 100, 100, rng); }) == ErrorCode::MinorizationViolated);
  }
  SUBCASE("finite chain with column minima") {
    const ModelSpec m = make_model(regime());
    const MinorizationCert cert = finite_state_cert(m);
    CHECK(cert.delta_a == doctest::Approx(0.2));
    Rng rng(11);
    CHECK(check_minorization(m, cert, 100, 100, rng).passed);
  }
}

TEST_CASE("build_arp_block") {
  Eigen::Matrix2d comp;
  comp << 0.5, 0.3, 1.0, 0.0;
  const double radius = comp.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(radius == doctest::Approx(0.852).epsilon(1e-3));
  const std::vector<double> coeffs{0.5, 0.3};
  const ModelSpec m = build_arp_block(coeffs, 2.0, 1.0);
  CHECK(m.companion_radius == doctest::Approx(radius).epsilon(1e-12));
  CHECK(m.dim == 2);
  CHECK(m.attached_cert != nullptr);

  const std::vector<double> explosive{1.0, 0.1};
  Eigen::Matrix2d comp2;
  comp2 << 1.0, 0.1, 1.0, 0.0;
  CHECK(comp2.eigenvalues().cwiseAbs().maxCoeff() > 1.0);
  CHECK(code_of([&] { build_arp_block(explosive, 2.0, 1.0); }) == ErrorCode::NonStationary);
}

TEST_CASE("AR(p) block with p = 1 matches Ar1LogReturn in law") {
  const std::vector<double> c{0.5};
  const ModelSpec block = build_arp_block(c, 2.0, 1.0);
  const ModelSpec plain = make_model(ar1(0.5, 2.0));
  Rng r1(12), r2(13);
  std::vector<double> xa(100'000), xb(100'000), la(100'000), lb(100'000);
  for (std::size_t i = 0; i < xa.size(); ++i) {
    ChainState a = default_state(block), b = default_state(plain);
    a.x[0] = b.x[0] = 1.0;
    Transition ta, tb;
    for (int k = 0; k < 5; ++k) {
      ta = step_chain(block, a, r1);
      tb = step_chain(plain, b, r2);
      a = ta.next;
      b = tb.next;
    }
    xa[i] = a.x[0];
    xb[i] = b.x[0];
    la[i] = ta.log_a;
    lb[i] = tb.log_a;
  }
  CHECK(ks_two_sample(xa, xb).p_value > 0.01);
  CHECK(ks_two_sample(la, lb).p_value > 0.01);
  CHECK(block.attached_cert->delta_a == doctest::Approx(minorize_ar1(0.5, 1.0).delta_a).epsilon(1e-8));
}

TEST_CASE("loss scaling") {
  ModelConfig c = ar1(0.5, 2.0);
  c.loss.kind = LossSpec::Kind::ShiftedExponential;
  c.loss.rate = 2.0;
  c.loss.shift = -1.0;
  const ModelSpec m = make_model(c);
  const ModelSpec s = with_loss_scaled(m, 3.0);
  CHECK(*s.loss.independent_mean() == doctest::Approx(3.0 * *m.loss.independent_mean()));
  CHECK(code_of([&] { with_loss_scaled(m, 0.0); }) == ErrorCode::InvalidParameter);
}
