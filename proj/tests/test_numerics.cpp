#include <doctest.h>

#include <cmath>
#include <random>

#include "markov_ruin/errors.hpp"
#include "markov_ruin/numerics.hpp"

using namespace markov_ruin;

TEST_CASE("normal functions agree with erfc") {
  for (double x : {-6.0, -1.5, 0.0, 0.3, 2.0, 8.0}) {
    CHECK(normal_cdf(x) == doctest::Approx(0.5 * std::erfc(-x / std::sqrt(2.0))).epsilon(1e-12));
    CHECK(normal_sf(x) == doctest::Approx(0.5 * std::erfc(x / std::sqrt(2.0))).epsilon(1e-12));
  }
  for (double p : {1e-10, 0.01, 0.5, 0.975}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  CHECK(normal_sf(normal_isf(1e-12)) == doctest::Approx(1e-12).epsilon(1e-8));
}

TEST_CASE("quadrature of the Gaussian density") {
  const double total = integrate([](double x) { return normal_pdf(x); }, -INFINITY, INFINITY);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("log_sum_exp stays finite for large arguments") {
  const std::vector<double> v{1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("wilson interval brackets the proportion") {
  const Interval i = wilson_interval(30, 100);
  CHECK(i.lo < 0.3);
  CHECK(i.hi > 0.3);
  // closed form from the score equation
  const double z = 1.959963984540054, n = 100, p = 0.3;
  const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(i.lo == doctest::Approx(centre - half));
  CHECK(i.hi == doctest::Approx(centre + half));
  CHECK(wilson_interval(0, 10).lo == 0.0);
}

TEST_CASE("derived streams are reproducible and distinct") {
  Rng a = derive_stream(7, 3, 1), b = derive_stream(7, 3, 1), c = derive_stream(7, 4, 1), d = derive_stream(7, 3, 2);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("parallel_for results do not depend on thread count") {
  const int saved = thread_count();
  std::vector<double> one(1000), four(1000);
  set_thread_count(1);
  parallel_for(one.size(), [&](std::size_t i) {
    Rng r = derive_stream(1, i);
    one[i] = std::normal_distribution<double>()(r);
  });
  set_thread_count(4);
  parallel_for(four.size(), [&](std::size_t i) {
    Rng r = derive_stream(1, i);
    four[i] = std::normal_distribution<double>()(r);
  });
  set_thread_count(saved);
  CHECK(one == four);
}

TEST_CASE("KS tests accept matching laws and reject shifted ones") {
  Rng rng(11);
  std::normal_distribution<double> z;
  std::vector<double> a(5000), b(5000), c(5000);
  for (auto& v : a) v = z(rng);
  for (auto& v : b) v = z(rng);
  for (auto& v : c) v = z(rng) + 0.3;
  CHECK(ks_two_sample(a, b).p_value > 0.001);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  CHECK(ks_one_sample(a, normal_cdf).p_value > 0.001);
  // Kolmogorov survival at the 5% critical value
  CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("chi-square tests") {
  const std::vector<double> obs{250, 250, 250, 250}, probs{0.25, 0.25, 0.25, 0.25};
  CHECK(chi_square_gof(obs, probs).statistic == doctest::Approx(0.0));
  CHECK(chi_square_gof(obs, probs).p_value == doctest::Approx(1.0));
  const std::vector<double> skew{400, 200, 200, 200};
  CHECK(chi_square_homogeneity(obs, skew).p_value < 1e-6);
}

TEST_CASE("weighted line fit recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9}, w{1, 2, 3, 4, 5};
  const LineFit f = weighted_line_fit(x, y, w);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("batch means on iid data matches the naive standard error") {
  Rng rng(5);
  std::normal_distribution<double> z;
  std::vector<double> v(32000);
  for (auto& x : v) x = z(rng);
  const MeanSe naive = mean_and_se(v), batched = batch_means(v, 32);
  CHECK(batched.mean == doctest::Approx(naive.mean));
  CHECK(batched.std_error == doctest::Approx(naive.std_error).epsilon(0.4));
}
