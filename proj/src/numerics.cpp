#include "markov_ruin/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t purpose) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(purpose + 0x5851f42d4c957f2dULL));
}

Rng derive_stream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t purpose) {
  const std::uint64_t base = derive_seed(master_seed, purpose);
  return Rng(splitmix64(base ^ splitmix64(index)));
}

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
  const int explicit_n = g_threads.load();
  if (explicit_n > 0) return explicit_n;
  if (const char* env = std::getenv("MARKOV_RUIN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : 0); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(kChunk);
        if (start >= n) return;
        const std::size_t stop = std::min(n, start + kChunk);
        for (std::size_t i = start; i < stop; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double normal_isf(double q) {
  return boost::math::quantile(
      boost::math::complement(boost::math::normal_distribution<double>(0.0, 1.0), q));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 20, rel_tol, &err, &l1);
  if (!std::isfinite(value) || err > abs_tol + rel_tol * std::abs(value)) {
    throw Error(ErrorCode::QuadratureFailure,
                "integral did not converge (estimate " + std::to_string(value) + ", error " +
                    std::to_string(err) + ")");
  }
  return value;
}

MeanSe mean_and_se(std::span<const double> v) {
  MeanSe out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) out.std_error = std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
  return out;
}

MeanSe batch_means(std::span<const double> v, std::size_t n_batches) {
  MeanSe out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  n_batches = std::min(n_batches, v.size());
  if (n_batches < 2) return out;
  const std::size_t per = v.size() / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(b * per);
    const auto last = (b + 1 == n_batches) ? v.end() : first + static_cast<std::ptrdiff_t>(per);
    means[b] = std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
  }
  out.std_error = std::sqrt(sample_variance(means) / static_cast<double>(n_batches));
  return out;
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return {};
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  return {d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d)};
}

TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) return {};
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return {d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d)};
}

namespace {
double chi_square_sf(double stat, double df) {
  if (df < 1.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), stat));
}
}  // namespace

TestResult chi_square_homogeneity(std::span<const double> counts_a, std::span<const double> counts_b) {
  const std::size_t k = std::min(counts_a.size(), counts_b.size());
  const double na = std::accumulate(counts_a.begin(), counts_a.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  const double nb = std::accumulate(counts_b.begin(), counts_b.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  const double n = na + nb;
  double stat = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double col = counts_a[c] + counts_b[c];
    if (col <= 0.0) continue;
    ++used;
    const double ea = na * col / n;
    const double eb = nb * col / n;
    stat += (counts_a[c] - ea) * (counts_a[c] - ea) / ea + (counts_b[c] - eb) * (counts_b[c] - eb) / eb;
  }
  return {stat, chi_square_sf(stat, used - 1)};
}

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probs) {
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < std::min(observed.size(), probs.size()); ++c) {
    if (probs[c] <= 0.0) continue;
    ++used;
    const double e = n * probs[c];
    stat += (observed[c] - e) * (observed[c] - e) / e;
  }
  return {stat, chi_square_sf(stat, used - 1)};
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
    syy += wi * (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace markov_ruin
