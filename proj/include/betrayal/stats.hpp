#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "betrayal/rng.hpp"

namespace betrayal::stats {

struct DegenerateSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;         // NaN where not applicable
  std::size_t n_a = 0;
  std::size_t n_b = 0;     // 0 for one-sample tests
};

struct BootstrapResult {
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Unbiased (n-1) sample variance.
inline double variance(std::span<const double> xs, double m) {
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
// Absolute error well below 1e-10 over the arguments used here.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_sf(double t, double df) {
  const double x = df / (df + t * t);
  const double tail = 0.5 * detail::incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

inline double student_t_two_sided_p(double t, double df) {
  const double x = df / (df + t * t);
  return std::min(1.0, detail::incomplete_beta(0.5 * df, 0.5, x));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline TestResult one_sample_t(std::span<const double> sample, double mu0) {
  const std::size_t n = sample.size();
  if (n < 2) throw DegenerateSample("one_sample_t: need n >= 2");
  const double m = detail::mean(sample);
  const double var = detail::variance(sample, m);
  if (var <= 0.0) throw DegenerateSample("one_sample_t: zero variance");
  const double t = (m - mu0) / std::sqrt(var / static_cast<double>(n));
  const double df = static_cast<double>(n - 1);
  return {t, student_t_two_sided_p(t, df), df, n, 0};
}

// Welch's unequal-variance two-sample t-test.
inline TestResult two_sample_t(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateSample("two_sample_t: need n >= 2 in each sample");
  const double ma = detail::mean(a), mb = detail::mean(b);
  const double va = detail::variance(a, ma), vb = detail::variance(b, mb);
  if (va <= 0.0 && vb <= 0.0)
    throw DegenerateSample("two_sample_t: both samples have zero variance");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (va * va / (na * na * (na - 1.0)) +
                     vb * vb / (nb * nb * (nb - 1.0)));
  return {t, student_t_two_sided_p(t, df), df, a.size(), b.size()};
}

namespace detail {

// Midranks over the pooled sample; returns ranks aligned with the
// concatenation a++b plus the tie-correction term sum(t^3 - t).
inline std::pair<std::vector<double>, double> midranks(
    std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<std::size_t> idx(n);
  std::vector<double> pooled(n);
  for (std::size_t i = 0; i < a.size(); ++i) pooled[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) pooled[a.size() + i] = b[i];
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<double> ranks(n);
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) tie_term += t * t * t - t;
    i = j + 1;
  }
  return {std::move(ranks), tie_term};
}

inline bool has_ties(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

// Exact two-sided p for the U statistic: enumerate every assignment of
// n_a pooled ranks to sample a and count |U - mu| >= |U_obs - mu|.
inline double exact_mw_p(std::size_t n_a, std::size_t n_b, double u_obs) {
  const std::size_t n = n_a + n_b;
  const double mu = 0.5 * static_cast<double>(n_a) * static_cast<double>(n_b);
  const double dev = std::fabs(u_obs - mu);
  std::vector<std::size_t> comb(n_a);
  for (std::size_t i = 0; i < n_a; ++i) comb[i] = i;
  std::size_t total = 0, extreme = 0;
  while (true) {
    ++total;
    // U_a = sum(ranks of a) - n_a(n_a+1)/2 with ranks = position + 1.
    std::size_t rank_sum = 0;
    for (std::size_t c : comb) rank_sum += c + 1;
    const double u = static_cast<double>(rank_sum) -
                     0.5 * static_cast<double>(n_a) * static_cast<double>(n_a + 1);
    if (std::fabs(u - mu) >= dev - 1e-12) ++extreme;

    // Advance to the next n_a-combination of {0..n-1}, rightmost-first.
    std::size_t i = n_a;
    while (i > 0 && comb[i - 1] == i - 1 + n - n_a) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < n_a; ++j) comb[j] = comb[j - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace detail

// Mann-Whitney U with midrank tie handling. Exact p by full enumeration for
// n_a + n_b <= 12 without ties, otherwise a normal approximation with tie
// and continuity corrections. Statistic reported is U for sample a.
inline TestResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty())
    throw DegenerateSample("mann_whitney_u: empty sample");
  const auto [ranks, tie_term] = detail::midranks(a, b);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double u = rank_sum_a - 0.5 * na * (na + 1.0);
  const double mu = 0.5 * na * nb;

  double p;
  if (a.size() + b.size() <= 12 && !detail::has_ties(a, b)) {
    p = detail::exact_mw_p(a.size(), b.size(), u);
  } else {
    const double n = na + nb;
    double sigma2 = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (sigma2 <= 0.0) {
      p = 1.0;
    } else {
      const double z = std::max(0.0, std::fabs(u - mu) - 0.5) / std::sqrt(sigma2);
      p = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    }
  }
  TestResult r;
  r.statistic = u;
  r.p_value = p;
  r.df = std::numeric_limits<double>::quiet_NaN();
  r.n_a = a.size();
  r.n_b = b.size();
  return r;
}

// Lower nearest-rank quantile (no interpolation).
inline double quantile_nearest(std::vector<double> xs, double q) {
  if (xs.empty()) throw DegenerateSample("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(pos));
  if (rank == 0) rank = 1;
  if (rank > xs.size()) rank = xs.size();
  return xs[rank - 1];
}

// Index-based bootstrap core: `fn` maps a resampled index set to a statistic.
// Used directly by model evaluation (cluster resampling) and by the typed
// overload below.
inline BootstrapResult bootstrap_indices(
    std::size_t n, const std::function<double(std::span<const std::size_t>)>& fn,
    std::size_t replicates, std::uint64_t seed, double level = 0.95) {
  if (n == 0) throw DegenerateSample("bootstrap: empty sample");
  if (replicates < 100)
    throw std::invalid_argument("bootstrap: need at least 100 replicates");
  rng::Xoshiro256 gen(seed);
  std::vector<std::size_t> identity(n);
  for (std::size_t i = 0; i < n; ++i) identity[i] = i;
  const double point = fn(identity);

  std::vector<double> reps(replicates);
  std::vector<std::size_t> draw(n);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < n; ++i)
      draw[i] = static_cast<std::size_t>(gen.bounded(n));
    reps[r] = fn(draw);
  }
  const double m = detail::mean(reps);
  double se = 0.0;
  if (replicates > 1) se = std::sqrt(detail::variance(reps, m));
  const double alpha = 1.0 - level;
  BootstrapResult out;
  out.point = point;
  out.se = se;
  out.ci_low = quantile_nearest(reps, alpha / 2.0);
  out.ci_high = quantile_nearest(reps, 1.0 - alpha / 2.0);
  out.replicates = replicates;
  out.seed = seed;
  return out;
}

inline BootstrapResult bootstrap(
    std::span<const double> sample,
    const std::function<double(std::span<const double>)>& statistic,
    std::size_t replicates, std::uint64_t seed, double level = 0.95) {
  std::vector<double> buf(sample.size());
  auto fn = [&](std::span<const std::size_t> idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) buf[i] = sample[idx[i]];
    return statistic(buf);
  };
  return bootstrap_indices(sample.size(), fn, replicates, seed, level);
}

}  // namespace betrayal::stats
