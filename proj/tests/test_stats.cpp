#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "betrayal/rng.hpp"
#include "betrayal/stats.hpp"

namespace st = betrayal::stats;

namespace {

// --- oracles -------------------------------------------------------------

// Student-t density.
double t_density(double x, double df) {
  const double c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                   0.5 * std::log(df * M_PI);
  return std::exp(c - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

// Two-sided p via Simpson integration of the density over [-|t|, |t|].
double t_two_sided_p_by_integration(double t, double df) {
  const double a = -std::fabs(t), b = std::fabs(t);
  const int n = 200000;  // even
  const double h = (b - a) / n;
  double acc = t_density(a, df) + t_density(b, df);
  for (int i = 1; i < n; ++i) {
    acc += t_density(a + i * h, df) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return 1.0 - acc * h / 3.0;
}

// Brute-force exact Mann-Whitney two-sided p over all rank assignments.
double mw_exact_p_bruteforce(std::vector<double> a, std::vector<double> b) {
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  auto u_of = [&](const std::vector<bool>& in_a) {
    // count pairs (x in a, y in b) with x > y, + 0.5 per tie
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_a[j]) continue;
        if (pooled[i] > pooled[j]) u += 1.0;
        else if (pooled[i] == pooled[j]) u += 0.5;
      }
    }
    return u;
  };

  // observed U from the actual samples
  double u_obs = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) u_obs += 1.0;
      else if (x == y) u_obs += 0.5;
    }
  }
  const double mu = 0.5 * na * nb;
  const double dev = std::fabs(u_obs - mu);

  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + na, true);
  std::sort(mask.begin(), mask.end());
  std::size_t total = 0, extreme = 0;
  do {
    ++total;
    if (std::fabs(u_of(mask) - mu) >= dev - 1e-12) ++extreme;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("one-sample t on {1,2,3} vs 0 matches integration oracle") {
  const std::vector<double> xs{1.0, 2.0, 3.0};
  auto r = st::one_sample_t(xs, 0.0);
  CHECK(r.df == 2.0);
  CHECK_THAT(r.statistic, Catch::Matchers::WithinAbs(3.4641, 1e-3));
  const double oracle = t_two_sided_p_by_integration(r.statistic, r.df);
  CHECK_THAT(oracle, Catch::Matchers::WithinAbs(0.0742, 1e-3));
  CHECK_THAT(r.p_value, Catch::Matchers::WithinAbs(oracle, 1e-6));
}

TEST_CASE("t CDF reference point (t=1, df=10)") {
  const double sf = st::student_t_sf(1.0, 10.0);
  CHECK_THAT(sf, Catch::Matchers::WithinAbs(0.17044656615103004, 1e-8));
  const double by_integration =
      0.5 * t_two_sided_p_by_integration(1.0, 10.0);
  CHECK_THAT(sf, Catch::Matchers::WithinAbs(by_integration, 1e-4));
}

TEST_CASE("one-sample t: symmetric sample gives t=0, p=1") {
  const std::vector<double> xs{-1.0, 1.0};
  auto r = st::one_sample_t(xs, 0.0);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("one-sample t: degenerate inputs") {
  const std::vector<double> flat{5.0, 5.0, 5.0};
  CHECK_THROWS_AS(st::one_sample_t(flat, 0.0), st::DegenerateSample);
  const std::vector<double> tiny{1.0};
  CHECK_THROWS_AS(st::one_sample_t(tiny, 0.0), st::DegenerateSample);
}

TEST_CASE("doubling a sample never increases the one-sample p-value") {
  betrayal::rng::Xoshiro256 gen(7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> xs;
    const std::size_t n = 3 + gen.bounded(10);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(gen.uniform() * 4.0 - 1.0);
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == m; }))
      continue;
    std::vector<double> doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    const double p1 = st::one_sample_t(xs, 0.0).p_value;
    const double p2 = st::one_sample_t(doubled, 0.0).p_value;
    CHECK(p2 <= p1 + 1e-12);
  }
}

TEST_CASE("Welch two-sample t") {
  SECTION("identical samples give t=0, p=1") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    auto r = st::two_sample_t(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SECTION("hand-computed example") {
    const std::vector<double> a{0.0, 0.0, 1.0, 1.0};
    const std::vector<double> b{1.0, 1.0, 2.0, 2.0};
    auto r = st::two_sample_t(a, b);
    CHECK_THAT(r.statistic, Catch::Matchers::WithinAbs(-2.449489742783178, 1e-9));
    CHECK_THAT(r.df, Catch::Matchers::WithinAbs(6.0, 1e-9));
    const double oracle = t_two_sided_p_by_integration(r.statistic, r.df);
    CHECK_THAT(r.p_value, Catch::Matchers::WithinAbs(oracle, 1e-6));
    CHECK(r.p_value > 0.04);
    CHECK(r.p_value < 0.06);
  }
  SECTION("one zero-variance side is fine under Welch") {
    const std::vector<double> a{2.0, 2.0, 2.0};
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    auto r = st::two_sample_t(a, b);
    // se^2 = 0 + var(b)/4; df collapses to n_b - 1
    const double vb = (2.25 + 0.25 + 0.25 + 2.25) / 3.0;
    CHECK_THAT(r.statistic,
               Catch::Matchers::WithinAbs(-0.5 / std::sqrt(vb / 4.0), 1e-12));
    CHECK_THAT(r.df, Catch::Matchers::WithinAbs(3.0, 1e-9));
  }
  SECTION("both flat throws") {
    const std::vector<double> a{1.0, 1.0};
    CHECK_THROWS_AS(st::two_sample_t(a, a), st::DegenerateSample);
  }
}

TEST_CASE("Mann-Whitney exact case {1,2} vs {3,4}") {
  const std::vector<double> a{1.0, 2.0}, b{3.0, 4.0};
  auto r = st::mann_whitney_u(a, b);
  CHECK(r.statistic == 0.0);
  CHECK_THAT(r.p_value, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(mw_exact_p_bruteforce(a, b),
             Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("Mann-Whitney exact p matches brute force on random small samples") {
  betrayal::rng::Xoshiro256 gen(11);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t na = 1 + gen.bounded(5);
    const std::size_t nb = 1 + gen.bounded(5);
    // distinct values so the exact path is used
    std::vector<double> vals;
    for (std::size_t i = 0; i < na + nb; ++i) vals.push_back(static_cast<double>(i));
    gen.shuffle(vals);
    std::vector<double> a(vals.begin(), vals.begin() + na);
    std::vector<double> b(vals.begin() + na, vals.end());
    auto r = st::mann_whitney_u(a, b);
    const double oracle = mw_exact_p_bruteforce(a, b);
    INFO("na=" << na << " nb=" << nb);
    CHECK_THAT(r.p_value, Catch::Matchers::WithinAbs(oracle, 1e-12));
  }
}

TEST_CASE("Mann-Whitney ties: equal singletons") {
  const std::vector<double> a{3.0}, b{3.0};
  auto r = st::mann_whitney_u(a, b);
  CHECK(r.statistic == 0.5);  // 0.5 * n_a * n_b
  CHECK(r.p_value == 1.0);
}

TEST_CASE("Mann-Whitney U complement identity") {
  betrayal::rng::Xoshiro256 gen(13);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> a, b;
    const std::size_t na = 1 + gen.bounded(20), nb = 1 + gen.bounded(20);
    for (std::size_t i = 0; i < na; ++i)
      a.push_back(static_cast<double>(gen.bounded(8)));
    for (std::size_t i = 0; i < nb; ++i)
      b.push_back(static_cast<double>(gen.bounded(8)));
    auto rab = st::mann_whitney_u(a, b);
    auto rba = st::mann_whitney_u(b, a);
    CHECK_THAT(rab.statistic + rba.statistic,
               Catch::Matchers::WithinAbs(static_cast<double>(na * nb), 1e-9));
    CHECK(rab.p_value >= 0.0);
    CHECK(rab.p_value <= 1.0);
    CHECK_THAT(rab.p_value, Catch::Matchers::WithinAbs(rba.p_value, 1e-9));
  }
}

TEST_CASE("Mann-Whitney detects a planted one-sd shift") {
  betrayal::rng::Xoshiro256 gen(17);
  auto gauss = [&]() {
    // Box-Muller
    const double u1 = std::max(gen.uniform(), 1e-300), u2 = gen.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  std::vector<double> a, b;
  for (int i = 0; i < 200; ++i) a.push_back(gauss());
  for (int i = 0; i < 200; ++i) b.push_back(gauss() + 1.0);
  auto r = st::mann_whitney_u(a, b);
  CHECK(r.p_value < 0.001);
}

TEST_CASE("bootstrap: constant sample collapses") {
  const std::vector<double> xs(10, 4.0);
  auto mean_fn = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto r = st::bootstrap(xs, mean_fn, 200, 42);
  CHECK(r.point == 4.0);
  CHECK(r.se == 0.0);
  CHECK(r.ci_low == 4.0);
  CHECK(r.ci_high == 4.0);
}

TEST_CASE("bootstrap SE of the mean tracks s/sqrt(n)") {
  betrayal::rng::Xoshiro256 gen(101);
  auto gauss = [&]() {
    const double u1 = std::max(gen.uniform(), 1e-300), u2 = gen.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  std::vector<double> xs;
  for (int i = 0; i < 400; ++i) xs.push_back(gauss());
  auto mean_fn = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m = mean_fn(xs);
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var /= (xs.size() - 1);
  const double analytic = std::sqrt(var / xs.size());

  SECTION("B=2000 within 15%") {
    auto r = st::bootstrap(xs, mean_fn, 2000, 1);
    CHECK(std::fabs(r.se - analytic) / analytic < 0.15);
  }
  SECTION("B=10000 within 5%") {
    auto r = st::bootstrap(xs, mean_fn, 10000, 2);
    CHECK(std::fabs(r.se - analytic) / analytic < 0.05);
  }
}

TEST_CASE("bootstrap is deterministic for a fixed seed") {
  const std::vector<double> xs{1.0, 2.0, 5.0, 9.5, -3.0};
  auto mid = [](std::span<const double> v) {
    std::vector<double> c(v.begin(), v.end());
    std::nth_element(c.begin(), c.begin() + c.size() / 2, c.end());
    return c[c.size() / 2];
  };
  auto r1 = st::bootstrap(xs, mid, 500, 99);
  auto r2 = st::bootstrap(xs, mid, 500, 99);
  CHECK(r1.point == r2.point);
  CHECK(r1.se == r2.se);
  CHECK(r1.ci_low == r2.ci_low);
  CHECK(r1.ci_high == r2.ci_high);
  auto r3 = st::bootstrap(xs, mid, 500, 100);
  CHECK(r3.se != r1.se);
}

TEST_CASE("bootstrap rejects too few replicates") {
  const std::vector<double> xs{1.0, 2.0};
  auto mean_fn = [](std::span<const double> v) { return v[0]; };
  CHECK_THROWS_AS(st::bootstrap(xs, mean_fn, 99, 1), std::invalid_argument);
}

TEST_CASE("nearest-rank quantiles are interpolation free") {
  CHECK(st::quantile_nearest({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.0);
  CHECK(st::quantile_nearest({4.0, 1.0, 3.0, 2.0}, 0.25) == 1.0);
  CHECK(st::quantile_nearest({4.0, 1.0, 3.0, 2.0}, 0.75) == 3.0);
  CHECK(st::quantile_nearest({7.0}, 0.5) == 7.0);
  CHECK(st::quantile_nearest({1.0, 2.0, 3.0}, 0.5) == 2.0);
}
