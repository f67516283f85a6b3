#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "lerw/analysis.hpp"
#include "lerw/catalog.hpp"
#include "lerw/errors.hpp"
#include "lerw/measures.hpp"

using namespace lerw;

namespace {

// a + b sqrt(205)
struct Surd {
  mpq_class a, b;
};

Surd times(const Surd& x, const Surd& y) {
  return {x.a * y.a + 205 * x.b * y.b, x.a * y.b + x.b * y.a};
}

// Exact test of a + b sqrt(205) <= n for b >= 0.
bool at_most(const Surd& x, std::uint64_t n) {
  const mpq_class rest = mpq_class(mpz_class(std::to_string(n))) - x.a;
  if (rest < 0) return false;
  return 205 * x.b * x.b <= rest * rest;
}

int oracle_k(std::uint64_t n) {
  const Surd lam{mpq_class(4, 3), mpq_class(1, 15)};
  Surd p{1, 0};
  int k = 0;
  for (;;) {
    const Surd next = times(p, lam);
    if (!at_most(next, n)) return k;
    p = next;
    ++k;
  }
}

MomentTable synthetic(double s, double nu, std::size_t replicas, double noise, std::uint64_t seed) {
  MomentTable t;
  t.s = s;
  RandomStream rng(seed);
  for (std::size_t n : dyadic_grid(6, 14)) {
    const double base = std::pow(static_cast<double>(n), s * nu);
    std::vector<double> v(replicas);
    for (double& x : v) x = base * (1 + noise * (rng.uniform() - 0.5));
    const MeanStderr ms = mean_and_stderr(v);
    t.rows.push_back({n, noise == 0 ? base : ms.mean, ms.stderr_, replicas});
    t.values.push_back(std::move(v));
  }
  return t;
}

}  // namespace

TEST_CASE("descriptive statistics") {
  CHECK(mean_and_stderr({2, 4, 6}).mean == doctest::Approx(4));
  CHECK(mean_and_stderr({2, 4, 6}).stderr_ == doctest::Approx(std::sqrt(4.0 / 3)));
  CHECK(mean_and_stderr({5}).stderr_ == 0);
  CHECK_THROWS_AS(mean_and_stderr({}), std::invalid_argument);

  KahanSum k;
  k.add(1e16);
  for (int i = 0; i < 1000; ++i) k.add(1.0);
  k.add(-1e16);
  CHECK(k.value() == 1000);

  const LinearFit f = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK_THROWS_AS(least_squares({1, 1}, {2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(least_squares({1}, {2}), std::invalid_argument);

  CHECK(quantile({3, 1, 2, 4}, 0) == 1);
  CHECK(quantile({3, 1, 2, 4}, 1) == 4);
  CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);

  const Interval w = wilson_interval(0, 100);
  CHECK(w.lo == 0);
  CHECK(w.hi == doctest::Approx(0.0370).epsilon(0.01));
  const Interval half = wilson_interval(50, 100);
  CHECK(half.lo < 0.5);
  CHECK(half.hi > 0.5);
  CHECK(half.lo + half.hi == doctest::Approx(1.0));
  const Interval all = wilson_interval(100, 100);
  CHECK(all.hi == 1);
  CHECK(all.lo > 0.95);
}

TEST_CASE("chi-square goodness of fit") {
  SUBCASE("exact agreement") {
    const ChiSquareResult r = chi_square({500, 250, 250}, {0.5, 0.25, 0.25});
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.dof == 2);
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("unnormalized expectations are rescaled") {
    CHECK(chi_square({500, 250, 250}, {2, 1, 1}).statistic == doctest::Approx(0.0));
  }
  SUBCASE("known statistic") {
    // (60-50)^2/50 + (40-50)^2/50 = 4, upper tail of chi2(1) at 4.
    const ChiSquareResult r = chi_square({60, 40}, {0.5, 0.5});
    CHECK(r.statistic == doctest::Approx(4.0));
    CHECK(r.p_value == doctest::Approx(0.0455003).epsilon(1e-5));
  }
  SUBCASE("uniform draws reject the type A shape law") {
    std::vector<std::uint64_t> obs;
    std::vector<double> expected;
    for (const Shape& s : shape_catalog(CrossingType::A)) {
      expected.push_back(s.probability.get_d());
      obs.push_back(s.probability > 0 ? 100000 / 7 : 0);
    }
    CHECK(chi_square(obs, expected).p_value < 1e-6);
  }
  SUBCASE("mass on a zero-probability outcome is a hard failure") {
    std::vector<std::uint64_t> obs;
    std::vector<double> expected;
    for (const Shape& s : shape_catalog(CrossingType::A)) {
      expected.push_back(s.probability.get_d());
      obs.push_back(1000);
    }
    CHECK_THROWS_AS(chi_square(obs, expected), IntegrityError);
    CHECK_NOTHROW(chi_square({10, 0}, {1.0, 0.0}));
  }
  SUBCASE("small expected counts are pooled") {
    const ChiSquareResult r = chi_square({98, 1, 1}, {0.98, 0.01, 0.01});
    CHECK(r.pooled_bins == 2);
    CHECK(r.dof == 1);
  }
  SUBCASE("input errors") {
    CHECK_THROWS_AS(chi_square({1, 2}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(chi_square({1, 2}, {-1.0, 2.0}), std::invalid_argument);
  }
  SUBCASE("two-sample homogeneity") {
    const ChiSquareResult same = chi_square_two_sample({100, 200, 300}, {200, 400, 600});
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.dof == 2);
    CHECK(chi_square_two_sample({300, 100}, {100, 300}).p_value < 1e-10);
    CHECK_THROWS_AS(chi_square_two_sample({0, 0}, {1, 1}), std::invalid_argument);
  }
  CHECK(chi_square_sf(0, 3) == 1);
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("parallel_for visits every index once and forwards errors") {
  for (unsigned threads : {1u, 2u, 4u, 16u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    bool once = true;
    for (auto& h : hits) once = once && h == 1;
    CHECK(once);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
  CHECK_THROWS_AS(parallel_for(50, 3,
                               [](std::size_t i) {
                                 if (i == 17) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("thread count from the environment") {
  ::setenv("LERW_THREADS", "3", 1);
  CHECK(default_threads() == 3);
  ::setenv("LERW_THREADS", "zero", 1);
  CHECK(default_threads() >= 1);
  ::unsetenv("LERW_THREADS");
  CHECK(default_threads() >= 1);
}

TEST_CASE("exponent fit on synthetic tables") {
  const MomentTable exact = synthetic(1, 0.8, 5, 0.0, 1);
  const ExponentFit f = fit_exponent(exact, 1, 0);
  CHECK(std::abs(f.nu_hat - 0.8) < 1e-12);

  MomentTable squared = synthetic(2, 0.8, 5, 0.0, 1);
  CHECK(std::abs(fit_exponent(squared, 1, 0).nu_hat - 0.8) < 1e-12);

  // Bootstrap width shrinks like 1/sqrt(replicas): 16x replicas, about 4x narrower.
  const ExponentFit small = fit_exponent(synthetic(1, 0.8, 100, 0.8, 2), 3, 1000);
  const ExponentFit large = fit_exponent(synthetic(1, 0.8, 1600, 0.8, 4), 3, 1000);
  CHECK(small.resamples == 1000);
  CHECK(small.ci.lo <= small.nu_hat);
  CHECK(small.nu_hat <= small.ci.hi);
  const double ratio = (small.ci.hi - small.ci.lo) / (large.ci.hi - large.ci.lo);
  INFO("width ratio " << ratio);
  CHECK(ratio > 2.5);
  CHECK(ratio < 6.5);

  MomentTable short_table = exact;
  short_table.rows.resize(3);
  short_table.values.resize(3);
  CHECK_THROWS_AS(fit_exponent(short_table), std::invalid_argument);
  MomentTable bad = exact;
  bad.rows[2].estimate = 0;
  CHECK_THROWS_AS(fit_exponent(bad), std::invalid_argument);
}

TEST_CASE("moment estimates on the gasket walk") {
  const BatchConfig cfg{5, 40, 1};
  const std::vector<std::size_t> grid{1, 2, 16, 64, 256};
  const auto tables = estimate_moments({1.0, 2.0}, grid, cfg);
  REQUIRE(tables.size() == 2);
  const MomentTable& m1 = tables[0];
  const MomentTable& m2 = tables[1];
  CHECK(m1.rows[0].estimate == 1.0);
  CHECK(m1.rows[0].stderr_ == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    CHECK(m1.rows[i].estimate <= n);
    CHECK(m2.rows[i].estimate <= n * n);
    CHECK(m1.rows[i].estimate * m1.rows[i].estimate <= m2.rows[i].estimate * (1 + 1e-12));
    CHECK(m1.rows[i].replicas == 40);
  }

  BatchConfig threaded = cfg;
  threaded.threads = 3;
  const MomentTable again = estimate_moments(1.0, grid, threaded);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(again.rows[i].estimate == m1.rows[i].estimate);

  CHECK_THROWS_AS(estimate_moments(0.0, grid, cfg), std::invalid_argument);
  CHECK_THROWS_AS(estimate_moments(1.0, {4, 2}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(sample_walk(kMaxWalkSteps + 1, RandomStream(1), 0), CapacityError);

  const std::string csv = to_csv(m1);
  CHECK(csv.rfind("s,n,estimate,stderr,replicas\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(grid.size() + 1));
}

TEST_CASE("psi and the iterated-logarithm diagnostic") {
  const double nu = mean_matrix().nu();
  CHECK(psi(16, nu) == doctest::Approx(std::pow(16.0, nu) * std::pow(std::log(std::log(16.0)), 1 - nu)));
  CHECK_THROWS_AS(psi(15, nu), std::domain_error);

  const LILReport rep = lil_diagnostic(3000, {9, 12, 2});
  CHECK(rep.nu == nu);
  REQUIRE(rep.traces.size() == 12);
  for (const LILTrace& tr : rep.traces) {
    REQUIRE(!tr.samples.empty());
    CHECK(tr.samples.front().n == 16);
    CHECK(tr.samples.back().n == 3000);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      CHECK(tr.samples[i].n > tr.samples[i - 1].n);
      CHECK(tr.samples[i].running_max >= tr.samples[i - 1].running_max);
      CHECK(tr.samples[i].running_max >= tr.samples[i].ratio);
    }
    CHECK(rep.final_max[tr.id] == tr.samples.back().running_max);
  }
  CHECK(rep.min <= rep.q05);
  CHECK(rep.q05 <= rep.median);
  CHECK(rep.median <= rep.q95);
  CHECK(rep.q95 <= rep.max);

  const LILReport serial = lil_diagnostic(3000, {9, 12, 1});
  CHECK(serial.final_max == rep.final_max);
  CHECK_THROWS_AS(lil_diagnostic(15, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("K(n) brackets n between powers of lambda") {
  for (std::uint64_t n = 1; n <= 3000; ++n) {
    if (lambda_index(n) != oracle_k(n)) {
      FAIL("K(" << n << ") = " << lambda_index(n) << ", oracle " << oracle_k(n));
    }
  }
  for (std::uint64_t n : {4096ULL, 100000ULL, 1ULL << 40, 1234567890123ULL}) CHECK(lambda_index(n) == oracle_k(n));
  CHECK(lambda_index(1) == 0);
  CHECK(lambda_index(2) == 0);
  CHECK(lambda_index(3) == 1);
  CHECK(lambda_index(4096) == 10);
  CHECK_THROWS_AS(lambda_index(0), std::invalid_argument);
}

TEST_CASE("dyadic scale of a prefix") {
  const std::vector<LatticePoint> pts{{0, 0}, {0, 1}, {1, 1}, {2, 2}, {0, 1}};
  CHECK(dyadic_scale(pts, 0) == 0);
  CHECK(dyadic_scale(pts, 1) == 0);
  CHECK(dyadic_scale(pts, 2) == 1);  // |(1,1)|^2 = 3
  CHECK(dyadic_scale(pts, 3) == 2);  // |(2,2)|^2 = 12
  CHECK(dyadic_scale(pts, 4) == 2);
  CHECK_THROWS_AS(dyadic_scale(pts, 5), std::out_of_range);
}

TEST_CASE("tail report structure") {
  const TailReport rep = tail_decay(4096, {0, 1, 2}, {3, 200, 1});
  CHECK(rep.k == 10);
  REQUIRE(rep.rows.size() == 3);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const TailRow& r = rep.rows[i];
    CHECK(r.short_p >= 0);
    CHECK(r.short_p <= 1);
    CHECK(r.long_p >= 0);
    CHECK(r.long_p <= 1);
    CHECK(r.short_ci.lo <= r.short_p);
    CHECK(r.short_p <= r.short_ci.hi);
    CHECK(r.short_bound >= 0);
    CHECK(r.short_bound <= 1);
    CHECK(r.long_bound >= 0);
    CHECK(r.long_bound <= 1);
    if (i > 0) {
      CHECK(r.short_count <= rep.rows[i - 1].short_count);
      CHECK(r.long_count <= rep.rows[i - 1].long_count);
      CHECK(r.short_bound <= rep.rows[i - 1].short_bound);
      CHECK(r.long_bound <= rep.rows[i - 1].long_bound);
    }
  }
  const std::string csv = to_csv(rep);
  CHECK(csv.rfind("n,K,M,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK_THROWS_AS(tail_decay(4096, {10}, {3, 10, 1}), std::invalid_argument);
  CHECK_THROWS_AS(tail_decay(4096, {}, {3, 10, 1}), std::invalid_argument);
}

TEST_CASE("superexponential decay verdicts") {
  CHECK(superexponential_decay({0.5, 0.1, 0.001}).ok);
  CHECK(superexponential_decay({0.3, 0.1, 0.01, 1e-5}).ok);
  CHECK_FALSE(superexponential_decay({0.5, 0.1, 0.03}).ok);   // smaller second drop
  CHECK_FALSE(superexponential_decay({0.5, 0.1, 0.05}).ok);   // shrinking drops
  CHECK_FALSE(superexponential_decay({0.1, 0.2, 0.001}).ok);  // increase
  const DecayVerdict zero = superexponential_decay({0.1, 0.01, 0.0});
  CHECK_FALSE(zero.ok);
  CHECK(zero.reason.find("zero") != std::string::npos);
  CHECK_FALSE(superexponential_decay({0.1, 0.01}).ok);
}

TEST_CASE("law comparison argument checks") {
  CHECK_THROWS_AS(compare_with_ellf(0, CrossingType::A, 10, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(compare_with_ellf(4, CrossingType::A, 10, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(compare_with_ellf(1, CrossingType::A, 0, 1, 1), std::invalid_argument);
  // Thread-count invariance of the full pipeline.
  const LawComparison a = compare_with_ellf(1, CrossingType::B, 2000, 8, 1);
  const LawComparison b = compare_with_ellf(1, CrossingType::B, 2000, 8, 3);
  CHECK(a.two_sample.statistic == b.two_sample.statistic);
  CHECK(a.sampler_vs_exact.statistic == b.sampler_vs_exact.statistic);
  CHECK(a.zero_mass_hits == 0);
}
