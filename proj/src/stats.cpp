#include "lerw/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "lerw/errors.hpp"

namespace lerw {

void KahanSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

MeanStderr mean_and_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
  KahanSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  if (xs.size() == 1) return {mean, 0.0};
  KahanSum d;
  for (double x : xs) d.add((x - mean) * (x - mean));
  return {mean, std::sqrt(d.value() / (n - 1) / n)};
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares needs two points");
  KahanSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double n = static_cast<double>(x.size());
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() == 0.0) throw std::invalid_argument("least squares needs distinct x values");
  const double slope = sxy.value() / sxx.value();
  return {slope, my - slope * mx};
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  // The endpoints are exact at k = 0 and k = n; the formula leaves rounding residue there.
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2, statistic / 2);
}

ChiSquareResult chi_square(const std::vector<std::uint64_t>& observed,
                           const std::vector<double>& expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("category count mismatch");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 0) throw std::invalid_argument("negative expected probability");
    if (expected[i] == 0 && observed[i] != 0) {
      throw IntegrityError("observed " + std::to_string(observed[i]) +
                           " draws of zero-probability outcome " + std::to_string(i));
    }
    total += observed[i];
  }
  double mass = 0;
  for (double e : expected) mass += e;
  if (mass <= 0) throw std::invalid_argument("expected probabilities sum to zero");

  // Bins with expected count below 5 are pooled into one.
  ChiSquareResult r;
  std::vector<std::pair<double, double>> bins;  // (observed, expected count)
  double small_obs = 0, small_exp = 0;
  const double n = static_cast<double>(total);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] == 0) continue;
    const double e = n * expected[i] / mass;
    if (e < 5) {
      small_obs += static_cast<double>(observed[i]);
      small_exp += e;
      ++r.pooled_bins;
    } else {
      bins.emplace_back(static_cast<double>(observed[i]), e);
    }
  }
  if (small_exp > 0) bins.emplace_back(small_obs, small_exp);
  KahanSum stat;
  for (auto [o, e] : bins) stat.add((o - e) * (o - e) / e);
  r.statistic = stat.value();
  r.dof = bins.empty() ? 0 : bins.size() - 1;
  r.p_value = chi_square_sf(r.statistic, static_cast<double>(r.dof));
  return r;
}

ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("category count mismatch");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (na == 0 || nb == 0) throw std::invalid_argument("empty sample");
  ChiSquareResult r;
  KahanSum stat;
  std::size_t used = 0;
  double pool_a = 0, pool_b = 0;
  auto add = [&](double oa, double ob) {
    const double tot = oa + ob;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    stat.add((oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb);
    ++used;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double oa = static_cast<double>(a[i]);
    const double ob = static_cast<double>(b[i]);
    if (oa + ob == 0) continue;
    if (std::min((oa + ob) * na, (oa + ob) * nb) / (na + nb) < 5) {
      pool_a += oa;
      pool_b += ob;
      ++r.pooled_bins;
      continue;
    }
    add(oa, ob);
  }
  if (pool_a + pool_b > 0) add(pool_a, pool_b);
  r.statistic = stat.value();
  r.dof = used == 0 ? 0 : used - 1;
  r.p_value = chi_square_sf(r.statistic, static_cast<double>(r.dof));
  return r;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

unsigned default_threads() {
  if (const char* env = std::getenv("LERW_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lerw
