#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lerw/random.hpp"

namespace lerw {

// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_and_stderr(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares; throws std::invalid_argument on fewer than two
// distinct x values.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes in n trials at normal quantile z.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

// Empirical quantile with linear interpolation; q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t pooled_bins = 0;  // bins merged because their expected count was below 5
};

// Pearson goodness of fit. Outcomes with zero expected probability must have
// zero observed count (IntegrityError otherwise) and are excluded from the
// support.
ChiSquareResult chi_square(const std::vector<std::uint64_t>& observed,
                           const std::vector<double>& expected);

// Two-sample homogeneity test on a shared set of categories.
ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                      const std::vector<std::uint64_t>& b);

// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once, so writes to per-index slots are race-free and the
// outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

// Thread count from LERW_THREADS, else the hardware concurrency (at least 1).
unsigned default_threads();

}  // namespace lerw
