#pragma once

// Monte Carlo estimators on the infinite-gasket walk: displacement moments,
// exponent fits, iterated-logarithm band and scale tails.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lerw/sampler.hpp"
#include "lerw/stats.hpp"

namespace lerw {

struct BatchConfig {
  std::uint64_t seed = 1;
  std::size_t replicas = 100;
  unsigned threads = 1;
};

// Longest walk prefix any estimator will expand.
constexpr std::size_t kMaxWalkSteps = 20'000'000;

// Replica r of a batch uses RandomStream(seed).split(r). Throws CapacityError
// above kMaxWalkSteps and IntegrityError if the prefix is not loopless.
InfiniteWalkState sample_walk(std::size_t steps, const RandomStream& base, std::size_t replica);

struct MomentRow {
  std::size_t n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
};

struct MomentTable {
  double s = 1.0;
  std::vector<MomentRow> rows;
  // values[row][replica] = |X(n)|^s, kept for the bootstrap.
  std::vector<std::vector<double>> values;
};

// One table per exponent, all computed from the same trajectories.
std::vector<MomentTable> estimate_moments(const std::vector<double>& s_list,
                                          const std::vector<std::size_t>& n_list,
                                          const BatchConfig& cfg);
MomentTable estimate_moments(double s, const std::vector<std::size_t>& n_list,
                             const BatchConfig& cfg);

// n = 2^lo, ..., 2^hi.
std::vector<std::size_t> dyadic_grid(int lo, int hi);

struct ExponentFit {
  double s = 1.0;
  double nu_hat = 0.0;
  double intercept = 0.0;
  Interval ci;  // 95% percentile bootstrap over replicas
  std::size_t resamples = 0;
};

// Slope of log E|X(n)|^s against log n, divided by s. Needs at least four rows
// with positive estimates; std::invalid_argument otherwise.
ExponentFit fit_exponent(const MomentTable& table, std::uint64_t seed = 1,
                         std::size_t resamples = 1000);

// n^nu (log log n)^(1 - nu), defined for n >= 16.
double psi(double n, double nu);

struct LILSample {
  std::size_t n = 0;
  double ratio = 0.0;        // |X(n)| / psi(n)
  double running_max = 0.0;  // max over 16 <= m <= n
};

struct LILTrace {
  std::size_t id = 0;
  std::vector<LILSample> samples;  // geometric grid in n
};

struct LILReport {
  double nu = 0.0;
  std::size_t n_max = 0;
  std::vector<LILTrace> traces;
  std::vector<double> final_max;
  double min = 0.0, q05 = 0.0, median = 0.0, q95 = 0.0, max = 0.0;
  double band_lo = 0.02, band_hi = 50.0;

  bool in_band() const { return min >= band_lo && max <= band_hi; }
};

LILReport lil_diagnostic(std::size_t n_max, const BatchConfig& cfg);

// K(n) with lambda^K <= n < lambda^(K+1), decided with an exact enclosure of lambda.
int lambda_index(std::uint64_t n);

// D_n: the least M >= 0 with |X(i)| <= 2^M for all i <= n.
int dyadic_scale(const std::vector<LatticePoint>& points, std::size_t n);

struct TailRow {
  int m = 0;
  std::uint64_t short_count = 0;  // D_n < K - M
  std::uint64_t long_count = 0;   // D_n > K + M
  double short_p = 0.0;
  double long_p = 0.0;
  Interval short_ci;
  Interval long_ci;
  // Exit-time bounds P[T^{ex,K-M} > n] and P[T^{ex,K+M} < n] from the exact
  // generating functions, in extended precision (resolution about 1e-15).
  double short_bound = 0.0;
  double long_bound = 0.0;
};

struct TailReport {
  std::size_t n = 0;
  int k = 0;
  std::size_t replicas = 0;
  std::vector<TailRow> rows;
};

// Requires K(n) > max M.
TailReport tail_decay(std::size_t n, const std::vector<int>& m_list, const BatchConfig& cfg);

struct DecayVerdict {
  bool ok = false;
  std::string reason;
};

// Strictly positive probabilities whose logarithms fall by a growing amount
// at every step.
DecayVerdict superexponential_decay(const std::vector<double>& probs);

struct LawComparison {
  int level = 1;
  CrossingType type = CrossingType::A;
  std::size_t samples = 0;  // per side
  std::size_t categories = 0;
  ChiSquareResult two_sample;        // recursive sampler against ELLF of conditioned walks
  ChiSquareResult sampler_vs_exact;  // against the enumerated crossing law
  ChiSquareResult ellf_vs_exact;
  // Draws whose coarse level-1 shape has probability zero, both sides.
  std::uint64_t zero_mass_hits = 0;
};

// Full-path law comparison at level 1..3.
LawComparison compare_with_ellf(int level, CrossingType type, std::size_t samples,
                                std::uint64_t seed, unsigned threads);

std::string to_csv(const MomentTable& t);
std::string to_csv(const TailReport& t);

}  // namespace lerw
