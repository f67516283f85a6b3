#pragma once

// Exact renormalization data: generating functions, mean matrix, Perron root,
// Laplace transforms of scaled exit times, the backward type chain and the
// consistency identity behind the infinite-gasket walk.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lerw/catalog.hpp"
#include "lerw/genfun.hpp"
#include "lerw/paths.hpp"
#include "lerw/rational.hpp"

namespace lerw {

using PhiPair = std::pair<GenFun, GenFun>;

// The two generating functions as published, written out by hand.
PhiPair phi_reference();

// Built from the type A and type BA catalogs; throws IntegrityError if they
// disagree with phi_reference().
PhiPair phi_base();

constexpr int kDefaultPhiCap = 6;

// Phi_N as exact polynomials. Throws CapacityError for N > cap.
PhiPair phi_iterate(int n, int cap = kDefaultPhiCap);

// (11/14) Phi^(1)_N + (3/14) Phi^(2)_N.
GenFun phi_tilde(int n, int cap = kDefaultPhiCap);

// p + q * sqrt(r).
struct QuadraticSurd {
  Rational p;
  Rational q;
  mpz_class r;

  long double value() const;
  std::string decimal(int digits) const;
  // [lo, hi] enclosure with hi - lo <= 10^-digits.
  std::pair<Rational, Rational> enclose(int digits) const;
};

using Mat2Q = std::array<std::array<Rational, 2>, 2>;

struct MeanMatrix {
  Mat2Q m;

  QuadraticSurd lambda() const;
  double lambda_value() const;
  double nu() const;
};

MeanMatrix mean_matrix();

// E[T^{ex,N}] exactly: (row of M^N for the start type) . (1, 2).
Rational exact_mean_exit_time(int n, CrossingType type);

// Law of T^{ex,N} = s1 + 2 s2 truncated at k_max: entry k is P[T = k] for a
// start mixture (w1 on the two-corner types, w2 on the three-corner types).
// Built from Phi in extended precision by truncated power-series composition.
std::vector<long double> exit_time_pmf(int n, long double w1, long double w2, std::size_t k_max);

// Exact law of T^{ex,N} for a single start type (N <= phi cap).
std::map<std::uint64_t, Rational> exact_exit_time_law(int n, CrossingType type);

struct LaplaceValues {
  std::vector<double> t;
  std::vector<double> g1;
  std::vector<double> g2;
  std::vector<double> gtilde;
};

// G^(i)_N(t) = Phi^(i)_N(exp(-t / lambda^N), exp(-2 t / lambda^N)), iterated in
// the complement variables 1 - x, 1 - y so that arguments near 1 keep precision.
LaplaceValues laplace_G(int n, const std::vector<double>& t_grid);

using Mat4Q = std::array<std::array<Rational, 4>, 4>;
using Vec4Q = std::array<Rational, 4>;

struct TypeChain {
  Mat4Q p;
  Vec4Q alpha;
};

Mat4Q reference_type_matrix();
Vec4Q reference_alpha();

// Rows are first-cell groupings of the four catalogs; throws IntegrityError on
// mismatch with the reference matrix.
TypeChain type_chain();

// Max-norm distance between v . P^n and alpha, evaluated exactly then rounded.
double chain_power_distance(const Vec4Q& v, int n);

struct WeightedPath {
  Path path;
  Rational probability;
};

// Every loopless level-N crossing of the given type with positive weight.
// Level 0 is the unit crossing; higher levels expand each cell of a level-1
// shape by a level-(N-1) crossing of type A (Type 1 cell) or BA (Type 2 cell).
std::vector<WeightedPath> enumerate_crossings(int n, CrossingType type);

// Sum of probabilities per restricted path, keyed by the vertex sequence.
struct ConsistencyReport {
  int level = 1;
  Vec4Q weights;
  Mat4Q mixing;            // recovered P_kj
  bool mixing_ok = false;  // mixing rows match the type chain
  bool weights_ok = false; // weighted restriction reproduces the level-N mixture
  std::size_t restricted_paths = 0;
  std::string first_failure;

  bool ok() const { return mixing_ok && weights_ok; }
};

// Exact check at level N in {1, 2}: restricting level-(N+1) crossings to their
// first 2^N-cell gives the mixing rows of the type chain, and the weight
// vector reproduces itself.
ConsistencyReport consistency_identity(int n, const Vec4Q& weights);

}  // namespace lerw
