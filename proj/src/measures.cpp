#include "lerw/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>

#include "lerw/errors.hpp"

namespace lerw {

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

GenFun catalog_phi(CrossingType type) {
  std::vector<Monomial> terms;
  for (const Shape& s : shape_catalog(type)) terms.push_back({s.s1, s.s2, s.probability});
  return GenFun::from_terms(terms);
}

}  // namespace

PhiPair phi_reference() {
  const GenFun f1 = GenFun::from_terms({{2, 0, q(15, 30)},
                                        {1, 1, q(8, 30)},
                                        {0, 2, q(1, 30)},
                                        {2, 1, q(2, 30)},
                                        {3, 0, q(4, 30)}});
  const GenFun f2 = GenFun::from_terms({{2, 0, q(5, 45)},
                                        {1, 1, q(11, 45)},
                                        {0, 2, q(2, 45)},
                                        {2, 1, q(14, 45)},
                                        {3, 0, q(8, 45)},
                                        {1, 2, q(5, 45)}});
  return {f1, f2};
}

PhiPair phi_base() {
  PhiPair phi{catalog_phi(CrossingType::A), catalog_phi(CrossingType::BA)};
  const PhiPair ref = phi_reference();
  if (!(phi.first == ref.first)) {
    throw IntegrityError("Phi1 from catalog " + phi.first.to_string() + " differs from " +
                         ref.first.to_string());
  }
  if (!(phi.second == ref.second)) {
    throw IntegrityError("Phi2 from catalog " + phi.second.to_string() + " differs from " +
                         ref.second.to_string());
  }
  return phi;
}

PhiPair phi_iterate(int n, int cap) {
  if (n < 1) throw std::invalid_argument("phi_iterate needs N >= 1");
  if (n > cap) {
    throw CapacityError("exact Phi_N requested for N = " + std::to_string(n) + " above cap " +
                        std::to_string(cap));
  }
  static std::mutex mu;
  static std::vector<PhiPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (cache.empty()) cache.push_back(phi_base());
  cache.reserve(static_cast<std::size_t>(cap));
  while (static_cast<int>(cache.size()) < n) {
    const PhiPair& base = cache.front();
    const PhiPair& cur = cache.back();
    PhiPair next{base.first.compose(cur.first, cur.second),
                 base.second.compose(cur.first, cur.second)};
    cache.push_back(std::move(next));
  }
  return cache[static_cast<std::size_t>(n - 1)];
}

GenFun phi_tilde(int n, int cap) {
  const PhiPair phi = phi_iterate(n, cap);
  return phi.first * q(11, 14) + phi.second * q(3, 14);
}

long double QuadraticSurd::value() const {
  return static_cast<long double>(p.get_d()) +
         static_cast<long double>(q.get_d()) * std::sqrt(static_cast<long double>(r.get_d()));
}

std::pair<Rational, Rational> QuadraticSurd::enclose(int digits) const {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits + 2));
  mpz_class root;
  const mpz_class radicand = r * scale * scale;
  mpz_sqrt(root.get_mpz_t(), radicand.get_mpz_t());
  const Rational lo_root(root, scale);
  const Rational hi_root(root + 1, scale);
  Rational a = p + q * lo_root;
  Rational b = p + q * hi_root;
  a.canonicalize();
  b.canonicalize();
  if (b < a) std::swap(a, b);
  return {a, b};
}

std::string QuadraticSurd::decimal(int digits) const {
  const auto [lo, hi] = enclose(digits + 2);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  // Round the midpoint; the enclosure is 100x tighter than the last digit.
  const Rational mid = (lo + hi) / 2 * Rational(scale);
  mpz_class rounded = (mid.get_num() * 2 + mid.get_den()) / (mid.get_den() * 2);
  std::string s = mpz_class(abs(rounded)).get_str();
  if (s.size() <= static_cast<std::size_t>(digits)) {
    s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
  }
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return (rounded < 0 ? "-" : "") + s;
}

QuadraticSurd MeanMatrix::lambda() const {
  const Rational tr = m[0][0] + m[1][1];
  const Rational det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Rational disc = tr * tr - 4 * det;
  disc.canonicalize();
  QuadraticSurd s{tr / 2, Rational(1, 2) / Rational(disc.get_den()), disc.get_num() * disc.get_den()};
  for (unsigned long k = 2; k * k <= s.r && k < 100000; ++k) {
    const unsigned long k2 = k * k;
    while (mpz_divisible_ui_p(s.r.get_mpz_t(), k2)) {
      s.r /= k2;
      s.q *= k;
    }
  }
  s.p.canonicalize();
  s.q.canonicalize();
  return s;
}

double MeanMatrix::lambda_value() const { return static_cast<double>(lambda().value()); }

double MeanMatrix::nu() const {
  return static_cast<double>(std::log(2.0L) / std::log(lambda().value()));
}

MeanMatrix mean_matrix() {
  const PhiPair phi = phi_base();
  MeanMatrix mm;
  mm.m[0][0] = phi.first.dx_at_one();
  mm.m[0][1] = phi.first.dy_at_one();
  mm.m[1][0] = phi.second.dx_at_one();
  mm.m[1][1] = phi.second.dy_at_one();
  return mm;
}

Rational exact_mean_exit_time(int n, CrossingType type) {
  if (n < 0) throw std::invalid_argument("negative level");
  const Mat2Q m = mean_matrix().m;
  std::array<Rational, 2> row = is_two_corner(type) ? std::array<Rational, 2>{1, 0}
                                                    : std::array<Rational, 2>{0, 1};
  for (int k = 0; k < n; ++k) {
    row = {row[0] * m[0][0] + row[1] * m[1][0], row[0] * m[0][1] + row[1] * m[1][1]};
  }
  Rational e = row[0] + 2 * row[1];
  e.canonicalize();
  return e;
}

namespace {

struct Term {
  int i;
  int j;
  double c;
};

// 1 - Phi(1 - u, 1 - v) as a list of double terms.
std::array<std::vector<Term>, 2> complement_terms() {
  const PhiPair phi = phi_base();
  const GenFun one = GenFun::constant(Rational(1));
  const GenFun p = one + GenFun::x() * Rational(-1);
  const GenFun r = one + GenFun::y() * Rational(-1);
  std::array<std::vector<Term>, 2> out;
  std::size_t k = 0;
  for (const GenFun* f : {&phi.first, &phi.second}) {
    const GenFun psi = one + f->compose(p, r) * Rational(-1);
    for (const Monomial& m : psi.terms()) out[k].push_back({m.i, m.j, m.c.get_d()});
    ++k;
  }
  return out;
}

double eval_terms(const std::vector<Term>& ts, double u, double v) {
  double s = 0;
  for (const Term& t : ts) s += t.c * std::pow(u, t.i) * std::pow(v, t.j);
  return s;
}

}  // namespace

namespace {

using Series = std::vector<long double>;

Series series_product(const Series& a, const Series& b, std::size_t k_max) {
  Series c(k_max + 1, 0.0L);
  for (std::size_t i = 0; i < a.size() && i <= k_max; ++i) {
    if (a[i] == 0) continue;
    const std::size_t top = std::min(b.size() - 1, k_max - i);
    for (std::size_t j = 0; j <= top; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

}  // namespace

std::vector<long double> exit_time_pmf(int n, long double w1, long double w2, std::size_t k_max) {
  if (n < 0) throw std::invalid_argument("negative level");
  const PhiPair phi = phi_base();
  Series g1(k_max + 1, 0.0L), g2(k_max + 1, 0.0L);
  if (k_max >= 1) g1[1] = 1;
  if (k_max >= 2) g2[2] = 1;
  for (int level = 1; level <= n; ++level) {
    std::vector<Series> pow1{Series(k_max + 1, 0.0L)}, pow2{Series(k_max + 1, 0.0L)};
    pow1[0][0] = pow2[0][0] = 1;
    auto power = [&](std::vector<Series>& pw, const Series& g, int e) -> const Series& {
      while (static_cast<int>(pw.size()) <= e) pw.push_back(series_product(pw.back(), g, k_max));
      return pw[static_cast<std::size_t>(e)];
    };
    auto apply = [&](const GenFun& f) {
      Series out(k_max + 1, 0.0L);
      for (const Monomial& t : f.terms()) {
        const Series term = series_product(power(pow1, g1, t.i), power(pow2, g2, t.j), k_max);
        const long double c = t.c.get_d();
        for (std::size_t k = 0; k <= k_max; ++k) out[k] += c * term[k];
      }
      return out;
    };
    Series h1 = apply(phi.first);
    Series h2 = apply(phi.second);
    g1 = std::move(h1);
    g2 = std::move(h2);
  }
  Series out(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) out[k] = w1 * g1[k] + w2 * g2[k];
  return out;
}

std::map<std::uint64_t, Rational> exact_exit_time_law(int n, CrossingType type) {
  if (n == 0) return {{is_two_corner(type) ? 1u : 2u, Rational(1)}};
  const PhiPair phi = phi_iterate(n);
  const GenFun& f = is_two_corner(type) ? phi.first : phi.second;
  std::map<std::uint64_t, Rational> law;
  for (const Monomial& t : f.terms()) {
    law[static_cast<std::uint64_t>(t.i) + 2 * static_cast<std::uint64_t>(t.j)] += t.c;
  }
  return law;
}

LaplaceValues laplace_G(int n, const std::vector<double>& t_grid) {
  if (n < 0) throw std::invalid_argument("negative level");
  static const std::array<std::vector<Term>, 2> psi = complement_terms();
  const double lambda = mean_matrix().lambda_value();
  const double scale = std::pow(lambda, -n);
  LaplaceValues out;
  out.t = t_grid;
  for (double t : t_grid) {
    double u = -std::expm1(-t * scale);
    double v = -std::expm1(-2 * t * scale);
    for (int k = 0; k < n; ++k) {
      const double nu = eval_terms(psi[0], u, v);
      const double nv = eval_terms(psi[1], u, v);
      u = nu;
      v = nv;
    }
    out.g1.push_back(1 - u);
    out.g2.push_back(1 - v);
    out.gtilde.push_back((11 * (1 - u) + 3 * (1 - v)) / 14);
  }
  return out;
}

Mat4Q reference_type_matrix() {
  const int rows[4][4] = {{19, 5, 5, 1}, {5, 19, 1, 5}, {7, 15, 5, 3}, {15, 7, 3, 5}};
  Mat4Q p;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) p[i][j] = q(rows[i][j], 30);
  }
  return p;
}

Vec4Q reference_alpha() { return {q(11, 28), q(11, 28), q(3, 28), q(3, 28)}; }

namespace {

// Dense Gauss-Jordan over the rationals; returns nullopt if singular.
template <std::size_t N>
std::optional<std::array<Rational, N>> solve_dense(std::array<std::array<Rational, N>, N> a,
                                                   std::array<Rational, N> b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    while (piv < N && a[piv][c] == 0) ++piv;
    if (piv == N) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    const Rational inv = 1 / a[c][c];
    for (Rational& x : a[c]) x *= inv;
    b[c] *= inv;
    for (std::size_t r = 0; r < N; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t k = 0; k < N; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (Rational& x : b) x.canonicalize();
  return b;
}

}  // namespace

TypeChain type_chain() {
  TypeChain tc;
  for (CrossingType k : kAllTypes) {
    tc.p[static_cast<std::size_t>(index_of(k))] = first_cell_groupings(k);
  }
  if (tc.p != reference_type_matrix()) {
    throw IntegrityError("type chain from catalogs differs from the reference matrix");
  }
  // alpha (P - I) = 0 with the last equation replaced by sum(alpha) = 1.
  std::array<std::array<Rational, 4>, 4> a;
  std::array<Rational, 4> b{0, 0, 0, 1};
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 4; ++i) a[j][i] = j == 3 ? Rational(1) : tc.p[i][j] - (i == j ? 1 : 0);
  }
  const auto alpha = solve_dense<4>(a, b);
  if (!alpha) throw IntegrityError("type chain has no unique invariant vector");
  tc.alpha = *alpha;
  if (tc.alpha != reference_alpha()) {
    throw IntegrityError("invariant vector differs from (11, 11, 3, 3) / 28");
  }
  return tc;
}

double chain_power_distance(const Vec4Q& v0, int n) {
  const TypeChain tc = type_chain();
  Vec4Q v = v0;
  for (int k = 0; k < n; ++k) {
    Vec4Q next{0, 0, 0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) next[j] += v[i] * tc.p[i][j];
    }
    v = next;
  }
  double worst = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(Rational(v[i] - tc.alpha[i]).get_d()));
  }
  return worst;
}

namespace {

std::vector<WeightedPath> build_crossings(int n, CrossingType type) {
  if (n == 0) return {{unit_crossing(type, 0), Rational(1)}};
  const std::int64_t span = std::int64_t{1} << (n - 1);
  std::vector<WeightedPath> out;
  for (const Shape& s : shape_catalog(type)) {
    if (s.probability == 0) continue;
    std::vector<std::vector<WeightedPath>> parts;
    for (const ShapeCell& c : s.cells) {
      std::vector<WeightedPath> placed;
      for (const WeightedPath& sub : enumerate_crossings(n - 1, cell_crossing(c.type))) {
        Path p{{}, 0};
        for (LatticePoint x : sub.path.points) {
          p.points.push_back(place_in_cell(x, span * c.entry, span * c.side, span * c.exit, span));
        }
        placed.push_back({std::move(p), sub.probability});
      }
      parts.push_back(std::move(placed));
    }
    std::vector<std::size_t> pick(parts.size(), 0);
    for (;;) {
      WeightedPath w{{{kOrigin}, 0}, s.probability};
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const WeightedPath& piece = parts[k][pick[k]];
        w.path.points.insert(w.path.points.end(), piece.path.points.begin() + 1,
                             piece.path.points.end());
        w.probability *= piece.probability;
      }
      out.push_back(std::move(w));
      std::size_t k = 0;
      while (k < parts.size() && ++pick[k] == parts[k].size()) pick[k++] = 0;
      if (k == parts.size()) break;
    }
  }
  // A Type 2 cell whose sub-crossing skips its side corner can coincide with
  // another expansion, so equal vertex sequences are merged.
  std::map<std::vector<LatticePoint>, std::size_t> seen;
  std::vector<WeightedPath> merged;
  for (WeightedPath& w : out) {
    auto [it, fresh] = seen.emplace(w.path.points, merged.size());
    if (fresh) {
      merged.push_back(std::move(w));
    } else {
      merged[it->second].probability += w.probability;
    }
  }
  Rational total = 0;
  for (const WeightedPath& w : merged) total += w.probability;
  if (total != 1) throw IntegrityError("level crossing mass is " + to_string(total));
  return merged;
}

}  // namespace

std::vector<WeightedPath> enumerate_crossings(int n, CrossingType type) {
  if (n < 0) throw std::invalid_argument("negative level");
  if (n > 3) throw CapacityError("crossing enumeration is limited to level 3");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<WeightedPath>> cache;
  const std::pair<int, int> key{n, index_of(type)};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  std::vector<WeightedPath> built = build_crossings(n, type);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(built)).first->second;
}

ConsistencyReport consistency_identity(int n, const Vec4Q& weights) {
  if (n < 1 || n > 2) throw std::invalid_argument("consistency identity is checked for N = 1, 2");
  using Key = std::vector<LatticePoint>;
  ConsistencyReport rep;
  rep.level = n;
  rep.weights = weights;
  const TypeChain tc = type_chain();
  const std::int64_t span = std::int64_t{1} << n;

  std::array<std::map<Key, Rational>, 4> level_law;
  for (CrossingType j : kAllTypes) {
    for (const WeightedPath& w : enumerate_crossings(n, j)) {
      level_law[static_cast<std::size_t>(index_of(j))][w.path.points] += w.probability;
    }
  }

  // Level-(N+1) crossings, with every cell after the first filled by a fixed
  // representative: the restriction to the first 2^N-cell only sees the first.
  std::array<std::map<Key, Rational>, 4> restricted;
  for (CrossingType k : kAllTypes) {
    auto& acc = restricted[static_cast<std::size_t>(index_of(k))];
    for (const Shape& s : shape_catalog(k)) {
      if (s.probability == 0) continue;
      const ShapeCell& first = s.cells.front();
      std::vector<LatticePoint> tail;
      for (std::size_t c = 1; c < s.cells.size(); ++c) {
        const ShapeCell& cell = s.cells[c];
        const Path rep_path = enumerate_crossings(n, cell_crossing(cell.type)).front().path;
        for (std::size_t i = 1; i < rep_path.points.size(); ++i) {
          tail.push_back(place_in_cell(rep_path.points[i], span * cell.entry, span * cell.side,
                                       span * cell.exit, span));
        }
      }
      for (const WeightedPath& sub : enumerate_crossings(n, cell_crossing(first.type))) {
        Path w{{}, 0};
        for (LatticePoint x : sub.path.points) {
          w.points.push_back(
              place_in_cell(x, span * first.entry, span * first.side, span * first.exit, span));
        }
        w.points.insert(w.points.end(), tail.begin(), tail.end());
        const std::size_t exit = skeleton(w, n).cells.front().exit_time;
        Key key(w.points.begin(), w.points.begin() + static_cast<std::ptrdiff_t>(exit) + 1);
        acc[key] += s.probability * sub.probability;
      }
    }
  }

  std::map<Key, bool> keys;
  for (const auto& m : restricted) {
    for (const auto& kv : m) keys[kv.first] = true;
  }
  for (const auto& m : level_law) {
    for (const auto& kv : m) keys[kv.first] = true;
  }
  rep.restricted_paths = keys.size();

  auto lookup = [](const std::map<Key, Rational>& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? Rational(0) : it->second;
  };
  auto describe = [](const Key& k) { return to_json(Path{k, 0}); };

  // Recover each mixing row as the exact coefficients expressing the
  // restricted law in terms of the four level-N laws (normal equations).
  std::array<std::array<Rational, 4>, 4> gram;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) gram[i][j] = 0;
  }
  std::array<std::array<Rational, 4>, 4> cross;
  for (auto& row : cross) row = {0, 0, 0, 0};
  for (const auto& entry : keys) {
    const Key& key = entry.first;
    std::array<Rational, 4> qv;
    for (std::size_t j = 0; j < 4; ++j) qv[j] = lookup(level_law[j], key);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) gram[i][j] += qv[i] * qv[j];
      for (std::size_t k = 0; k < 4; ++k) cross[k][i] += lookup(restricted[k], key) * qv[i];
    }
  }
  rep.mixing_ok = true;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto row = solve_dense<4>(gram, cross[k]);
    if (!row) throw IntegrityError("level laws are linearly dependent");
    rep.mixing[k] = *row;
    if (rep.mixing[k] != tc.p[k] && rep.mixing_ok) {
      rep.mixing_ok = false;
      rep.first_failure = "mixing row " + std::string(to_string(kAllTypes[k])) +
                          " differs from the type chain";
    }
  }

  rep.weights_ok = true;
  for (const auto& entry : keys) {
    const Key& key = entry.first;
    Rational lhs_mix = 0, rhs_mix = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const Rational lhs = lookup(restricted[k], key);
      Rational rhs = 0;
      for (std::size_t j = 0; j < 4; ++j) rhs += rep.mixing[k][j] * lookup(level_law[j], key);
      if (lhs != rhs && rep.mixing_ok) {
        rep.mixing_ok = false;
        rep.first_failure = "mixing row " + std::string(to_string(kAllTypes[k])) + " fails at " +
                            describe(key) + ": " + to_string(lhs) + " vs " + to_string(rhs);
      }
      lhs_mix += weights[k] * lhs;
      rhs_mix += weights[k] * lookup(level_law[k], key);
    }
    if (lhs_mix != rhs_mix && rep.weights_ok) {
      rep.weights_ok = false;
      if (rep.first_failure.empty()) {
        rep.first_failure = "weighted restriction fails at " + describe(key) + ": " +
                            to_string(lhs_mix) + " vs " + to_string(rhs_mix);
      }
    }
  }
  for (auto& row : rep.mixing) {
    for (Rational& x : row) x.canonicalize();
  }
  return rep;
}

}  // namespace lerw
