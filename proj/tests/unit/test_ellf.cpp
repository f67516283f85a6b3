#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>

#include "lerw/catalog.hpp"
#include "lerw/ellf.hpp"
#include "lerw/measures.hpp"
#include "lerw/srw.hpp"
#include "lerw/stats.hpp"
#include "oracles.hpp"

using namespace lerw;

namespace {

Path shrink(const Path& w, int k) {
  Path out{{}, w.scale - k};
  const std::int64_t s = std::int64_t{1} << k;
  for (LatticePoint p : w.points) out.points.push_back({p.u / s, p.v / s});
  return out;
}

Path mirrored(Path w) {
  for (LatticePoint& p : w.points) p = swap_ab(p);
  return w;
}

// Inverse of place_in_cell at span 2.
LatticePoint to_cell_frame(LatticePoint p, const ShapeCell& c, std::int64_t span) {
  const LatticePoint db = c.side - c.entry;
  const LatticePoint da = c.exit - c.entry;
  const LatticePoint d = p - c.entry;
  const std::int64_t det = db.u * da.v - da.u * db.v;
  return {span * (d.u * da.v - da.u * d.v) / det, span * (db.u * d.v - d.u * db.v) / det};
}

std::vector<double> catalog_law(CrossingType t) {
  std::vector<double> p(11, 0.0);
  for (const Shape& s : shape_catalog(t)) p[static_cast<std::size_t>(s.label)] += s.probability.get_d();
  return p;
}

std::vector<Path> conditioned(int level, CrossingType t, int count, std::uint64_t seed) {
  RandomStream rng(seed);
  const ConditionedWalk walk({level, t});
  std::vector<Path> out;
  for (int i = 0; i < count; ++i) out.push_back(walk.sample(rng));
  return out;
}

}  // namespace

TEST_CASE("chronological erasure") {
  const Path loopless = make_path({kOrigin, {1, 0}, {1, 1}, {0, 2}});
  CHECK(erase_chronological(loopless) == loopless);
  const Path w = make_path({kOrigin, {0, 1}, kOrigin, {1, 0}, {1, 1}, {0, 2}});
  CHECK(erase_chronological(w) == loopless);

  RandomStream rng(3);
  for (int i = 0; i < 300; ++i) {
    const Path raw = oracle::stage_walk(kOrigin, 3, rng);
    CHECK(erase_chronological(raw) == oracle::loop_erase_naive(raw));
  }
}

TEST_CASE("a level-1 path whose visit to b is erased inside a loop") {
  // Search conditioned BA walks for one whose erasure no longer passes b_1.
  std::optional<Path> found;
  for (const Path& w : conditioned(1, CrossingType::BA, 200, 8)) {
    const Path e = erase_chronological(w);
    if (std::find(e.points.begin(), e.points.end(), corner_b(1)) == e.points.end()) {
      found = w;
      break;
    }
  }
  REQUIRE(found.has_value());
  const Path e = ellf(*found, 1);
  CHECK(e.front() == kOrigin);
  CHECK(e.back() == corner_a(1));
  CHECK(is_loopless(e));
}

TEST_CASE("ellf is chronological erasure at level 1") {
  for (CrossingType t : kAllTypes) {
    for (const Path& w : conditioned(1, t, 300, 10 + static_cast<std::uint64_t>(index_of(t)))) {
      const Path e = ellf(w, 1);
      CHECK(e == erase_chronological(w));
      CHECK(e == oracle::loop_erase_naive(w));
    }
  }
}

TEST_CASE("largest-loop erasure keeps the coarse erasure") {
  CHECK(erase_largest(make_path({kOrigin, {1, 0}, {1, 1}, {0, 2}}), 1).result ==
        make_path({kOrigin, {1, 0}, {1, 1}, {0, 2}}));
  int n = 0;
  for (int level = 1; level <= 3; ++level) {
    for (CrossingType t : kAllTypes) {
      for (const Path& w : conditioned(level, t, 90, 100 + static_cast<std::uint64_t>(level * 4 + index_of(t)))) {
        const LargestErasure le = erase_largest(w, level);
        CHECK(coarse_grain(le.result, level - 1) == le.coarse);
        CHECK(le.coarse.points == oracle::loop_erase_naive(coarse_grain(w, level - 1)).points);
        CHECK(is_path(le.result));
        for (const Loop& lp : find_loops(le.result)) CHECK(lp.scale() < level - 1);
        ++n;
      }
    }
  }
  CHECK(n == 1080);
}

TEST_CASE("ellf output is loopless, idempotent and ends at the target") {
  for (int level = 1; level <= 4; ++level) {
    for (CrossingType t : kAllTypes) {
      for (const Path& w : conditioned(level, t, 60, 200 + static_cast<std::uint64_t>(level * 4 + index_of(t)))) {
        const Path e = ellf(w);
        CHECK(is_path(e));
        CHECK(find_loops(e).empty());
        CHECK(e.front() == kOrigin);
        CHECK(e.back() == crossing_target(t, level));
        CHECK(ellf(e, level) == e);
        CHECK(hatQ(w, level, level) == coarse_grain(w, level));
        CHECK(hatQ(w, level, 0) == e);
        for (int stop = 0; stop <= level; ++stop) {
          const Path part = ellf_partial(w, level, stop);
          CHECK(coarse_grain(ellf(part, level), stop) == coarse_grain(e, stop));
          // Loops that survive are confined below the stop scale; their
          // diameter is not, since count-once excursions pass cell corners.
          CHECK(is_loopless(coarse_grain(part, stop)));
          for (const Loop& lp : find_loops(part)) CHECK(lp.scale() < stop);
        }
      }
    }
  }
}

TEST_CASE("law of the erased level-1 walk is the shape catalog") {
  for (CrossingType t : {CrossingType::A, CrossingType::BA, CrossingType::B}) {
    std::vector<std::uint64_t> obs(11, 0);
    for (const Path& w : conditioned(1, t, 100000, 300 + static_cast<std::uint64_t>(index_of(t)))) {
      Path e = ellf(w, 1);
      if (e.back() == corner_b(1)) e = mirrored(e);
      ++obs[static_cast<std::size_t>(shape_label(e))];
    }
    const CrossingType base = t == CrossingType::B ? CrossingType::A : t;
    const ChiSquareResult chi = chi_square(obs, catalog_law(base));
    INFO(to_string(t) << " p=" << chi.p_value);
    CHECK(chi.p_value > 1e-3);
  }
}

TEST_CASE("coarse erased walk renormalizes to the lower-level law") {
  // 2^-(N-K) hatQ_{N-K} Z_N has the level-K law: here K = 1 from N = 2, 3.
  for (int level = 2; level <= 3; ++level) {
    for (CrossingType t : {CrossingType::A, CrossingType::BA}) {
      std::vector<std::uint64_t> obs(11, 0);
      for (const Path& w : conditioned(level, t, 100000, 400 + static_cast<std::uint64_t>(level * 4 + index_of(t)))) {
        ++obs[static_cast<std::size_t>(shape_label(shrink(hatQ(w, level, level - 1), level - 1)))];
      }
      const ChiSquareResult chi = chi_square(obs, catalog_law(t));
      INFO("N=" << level << " " << to_string(t) << " p=" << chi.p_value);
      CHECK(chi.p_value > 1e-3);
    }
  }
  // K = 2 from N = 3, against the enumerated level-2 law.
  for (CrossingType t : {CrossingType::A, CrossingType::BA}) {
    std::map<std::vector<LatticePoint>, std::size_t> index;
    std::vector<double> expected;
    for (const WeightedPath& wp : enumerate_crossings(2, t)) {
      index.emplace(wp.path.points, expected.size());
      expected.push_back(wp.probability.get_d());
    }
    std::vector<std::uint64_t> obs(expected.size(), 0);
    std::size_t outside = 0;
    for (const Path& w : conditioned(3, t, 100000, 500 + static_cast<std::uint64_t>(index_of(t)))) {
      auto it = index.find(shrink(hatQ(w, 3, 1), 1).points);
      if (it == index.end()) ++outside; else ++obs[it->second];
    }
    CHECK(outside == 0);
    const ChiSquareResult chi = chi_square(obs, expected);
    INFO(to_string(t) << " p=" << chi.p_value << " bins=" << expected.size());
    CHECK(chi.p_value > 1e-3);
  }
}

TEST_CASE("cells of the erased level-2 walk are independent with the catalog laws") {
  const RandomStream base(77);
  std::map<int, std::vector<std::pair<int, int>>> by_coarse;
  std::vector<std::uint64_t> t1(11, 0), t2(11, 0);
  const ConditionedWalk walk({2, CrossingType::A});
  RandomStream rng = base.split(0);
  for (int i = 0; i < 100000; ++i) {
    const Path w = walk.sample(rng);
    const Path e = ellf(w, 2);
    // Cells come from the skeleton of hatQ_1; the full erasure may skip the
    // side corner of a Type 2 cell, so they cannot be read off Q_1 of e.
    const Path coarse = shrink(hatQ(w, 2, 1), 1);
    const auto cells = shape_cells(coarse);
    std::vector<int> labels;
    for (const ShapeCell& c : cells) {
      const ShapeCell scaled{c.type, 2 * c.entry, 2 * c.side, 2 * c.exit};
      Path piece{{}, 0};
      const auto from = static_cast<std::size_t>(
          std::find(e.points.begin(), e.points.end(), scaled.entry) - e.points.begin());
      const auto to = static_cast<std::size_t>(
          std::find(e.points.begin(), e.points.end(), scaled.exit) - e.points.begin());
      REQUIRE(to < e.points.size());
      for (std::size_t k = from; k <= to; ++k) piece.points.push_back(to_cell_frame(e.points[k], scaled, 2));
      const int label = shape_label(piece);
      REQUIRE(label > 0);
      labels.push_back(label);
      ++(c.type == CellType::Type1 ? t1 : t2)[static_cast<std::size_t>(label)];
    }
    if (labels.size() >= 2) by_coarse[shape_label(coarse)].push_back({labels[0], labels[1]});
  }
  const ChiSquareResult c1 = chi_square(t1, catalog_law(CrossingType::A));
  const ChiSquareResult c2 = chi_square(t2, catalog_law(CrossingType::BA));
  INFO("type1 p=" << c1.p_value << " type2 p=" << c2.p_value);
  CHECK(c1.p_value > 1e-3);
  CHECK(c2.p_value > 1e-3);

  // Independence of the first two cells given the coarse shape, for the most
  // frequent multi-cell coarse shape.
  const auto& [label, pairs] = *std::max_element(
      by_coarse.begin(), by_coarse.end(),
      [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
  std::map<int, double> row, col;
  std::map<std::pair<int, int>, double> joint;
  for (const auto& pr : pairs) {
    row[pr.first] += 1;
    col[pr.second] += 1;
    joint[pr] += 1;
  }
  const double n = static_cast<double>(pairs.size());
  double stat = 0;
  for (const auto& [r, nr] : row) {
    for (const auto& [c, nc] : col) {
      const double e = nr * nc / n;
      const double o = joint.count({r, c}) ? joint[{r, c}] : 0.0;
      stat += (o - e) * (o - e) / e;
    }
  }
  const double dof = static_cast<double>((row.size() - 1) * (col.size() - 1));
  const double p = chi_square_sf(stat, dof);
  INFO("coarse shape " << label << " n=" << n << " p=" << p);
  CHECK(dof >= 1);
  CHECK(p > 1e-3);
}
