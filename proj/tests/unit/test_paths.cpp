#include <doctest.h>

#include <set>

#include "lerw/paths.hpp"
#include "oracles.hpp"

using namespace lerw;

namespace {

// Stage walks from O at the given level, which always end on a coarse vertex.
std::vector<Path> sample_walks(int level, int count, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Path> out;
  for (int i = 0; i < count; ++i) out.push_back(oracle::stage_walk(kOrigin, level, rng));
  return out;
}

std::vector<std::size_t> hits_naive(const Path& w, int scale) {
  const std::int64_t s = std::int64_t{1} << scale;
  static const oracle::FiniteGasket g = oracle::build_two_sided(4);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < w.points.size(); ++j) {
    const LatticePoint p = w.points[j];
    const bool coarse = p.u % s == 0 && p.v % s == 0 && g.vertices.count({p.u / s, p.v / s});
    if (!coarse) continue;
    if (!out.empty() && w.points[out.back()] == p) continue;
    out.push_back(j);
  }
  return out;
}

}  // namespace

TEST_CASE("adjacency agrees with the three-copy construction") {
  for (int scale = 0; scale <= 2; ++scale) {
    const oracle::FiniteGasket g = oracle::build_two_sided(4 - scale);
    const std::int64_t s = std::int64_t{1} << scale;
    for (LatticePoint p : g.vertices) {
      for (LatticePoint q : g.vertices) {
        if (norm2(q - p) != 1) continue;
        CHECK(adjacent(s * p, s * q, scale) == g.has_edge(p, q));
      }
    }
  }
  CHECK_FALSE(adjacent({0, 0}, {1, -1}));
  CHECK(adjacent({0, 0}, {-1, 1}));
}

TEST_CASE("require_path reports the first bad step") {
  Path w{{kOrigin, {0, 1}, {2, 0}}, 0};
  CHECK_FALSE(is_path(w));
  try {
    require_path(w);
    FAIL("no exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("adjacency violated at step 2") != std::string::npos);
  }
  CHECK(is_path(make_path({kOrigin, {0, 2}, {2, 0}}, 1)));
}

TEST_CASE("crossing types and unit crossings") {
  CHECK(unit_crossing(CrossingType::A).points == std::vector<LatticePoint>{kOrigin, corner_a(0)});
  CHECK(unit_crossing(CrossingType::BA, 2).points ==
        std::vector<LatticePoint>{kOrigin, corner_b(2), corner_a(2)});
  for (CrossingType t : kAllTypes) {
    CHECK(mirror(mirror(t)) == t);
    CHECK(parse_crossing_type(to_string(t)) == t);
    CHECK(classify_unit_crossing(unit_crossing(t, 3)) == t);
    Path m = unit_crossing(t, 1);
    for (LatticePoint& p : m.points) p = swap_ab(p);
    CHECK(classify_unit_crossing(m) == mirror(t));
  }
  CHECK_FALSE(parse_crossing_type("C").has_value());
  CHECK(is_two_corner(CrossingType::B));
  CHECK_FALSE(is_two_corner(CrossingType::AB));
  CHECK(crossing_level(unit_crossing(CrossingType::AB, 5)) == 5);
}

TEST_CASE("hitting times match a direct scan") {
  for (const Path& w : sample_walks(3, 60, 11)) {
    for (int m = 0; m <= 3; ++m) {
      CHECK(hitting_times(w, m).times == hits_naive(w, m));
      const Path q = coarse_grain(w, m);
      CHECK(q.scale == m);
      CHECK(is_path(q));
    }
    CHECK(coarse_grain(w, 0).points.size() == w.points.size());
  }
}

TEST_CASE("skeleton of a loopless crossing counts its length") {
  int checked = 0;
  for (const Path& raw : sample_walks(3, 400, 5)) {
    const Path w = oracle::loop_erase_naive(raw);
    if (w.back() != corner_a(3) && w.back() != corner_b(3)) continue;
    ++checked;
    const Skeleton sk = skeleton(w, 0);
    CHECK(sk.count(CellType::Multiple) == 0);
    CHECK(sk.count(CellType::Type1) + 2 * sk.count(CellType::Type2) == w.length());
    std::size_t prev = 0;
    for (const Cell& c : sk.cells) {
      CHECK(c.entry_time == prev);
      CHECK(c.exit_time > c.entry_time);
      for (std::size_t t = c.entry_time; t <= c.exit_time; ++t) CHECK(c.triangle.contains(w.points[t]));
      prev = c.exit_time;
    }
    CHECK(prev == w.length());
  }
  CHECK(checked > 50);
}

TEST_CASE("symmetry group is closed and preserves the lattice norm") {
  const auto& g = symmetry_group();
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
  for (const Mat2& a : g) {
    seen.insert({a.a, a.b, a.c, a.d});
    CHECK((a.det() == 1 || a.det() == -1));
    CHECK(a * a.inverse() == Mat2{});
    for (LatticePoint p : {LatticePoint{1, 0}, LatticePoint{0, 1}, LatticePoint{3, -2}}) {
      CHECK(norm2(a(p)) == norm2(p));
    }
    for (const Mat2& b : g) CHECK(std::find(g.begin(), g.end(), a * b) != g.end());
  }
  CHECK(seen.size() == 12);
}

TEST_CASE("segment frames send entry to O and exit to a") {
  const oracle::FiniteGasket g = oracle::build_two_sided(4);
  for (int scale = 0; scale <= 2; ++scale) {
    const std::int64_t s = std::int64_t{1} << scale;
    for (LatticePoint p : g.vertices) {
      const LatticePoint x = s * p;
      for (const TriangleAddress& t : triangles_at_corner(x, scale)) {
        for (LatticePoint y : t.corners()) {
          if (y == x) continue;
          const SegmentFrame f = SegmentFrame::for_step(x, y, scale);
          CHECK(f.to_canonical(x) == kOrigin);
          CHECK(f.to_canonical(y) == corner_a(scale));
          for (LatticePoint c : t.corners()) CHECK(f.from_canonical(f.to_canonical(c)) == c);
        }
      }
    }
  }
}

TEST_CASE("step decomposition round-trips and keeps segments canonical") {
  for (int m = 0; m <= 2; ++m) {
    for (const Path& w : sample_walks(3, 80, 17 + m)) {
      const StepDecomposition d = decompose_steps(w, m);
      CHECK(d.coarse == coarse_grain(w, m));
      CHECK(recompose(d) == w);
      for (const Segment& seg : d.segments) {
        CHECK(seg.path.front() == kOrigin);
        CHECK(seg.path.back() == corner_a(m));
        CHECK(is_path(seg.path));
      }
    }
  }
}

TEST_CASE("triangle decomposition needs a loopless coarse path") {
  int done = 0, rejected = 0;
  for (const Path& raw : sample_walks(3, 200, 23)) {
    const Path w = oracle::loop_erase_naive(raw);
    const TriangleDecomposition d = decompose_triangles(w, 1);
    CHECK(recompose(d) == w);
    ++done;
    const Path q = coarse_grain(raw, 1);
    std::set<LatticePoint> distinct(q.points.begin(), q.points.end());
    if (distinct.size() != q.points.size()) {
      CHECK_THROWS_AS(decompose_triangles(raw, 1), std::domain_error);
      ++rejected;
    }
  }
  CHECK(done == 200);
  CHECK(rejected > 0);
}

TEST_CASE("loops and their diameters") {
  // O b0 c a0 O a0 a1 forms a loop at O and a loop at a0.
  const Path w = make_path({kOrigin, {1, 0}, {1, 1}, {0, 1}, kOrigin, {0, 1}, {0, 2}});
  const auto loops = find_loops(w);
  REQUIRE(loops.size() == 2);
  CHECK(loops[0].at == kOrigin);
  CHECK(loops[0].diameter2 == 3);
  CHECK(loops[1].at == LatticePoint{0, 1});
  CHECK(loops[1].diameter2 == 1);
  CHECK_FALSE(is_loopless(w));
  CHECK(loops[1].scale() == 0);

  for (const Path& r : sample_walks(2, 100, 29)) {
    const auto found = find_loops(r);
    std::set<LatticePoint> distinct(r.points.begin(), r.points.end());
    CHECK(is_loopless(r) == (distinct.size() == r.points.size()));
    CHECK(found.size() == r.points.size() - distinct.size());
    for (const Loop& lp : found) {
      CHECK(r.points[lp.i] == lp.at);
      CHECK(r.points[lp.j] == lp.at);
      CHECK(lp.diameter2 == oracle::diameter2_naive(r, lp.i, lp.j));
    }
  }
}

TEST_CASE("path json") {
  CHECK(to_json(unit_crossing(CrossingType::BA)) == "[[0,0],[1,0],[0,1]]");
}
