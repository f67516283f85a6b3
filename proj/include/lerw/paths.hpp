#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lerw/gasket.hpp"

namespace lerw {

// A vertex sequence on F_scale: consecutive points are edges of 2^scale * F_0.
// Fine paths have scale 0; coarse-grained paths inherit the coarse scale.
struct Path {
  std::vector<LatticePoint> points;
  int scale = 0;

  std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
  const LatticePoint& front() const { return points.front(); }
  const LatticePoint& back() const { return points.back(); }

  friend bool operator==(const Path&, const Path&) = default;
};

bool adjacent(LatticePoint a, LatticePoint b, int scale = 0);

// Throws std::invalid_argument("adjacency violated ...") on the first bad step.
void require_path(const Path& w);
bool is_path(const Path& w);

Path make_path(std::initializer_list<LatticePoint> pts, int scale = 0);

// The four loopless unit crossings: O->a, O->b, O->b->a, O->a->b.
enum class CrossingType : int { A = 0, B = 1, BA = 2, AB = 3 };

constexpr std::array<CrossingType, 4> kAllTypes{CrossingType::A, CrossingType::B,
                                                CrossingType::BA, CrossingType::AB};

constexpr int index_of(CrossingType t) { return static_cast<int>(t); }
std::string_view to_string(CrossingType t);
std::optional<CrossingType> parse_crossing_type(std::string_view s);

// A <-> B and BA <-> AB.
constexpr CrossingType mirror(CrossingType t) {
  switch (t) {
    case CrossingType::A: return CrossingType::B;
    case CrossingType::B: return CrossingType::A;
    case CrossingType::BA: return CrossingType::AB;
    case CrossingType::AB: return CrossingType::BA;
  }
  return t;
}
constexpr bool is_two_corner(CrossingType t) {
  return t == CrossingType::A || t == CrossingType::B;
}

LatticePoint crossing_target(CrossingType t, int level);
// The corner visited on the way for BA/AB; nullopt for A/B.
std::optional<LatticePoint> crossing_via(CrossingType t, int level);

// The coarse path v*_i of a crossing type at the given level.
Path unit_crossing(CrossingType t, int level = 0);

// Which of the four types a coarse crossing path (scaled to level 0) is.
std::optional<CrossingType> classify_unit_crossing(const Path& coarse);

struct HittingTimes {
  int scale = 0;
  std::vector<std::size_t> times;
};

HittingTimes hitting_times(const Path& w, int scale);

// (Q_M w)(i) = w(T_i^M).
Path coarse_grain(const Path& w, int scale);

enum class CellType { Type1 = 1, Type2 = 2, Multiple = 3 };

struct Cell {
  TriangleAddress triangle;
  CellType type = CellType::Type1;
  // Indices into the hit sequence at the skeleton scale.
  std::size_t entry_hit = 0;
  std::size_t exit_hit = 0;
  // Indices into the fine path.
  std::size_t entry_time = 0;
  std::size_t exit_time = 0;
};

struct Skeleton {
  int scale = 0;
  std::vector<Cell> cells;

  std::vector<std::size_t> exit_times() const;
  std::size_t count(CellType t) const;
};

Skeleton skeleton(const Path& w, int scale);

// 2x2 integer matrix acting on (u, v) difference vectors.
struct Mat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  constexpr LatticePoint operator()(LatticePoint p) const {
    return {a * p.u + b * p.v, c * p.u + d * p.v};
  }
  constexpr std::int64_t det() const { return a * d - b * c; }
  friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
  }
  // Exact inverse; every symmetry has determinant +-1.
  constexpr Mat2 inverse() const {
    const std::int64_t k = det();
    return {d * k, -b * k, -c * k, a * k};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

// The twelve lattice symmetries fixing the origin (rotations by 60 degrees and reflections).
const std::array<Mat2, 12>& symmetry_group();

// Identifies the neighbourhood of a segment with the canonical picture around
// the triangle O a_M b_M. The map is an isometry on each 2^M-triangle it covers
// but need not be a single similarity of the plane: the core triangle is sent
// to O a_M b_M (entry -> O, exit -> a_M), the other triangle at the entry to the
// left triangle at O, and the other triangle at the middle corner (when used)
// to the triangle at b_M.
class SegmentFrame {
 public:
  static SegmentFrame identity(int scale);
  static SegmentFrame for_step(LatticePoint entry, LatticePoint exit, int scale);
  static SegmentFrame for_cell(LatticePoint entry, LatticePoint middle, LatticePoint exit,
                               int scale);

  int scale() const { return scale_; }
  LatticePoint to_canonical(LatticePoint p) const;
  LatticePoint from_canonical(LatticePoint q) const;
  Path to_canonical(const Path& w) const;
  Path from_canonical(const Path& w) const;

  friend bool operator==(const SegmentFrame&, const SegmentFrame&) = default;

 private:
  struct Piece {
    TriangleAddress source;
    TriangleAddress target;
    LatticePoint anchor;
    LatticePoint image;
    Mat2 g;
    friend bool operator==(const Piece&, const Piece&) = default;
  };
  static SegmentFrame build(LatticePoint entry, LatticePoint middle, LatticePoint exit, int scale,
                            bool middle_neighbour);

  int scale_ = 0;
  std::vector<Piece> pieces_;
};

struct Segment {
  Path path;  // canonical coordinates
  SegmentFrame frame;
};

struct StepDecomposition {
  Path coarse;
  std::vector<Segment> segments;
};

struct TriangleDecomposition {
  Skeleton skel;
  std::vector<Segment> segments;
};

StepDecomposition decompose_steps(const Path& w, int scale);
Path recompose(const StepDecomposition& d);

// Throws std::domain_error("coarse path not loopless") if Q_M w revisits a vertex.
TriangleDecomposition decompose_triangles(const Path& w, int scale);
Path recompose(const TriangleDecomposition& d);

struct Loop {
  LatticePoint at;
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t diameter2 = 0;  // squared Euclidean diameter
  int level = 0;               // vertex_level of the formation vertex

  double diameter() const;
  // Largest M with `at` in G_M and diameter >= 2^M; -1 if none.
  int scale() const;
};

// Every loop: a pair of consecutive visits to the same vertex. Quadratic in
// the loop lengths because diameters are computed exactly.
std::vector<Loop> find_loops(const Path& w);
bool is_loopless(const Path& w);

// min(vertex_level(start), vertex_level(end)): N for a crossing from O to a_N.
int crossing_level(const Path& w);

// JSON array of [u,v] pairs.
std::string to_json(const Path& w);

}  // namespace lerw
