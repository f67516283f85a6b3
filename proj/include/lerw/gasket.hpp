#pragma once

// Geometry of the infinite pre-Sierpinski gasket.
//
// Points are integer pairs (u, v) in the basis b0 = (1, 0), a0 = (1/2, sqrt(3)/2),
// so every identity test is exact. The right half of the gasket occupies the
// wedge u, v >= 0; the left half is its mirror image across the y-axis, which in
// this basis is (u, v) -> (-u - v, v). The two halves share only the origin.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lerw {

struct LatticePoint {
  std::int64_t u = 0;
  std::int64_t v = 0;

  friend constexpr auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) {
    return {a.u + b.u, a.v + b.v};
  }
  friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) {
    return {a.u - b.u, a.v - b.v};
  }
  friend constexpr LatticePoint operator*(std::int64_t k, LatticePoint p) {
    return {k * p.u, k * p.v};
  }
};

/// Squared Euclidean length, in units of the unit edge. Exact.
constexpr std::int64_t norm2(LatticePoint p) { return p.u * p.u + p.u * p.v + p.v * p.v; }

/// Euclidean length. Only for reporting; never used in identity tests.
double norm(LatticePoint p);

/// Cartesian coordinates (x, y) of a lattice point.
std::array<double, 2> to_cartesian(LatticePoint p);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    auto h = static_cast<std::uint64_t>(p.u) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(p.v) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

constexpr LatticePoint kOrigin{0, 0};
constexpr LatticePoint corner_a(int level) { return {0, std::int64_t{1} << level}; }
constexpr LatticePoint corner_b(int level) { return {std::int64_t{1} << level, 0}; }

/// Mirror image across the y-axis.
constexpr LatticePoint reflect_y(LatticePoint p) { return {-p.u - p.v, p.v}; }

/// Mirror image across the bisector of the angle at O (swaps a_N and b_N).
constexpr LatticePoint swap_ab(LatticePoint p) { return {p.v, p.u}; }

namespace detail {
// Unit upward triangle with lower-left corner (u, v) belongs to the right half.
// A triangle is absent exactly when some binary digit puts it in the central
// hole of the enclosing triangle, i.e. when u and v share a set bit.
constexpr bool right_cell(std::int64_t u, std::int64_t v) {
  return u >= 0 && v >= 0 && (u & v) == 0;
}
constexpr bool right_vertex(std::int64_t u, std::int64_t v) {
  if (u < 0 || v < 0) return false;
  return (u & v) == 0 || (u > 0 && ((u - 1) & v) == 0) || (v > 0 && (u & (v - 1)) == 0);
}
}  // namespace detail

/// Membership in the vertex set of the two-sided infinite gasket.
constexpr bool is_vertex(LatticePoint p) {
  if (p.v < 0) return false;
  if (p.u >= 0) return detail::right_vertex(p.u, p.v);
  if (p.u + p.v <= 0) return detail::right_vertex(-p.u - p.v, p.v);
  return false;
}

/// Membership in G_M = 2^M * G_0.
constexpr bool in_level(LatticePoint p, int level) {
  const std::int64_t mask = (std::int64_t{1} << level) - 1;
  if ((p.u & mask) != 0 || (p.v & mask) != 0) return false;
  return is_vertex({p.u >> level, p.v >> level});
}

/// A point already known to be a vertex. Construct through `at`.
class Vertex {
 public:
  static Vertex at(LatticePoint p);
  static Vertex at(std::int64_t u, std::int64_t v) { return at(LatticePoint{u, v}); }
  /// Skips the membership check; callers must already know p is a vertex.
  static constexpr Vertex unchecked(LatticePoint p) { return Vertex(p); }

  constexpr LatticePoint point() const { return p_; }
  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;

 private:
  constexpr explicit Vertex(LatticePoint p) : p_(p) {}
  LatticePoint p_;
};

enum class Side { Right, Left };

/// An upward 2^scale-triangle of the gasket, identified by its lower-left corner.
struct TriangleAddress {
  LatticePoint corner;
  int scale = 0;
  Side side = Side::Right;

  std::int64_t size() const { return std::int64_t{1} << scale; }
  /// Corners in the order lower-left, lower-right, top.
  std::array<LatticePoint, 3> corners() const;
  /// Closed-region containment (interior, edges and corners).
  bool contains(LatticePoint p) const;

  friend bool operator==(const TriangleAddress&, const TriangleAddress&) = default;
};

/// True if the upward 2^scale-triangle with this lower-left corner is part of the gasket.
bool triangle_present(LatticePoint corner, int scale);

/// All y with (x, y) an edge of the gasket. Always four of them.
std::vector<Vertex> neighbors(Vertex x);

constexpr int kInfiniteLevel = std::numeric_limits<int>::max();

/// Largest N with x in G_N; kInfiniteLevel for the origin.
int vertex_level(Vertex x);

/// The unique upward 2^M-triangle whose closed region holds both points.
/// Throws std::domain_error("no common triangle") if there is none, or if the
/// choice is ambiguous (x == y at a shared corner).
TriangleAddress containing_triangle(Vertex x, Vertex y, int scale);

/// The 2^scale-triangles having p as a corner. Two for every p in G_scale.
std::vector<TriangleAddress> triangles_at_corner(LatticePoint p, int scale);

/// Every gasket vertex in the closed triangle.
std::vector<LatticePoint> triangle_vertices(const TriangleAddress& t);

std::string to_string(LatticePoint p);

}  // namespace lerw
