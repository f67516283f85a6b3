#include "lerw/gasket.hpp"

#include <algorithm>
#include <cmath>

namespace lerw {

namespace {

constexpr std::int64_t floor_to(std::int64_t x, int scale) {
  // Arithmetic shift rounds toward negative infinity.
  return (x >> scale) << scale;
}

std::string pair_text(LatticePoint p) {
  return "[" + std::to_string(p.u) + "," + std::to_string(p.v) + "]";
}

}  // namespace

double norm(LatticePoint p) { return std::sqrt(static_cast<double>(norm2(p))); }

std::array<double, 2> to_cartesian(LatticePoint p) {
  return {static_cast<double>(p.u) + 0.5 * static_cast<double>(p.v),
          0.8660254037844386 * static_cast<double>(p.v)};
}

std::string to_string(LatticePoint p) { return pair_text(p); }

Vertex Vertex::at(LatticePoint p) {
  if (!is_vertex(p)) throw std::invalid_argument("not a gasket vertex: " + pair_text(p));
  return Vertex(p);
}

std::array<LatticePoint, 3> TriangleAddress::corners() const {
  const std::int64_t s = size();
  return {corner, corner + LatticePoint{s, 0}, corner + LatticePoint{0, s}};
}

bool TriangleAddress::contains(LatticePoint p) const {
  const LatticePoint d = p - corner;
  return d.u >= 0 && d.v >= 0 && d.u + d.v <= size();
}

bool triangle_present(LatticePoint corner, int scale) {
  const std::int64_t mask = (std::int64_t{1} << scale) - 1;
  if ((corner.u & mask) != 0 || (corner.v & mask) != 0) return false;
  const std::int64_t u = corner.u >> scale;
  const std::int64_t v = corner.v >> scale;
  if (u >= 0) return detail::right_cell(u, v);
  return detail::right_cell(-u - v - 1, v);
}

static TriangleAddress make_triangle(LatticePoint corner, int scale) {
  return {corner, scale, (corner.u >> scale) >= 0 ? Side::Right : Side::Left};
}

std::vector<TriangleAddress> triangles_at_corner(LatticePoint p, int scale) {
  const std::int64_t s = std::int64_t{1} << scale;
  std::vector<TriangleAddress> out;
  for (LatticePoint c : {p, p - LatticePoint{s, 0}, p - LatticePoint{0, s}}) {
    if (triangle_present(c, scale)) out.push_back(make_triangle(c, scale));
  }
  return out;
}

std::vector<Vertex> neighbors(Vertex x) {
  const LatticePoint p = x.point();
  std::vector<Vertex> out;
  for (const TriangleAddress& t : triangles_at_corner(p, 0)) {
    for (LatticePoint q : t.corners()) {
      if (q != p) out.push_back(Vertex::unchecked(q));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int vertex_level(Vertex x) {
  const LatticePoint p = x.point();
  if (p == kOrigin) return kInfiniteLevel;
  int level = 0;
  while (level < 62 && in_level(p, level + 1)) ++level;
  return level;
}

TriangleAddress containing_triangle(Vertex x, Vertex y, int scale) {
  if (scale < 0 || scale > 60) throw std::invalid_argument("containing_triangle: bad scale");
  const std::int64_t s = std::int64_t{1} << scale;
  const LatticePoint p = x.point();
  const LatticePoint q = y.point();
  const LatticePoint base{floor_to(p.u, scale), floor_to(p.v, scale)};
  std::vector<TriangleAddress> hits;
  for (LatticePoint off : {LatticePoint{0, 0}, LatticePoint{s, 0}, LatticePoint{0, s},
                           LatticePoint{s, s}}) {
    const LatticePoint c = base - off;
    if (!triangle_present(c, scale)) continue;
    TriangleAddress t = make_triangle(c, scale);
    if (t.contains(p) && t.contains(q)) hits.push_back(t);
  }
  if (hits.size() != 1) {
    throw std::domain_error("no common triangle for " + pair_text(p) + " and " + pair_text(q) +
                            " at scale " + std::to_string(scale));
  }
  return hits.front();
}

std::vector<LatticePoint> triangle_vertices(const TriangleAddress& t) {
  std::vector<LatticePoint> out;
  const std::int64_t s = t.size();
  for (std::int64_t du = 0; du <= s; ++du) {
    for (std::int64_t dv = 0; du + dv <= s; ++dv) {
      const LatticePoint p = t.corner + LatticePoint{du, dv};
      if (is_vertex(p)) out.push_back(p);
    }
  }
  return out;
}

}  // namespace lerw
