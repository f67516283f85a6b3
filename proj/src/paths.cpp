#include "lerw/paths.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace lerw {

bool adjacent(LatticePoint a, LatticePoint b, int scale) {
  const std::int64_t s = std::int64_t{1} << scale;
  const LatticePoint d = b - a;
  const bool direction = (d.u == 0 && (d.v == s || d.v == -s)) ||
                         (d.v == 0 && (d.u == s || d.u == -s)) ||
                         (d.u == s && d.v == -s) || (d.u == -s && d.v == s);
  if (!direction || !in_level(a, scale) || !in_level(b, scale)) return false;
  for (const TriangleAddress& t : triangles_at_corner(a, scale)) {
    if (t.contains(b)) return true;
  }
  return false;
}

bool is_path(const Path& w) {
  if (w.points.empty()) return false;
  if (!in_level(w.points.front(), w.scale)) return false;
  for (std::size_t i = 1; i < w.points.size(); ++i) {
    if (!adjacent(w.points[i - 1], w.points[i], w.scale)) return false;
  }
  return true;
}

void require_path(const Path& w) {
  if (w.points.empty()) throw std::invalid_argument("empty path");
  if (!in_level(w.points.front(), w.scale)) {
    throw std::invalid_argument("path starts off the lattice at " + to_string(w.points.front()));
  }
  for (std::size_t i = 1; i < w.points.size(); ++i) {
    if (!adjacent(w.points[i - 1], w.points[i], w.scale)) {
      throw std::invalid_argument("adjacency violated at step " + std::to_string(i) + ": " +
                                  to_string(w.points[i - 1]) + " -> " + to_string(w.points[i]));
    }
  }
}

Path make_path(std::initializer_list<LatticePoint> pts, int scale) {
  Path w{std::vector<LatticePoint>(pts), scale};
  require_path(w);
  return w;
}

std::string_view to_string(CrossingType t) {
  switch (t) {
    case CrossingType::A: return "A";
    case CrossingType::B: return "B";
    case CrossingType::BA: return "BA";
    case CrossingType::AB: return "AB";
  }
  return "?";
}

std::optional<CrossingType> parse_crossing_type(std::string_view s) {
  for (CrossingType t : kAllTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

LatticePoint crossing_target(CrossingType t, int level) {
  return (t == CrossingType::A || t == CrossingType::BA) ? corner_a(level) : corner_b(level);
}

std::optional<LatticePoint> crossing_via(CrossingType t, int level) {
  if (t == CrossingType::BA) return corner_b(level);
  if (t == CrossingType::AB) return corner_a(level);
  return std::nullopt;
}

Path unit_crossing(CrossingType t, int level) {
  Path w{{kOrigin}, level};
  if (auto via = crossing_via(t, level)) w.points.push_back(*via);
  w.points.push_back(crossing_target(t, level));
  return w;
}

std::optional<CrossingType> classify_unit_crossing(const Path& coarse) {
  for (CrossingType t : kAllTypes) {
    if (unit_crossing(t, coarse.scale).points == coarse.points) return t;
  }
  return std::nullopt;
}

HittingTimes hitting_times(const Path& w, int scale) {
  HittingTimes h{scale, {}};
  if (w.points.empty()) return h;
  h.times.push_back(0);
  LatticePoint last = w.points.front();
  for (std::size_t j = 1; j < w.points.size(); ++j) {
    const LatticePoint p = w.points[j];
    if (p != last && in_level(p, scale)) {
      h.times.push_back(j);
      last = p;
    }
  }
  return h;
}

Path coarse_grain(const Path& w, int scale) {
  Path out{{}, std::max(scale, w.scale)};
  for (std::size_t t : hitting_times(w, scale).times) out.points.push_back(w.points[t]);
  return out;
}

std::vector<std::size_t> Skeleton::exit_times() const {
  std::vector<std::size_t> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back(c.exit_time);
  return out;
}

std::size_t Skeleton::count(CellType t) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [t](const Cell& c) { return c.type == t; }));
}

Skeleton skeleton(const Path& w, int scale) {
  Skeleton sk{scale, {}};
  const std::vector<std::size_t> times = hitting_times(w, scale).times;
  if (times.size() < 2) return sk;
  const std::size_t m = times.size() - 1;
  auto hit = [&](std::size_t i) { return Vertex::unchecked(w.points[times[i]]); };

  std::size_t prev = 0;
  TriangleAddress delta = containing_triangle(hit(0), hit(1), scale);
  for (;;) {
    std::size_t j = prev + 1;
    while (j < m && delta.contains(hit(j + 1).point())) ++j;
    const std::size_t span = j - prev;
    Cell c;
    c.triangle = delta;
    c.type = span == 1 ? CellType::Type1 : span == 2 ? CellType::Type2 : CellType::Multiple;
    c.entry_hit = prev;
    c.exit_hit = j;
    c.entry_time = times[prev];
    c.exit_time = times[j];
    sk.cells.push_back(c);
    if (j == m) break;
    delta = containing_triangle(hit(j), hit(j + 1), scale);
    prev = j;
  }
  return sk;
}

const std::array<Mat2, 12>& symmetry_group() {
  static const std::array<Mat2, 12> group = [] {
    const Mat2 rot{0, -1, 1, 1};
    const Mat2 flip{1, 1, 0, -1};
    std::array<Mat2, 12> g{};
    Mat2 r{};
    for (int k = 0; k < 6; ++k) {
      g[static_cast<std::size_t>(k)] = r;
      g[static_cast<std::size_t>(k + 6)] = r * flip;
      r = rot * r;
    }
    return g;
  }();
  return group;
}

namespace {

LatticePoint third_corner(const TriangleAddress& t, LatticePoint p, LatticePoint q) {
  for (LatticePoint c : t.corners()) {
    if (c != p && c != q) return c;
  }
  throw std::logic_error("degenerate triangle corners");
}

std::optional<TriangleAddress> other_triangle(LatticePoint corner, const TriangleAddress& core) {
  for (const TriangleAddress& t : triangles_at_corner(corner, core.scale)) {
    if (!(t == core)) return t;
  }
  return std::nullopt;
}

// Symmetry with the given determinant sending the two non-anchor corners of
// `source` onto {want1, want2} in some order.
Mat2 match_corners(const TriangleAddress& source, LatticePoint anchor, LatticePoint want1,
                   LatticePoint want2, std::int64_t det) {
  std::array<LatticePoint, 2> vec{};
  int n = 0;
  for (LatticePoint c : source.corners()) {
    if (c != anchor) vec[static_cast<std::size_t>(n++)] = c - anchor;
  }
  for (const Mat2& g : symmetry_group()) {
    if (g.det() != det) continue;
    const LatticePoint x = g(vec[0]);
    const LatticePoint y = g(vec[1]);
    if ((x == want1 && y == want2) || (x == want2 && y == want1)) return g;
  }
  throw std::logic_error("no symmetry matches triangle corners");
}

}  // namespace

SegmentFrame SegmentFrame::identity(int scale) {
  const std::int64_t s = std::int64_t{1} << scale;
  SegmentFrame f;
  f.scale_ = scale;
  const TriangleAddress core{kOrigin, scale, Side::Right};
  const TriangleAddress left{{-s, 0}, scale, Side::Left};
  const TriangleAddress right{{s, 0}, scale, Side::Right};
  f.pieces_.push_back({core, core, kOrigin, kOrigin, Mat2{}});
  f.pieces_.push_back({left, left, kOrigin, kOrigin, Mat2{}});
  f.pieces_.push_back({right, right, corner_b(scale), corner_b(scale), Mat2{}});
  return f;
}

SegmentFrame SegmentFrame::build(LatticePoint entry, LatticePoint middle, LatticePoint exit,
                                 int scale, bool middle_neighbour) {
  const std::int64_t s = std::int64_t{1} << scale;
  const TriangleAddress core = containing_triangle(Vertex::unchecked(entry),
                                                   Vertex::unchecked(exit), scale);
  if (!core.contains(middle) || middle == entry || middle == exit) {
    throw std::invalid_argument("segment corners do not span one triangle");
  }
  Mat2 g{};
  bool found = false;
  for (const Mat2& cand : symmetry_group()) {
    if (cand(exit - entry) == LatticePoint{0, s} && cand(middle - entry) == LatticePoint{s, 0}) {
      g = cand;
      found = true;
      break;
    }
  }
  if (!found) throw std::logic_error("no symmetry for segment corners");

  std::vector<Piece> pieces;
  const TriangleAddress canon_core{kOrigin, scale, Side::Right};
  pieces.push_back({core, canon_core, entry, kOrigin, g});
  if (auto t = other_triangle(entry, core)) {
    const Mat2 h = match_corners(*t, entry, {-s, 0}, {-s, s}, g.det());
    pieces.push_back({*t, TriangleAddress{{-s, 0}, scale, Side::Left}, entry, kOrigin, h});
  }
  if (middle_neighbour) {
    if (auto t = other_triangle(middle, core)) {
      const Mat2 h = match_corners(*t, middle, {s, 0}, {0, s}, g.det());
      pieces.push_back({*t, TriangleAddress{{s, 0}, scale, Side::Right}, middle, corner_b(scale), h});
    }
  }
  SegmentFrame f;
  f.scale_ = scale;
  f.pieces_ = std::move(pieces);
  return f;
}

SegmentFrame SegmentFrame::for_step(LatticePoint entry, LatticePoint exit, int scale) {
  const TriangleAddress core =
      containing_triangle(Vertex::unchecked(entry), Vertex::unchecked(exit), scale);
  return build(entry, third_corner(core, entry, exit), exit, scale, false);
}

SegmentFrame SegmentFrame::for_cell(LatticePoint entry, LatticePoint middle, LatticePoint exit,
                                    int scale) {
  return build(entry, middle, exit, scale, true);
}

LatticePoint SegmentFrame::to_canonical(LatticePoint p) const {
  for (const Piece& pc : pieces_) {
    if (pc.source.contains(p)) return pc.image + pc.g(p - pc.anchor);
  }
  throw std::domain_error("point " + to_string(p) + " outside segment frame");
}

LatticePoint SegmentFrame::from_canonical(LatticePoint q) const {
  for (const Piece& pc : pieces_) {
    if (pc.target.contains(q)) return pc.anchor + pc.g.inverse()(q - pc.image);
  }
  throw std::domain_error("point " + to_string(q) + " outside canonical frame");
}

Path SegmentFrame::to_canonical(const Path& w) const {
  Path out{{}, w.scale};
  out.points.reserve(w.points.size());
  for (LatticePoint p : w.points) out.points.push_back(to_canonical(p));
  return out;
}

Path SegmentFrame::from_canonical(const Path& w) const {
  Path out{{}, w.scale};
  out.points.reserve(w.points.size());
  for (LatticePoint q : w.points) out.points.push_back(from_canonical(q));
  return out;
}

static Path slice(const Path& w, std::size_t from, std::size_t to) {
  return Path{std::vector<LatticePoint>(w.points.begin() + static_cast<std::ptrdiff_t>(from),
                                        w.points.begin() + static_cast<std::ptrdiff_t>(to) + 1),
              w.scale};
}

StepDecomposition decompose_steps(const Path& w, int scale) {
  const std::vector<std::size_t> times = hitting_times(w, scale).times;
  if (times.empty() || times.back() + 1 != w.points.size()) {
    throw std::invalid_argument("path does not end on its last coarse hit");
  }
  StepDecomposition d;
  d.coarse = Path{{}, scale};
  for (std::size_t t : times) d.coarse.points.push_back(w.points[t]);
  for (std::size_t i = 1; i < times.size(); ++i) {
    SegmentFrame f =
        SegmentFrame::for_step(w.points[times[i - 1]], w.points[times[i]], scale);
    Path canon = f.to_canonical(slice(w, times[i - 1], times[i]));
    d.segments.push_back({std::move(canon), std::move(f)});
  }
  return d;
}

static Path join(const std::vector<Segment>& segments, LatticePoint start, int scale) {
  Path out{{start}, scale};
  for (const Segment& s : segments) {
    Path piece = s.frame.from_canonical(s.path);
    if (piece.points.front() != out.points.back()) {
      throw std::invalid_argument("segments do not chain");
    }
    out.points.insert(out.points.end(), piece.points.begin() + 1, piece.points.end());
  }
  return out;
}

Path recompose(const StepDecomposition& d) {
  return join(d.segments, d.coarse.points.front(), 0);
}

TriangleDecomposition decompose_triangles(const Path& w, int scale) {
  const std::vector<std::size_t> times = hitting_times(w, scale).times;
  {
    std::vector<LatticePoint> hits;
    for (std::size_t t : times) hits.push_back(w.points[t]);
    std::sort(hits.begin(), hits.end());
    if (std::adjacent_find(hits.begin(), hits.end()) != hits.end()) {
      throw std::domain_error("coarse path not loopless");
    }
  }
  if (times.empty() || times.back() + 1 != w.points.size()) {
    throw std::invalid_argument("path does not end on its last coarse hit");
  }
  TriangleDecomposition d;
  d.skel = skeleton(w, scale);
  for (const Cell& c : d.skel.cells) {
    const LatticePoint entry = w.points[c.entry_time];
    const LatticePoint exit = w.points[c.exit_time];
    SegmentFrame f = c.type == CellType::Type1
                         ? SegmentFrame::for_step(entry, exit, scale)
                         : SegmentFrame::for_cell(entry, w.points[times[c.entry_hit + 1]], exit,
                                                  scale);
    Path canon = f.to_canonical(slice(w, c.entry_time, c.exit_time));
    d.segments.push_back({std::move(canon), std::move(f)});
  }
  return d;
}

Path recompose(const TriangleDecomposition& d) {
  if (d.segments.empty()) throw std::invalid_argument("empty decomposition");
  const Segment& first = d.segments.front();
  return join(d.segments, first.frame.from_canonical(first.path.points.front()), 0);
}

double Loop::diameter() const { return std::sqrt(static_cast<double>(diameter2)); }

int Loop::scale() const {
  int best = -1;
  for (int m = 0; m < 62 && m <= level; ++m) {
    const std::int64_t side = std::int64_t{1} << m;
    if (diameter2 < side * side) break;
    best = m;
  }
  return best;
}

std::vector<Loop> find_loops(const Path& w) {
  std::vector<Loop> out;
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> last;
  for (std::size_t j = 0; j < w.points.size(); ++j) {
    const LatticePoint c = w.points[j];
    auto it = last.find(c);
    if (it != last.end()) {
      Loop lp;
      lp.at = c;
      lp.i = it->second;
      lp.j = j;
      for (std::size_t k1 = lp.i; k1 <= j; ++k1) {
        for (std::size_t k2 = k1 + 1; k2 <= j; ++k2) {
          lp.diameter2 = std::max(lp.diameter2, norm2(w.points[k2] - w.points[k1]));
        }
      }
      lp.level = is_vertex(c) ? vertex_level(Vertex::unchecked(c)) : 0;
      out.push_back(lp);
      it->second = j;
    } else {
      last.emplace(c, j);
    }
  }
  return out;
}

bool is_loopless(const Path& w) {
  std::vector<LatticePoint> pts = w.points;
  std::sort(pts.begin(), pts.end());
  return std::adjacent_find(pts.begin(), pts.end()) == pts.end();
}

int crossing_level(const Path& w) {
  if (w.points.empty()) throw std::invalid_argument("empty path");
  return std::min(vertex_level(Vertex::at(w.points.front())),
                  vertex_level(Vertex::at(w.points.back())));
}

std::string to_json(const Path& w) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    if (i) os << ',';
    os << '[' << w.points[i].u << ',' << w.points[i].v << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace lerw
