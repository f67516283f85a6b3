#include "lerw/srw.hpp"

#include <algorithm>
#include <unordered_map>

#include "lerw/errors.hpp"

namespace lerw {

std::vector<Stage> stages_for(const ConditionedWalkSpec& spec) {
  if (spec.level < 1) throw std::invalid_argument("conditioned walks need level >= 1");
  const int n = spec.level;
  const LatticePoint target = crossing_target(spec.type, n);
  if (auto via = crossing_via(spec.type, n)) {
    return {Stage{kOrigin, *via, n}, Stage{*via, target, n}};
  }
  return {Stage{kOrigin, target, n}};
}

std::vector<LatticePoint> stage_region(LatticePoint start, int level) {
  std::vector<LatticePoint> out;
  for (const TriangleAddress& t : triangles_at_corner(start, level)) {
    const auto pts = triangle_vertices(t);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<LatticePoint> reachable_region(int level) {
  if (level < 1) throw std::invalid_argument("reachable_region needs level >= 1");
  return stage_region(kOrigin, level);
}

namespace {

template <class T>
using PointMap = std::unordered_map<LatticePoint, T, LatticePointHash>;

// Harmonic extension into an upward triangle from its corner values: each edge
// midpoint gets (2p + 2q + r) / 5, where r is the opposite corner.
template <class T>
void fill_triangle(PointMap<T>& h, LatticePoint c, std::int64_t side, const T& v0, const T& v1,
                   const T& v2) {
  if (side == 1) {
    h[c] = v0;
    h[c + LatticePoint{1, 0}] = v1;
    h[c + LatticePoint{0, 1}] = v2;
    return;
  }
  const std::int64_t half = side / 2;
  const T m01 = (2 * v0 + 2 * v1 + v2) / 5;
  const T m02 = (2 * v0 + 2 * v2 + v1) / 5;
  const T m12 = (2 * v1 + 2 * v2 + v0) / 5;
  fill_triangle(h, c, half, v0, m01, m02);
  fill_triangle(h, c + LatticePoint{half, 0}, half, m01, v1, m12);
  fill_triangle(h, c + LatticePoint{0, half}, half, m02, m12, v2);
}

template <class T>
PointMap<T> stage_harmonic(const Stage& stage) {
  PointMap<T> h;
  const T at_start = T(1) / 4;
  for (const TriangleAddress& t : triangles_at_corner(stage.start, stage.level)) {
    std::array<T, 3> v{};
    const auto cs = t.corners();
    for (std::size_t k = 0; k < 3; ++k) {
      v[k] = cs[k] == stage.start ? at_start : cs[k] == stage.target ? T(1) : T(0);
    }
    fill_triangle(h, t.corner, t.size(), v[0], v[1], v[2]);
  }
  return h;
}

bool is_stage_corner(const Stage& stage, LatticePoint p) {
  return p != stage.start && in_level(p, stage.level);
}

}  // namespace

std::map<LatticePoint, Rational> exact_harmonic(const Stage& stage) {
  const auto h = stage_harmonic<Rational>(stage);
  return {h.begin(), h.end()};
}

TransitionTable exact_conditional_chain(const ConditionedWalkSpec& spec, int exact_limit) {
  if (spec.level > exact_limit) {
    throw CapacityError("exact transition table requested at level " +
                        std::to_string(spec.level) + " above the exact limit " +
                        std::to_string(exact_limit));
  }
  TransitionTable table{spec, {}};
  for (const Stage& stage : stages_for(spec)) {
    const std::map<LatticePoint, Rational> h = exact_harmonic(stage);
    StageTable st{stage, {}};
    for (const auto& [x, hx] : h) {
      if (is_stage_corner(stage, x) || hx == 0) continue;
      TransitionRow row{x, {}};
      for (const Vertex& y : neighbors(Vertex::unchecked(x))) {
        const Rational& hy = h.at(y.point());
        if (hy != 0) row.to.emplace_back(y.point(), hy / (4 * hx));
      }
      st.rows.push_back(std::move(row));
    }
    table.stages.push_back(std::move(st));
  }
  return table;
}

ConditionedWalk::Table ConditionedWalk::build(const Stage& stage) {
  const auto h = stage_harmonic<double>(stage);
  Table t;
  t.points.reserve(h.size());
  for (const auto& kv : h) t.points.push_back(kv.first);
  std::sort(t.points.begin(), t.points.end());
  PointMap<std::int32_t> index;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    index[t.points[i]] = static_cast<std::int32_t>(i);
  }
  t.next.assign(t.points.size(), {-1, -1, -1, -1});
  t.cumulative.assign(t.points.size(), {0, 0, 0, 0});
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const LatticePoint x = t.points[i];
    const double hx = h.at(x);
    if (is_stage_corner(stage, x) || hx <= 0) continue;
    const auto nb = neighbors(Vertex::unchecked(x));
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double hy = h.at(nb[k].point());
      t.next[i][k] = index.at(nb[k].point());
      acc += hy / (4 * hx);
      t.cumulative[i][k] = acc;
      if (hy > 0) last_positive = k;
    }
    for (std::size_t k = last_positive; k < 4; ++k) t.cumulative[i][k] = 1.0;
  }
  t.start = index.at(stage.start);
  t.target = index.at(stage.target);
  return t;
}

ConditionedWalk::ConditionedWalk(const ConditionedWalkSpec& spec, int max_level) : spec_(spec) {
  if (spec.level > max_level) {
    throw CapacityError("conditioned walk at level " + std::to_string(spec.level) +
                        " exceeds the memory budget (max level " + std::to_string(max_level) +
                        ")");
  }
  for (const Stage& stage : stages_for(spec)) tables_.push_back(build(stage));
}

Path ConditionedWalk::sample(RandomStream& rng) const {
  Path w{{kOrigin}, 0};
  for (const Table& t : tables_) {
    std::int32_t i = t.start;
    while (i != t.target) {
      const double u = rng.uniform();
      const auto& cum = t.cumulative[static_cast<std::size_t>(i)];
      std::size_t k = 0;
      while (k < 3 && u >= cum[k]) ++k;
      i = t.next[static_cast<std::size_t>(i)][k];
      w.points.push_back(t.points[static_cast<std::size_t>(i)]);
    }
  }
  return w;
}

Path sample_conditioned(const ConditionedWalkSpec& spec, RandomStream& rng) {
  return ConditionedWalk(spec).sample(rng);
}

std::optional<Path> rejection_attempt(const ConditionedWalkSpec& spec, RandomStream& rng) {
  std::vector<LatticePoint> pattern;
  if (auto via = crossing_via(spec.type, spec.level)) pattern.push_back(*via);
  pattern.push_back(crossing_target(spec.type, spec.level));
  Path w{{kOrigin}, 0};
  LatticePoint last_hit = kOrigin;
  std::size_t matched = 0;
  for (;;) {
    const auto nb = neighbors(Vertex::unchecked(w.points.back()));
    const LatticePoint p = nb[rng.below(nb.size())].point();
    w.points.push_back(p);
    if (p == last_hit || !in_level(p, spec.level)) continue;
    if (p != pattern[matched]) return std::nullopt;
    last_hit = p;
    if (++matched == pattern.size()) return w;
  }
}

Path sample_by_rejection(const ConditionedWalkSpec& spec, RandomStream& rng) {
  for (;;) {
    if (auto w = rejection_attempt(spec, rng)) return *w;
  }
}

}  // namespace lerw
