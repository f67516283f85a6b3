#include "lerw/catalog.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "lerw/errors.hpp"
#include "lerw/srw.hpp"

namespace lerw {

namespace {

constexpr LatticePoint kO{0, 0}, kA0{0, 1}, kB0{1, 0}, kC{1, 1}, kB1{2, 0}, kA1{0, 2};

const std::array<std::vector<LatticePoint>, 10>& label_table() {
  static const std::array<std::vector<LatticePoint>, 10> table{{
      {kO, kA0, kA1},
      {kO, kB0, kA0, kA1},
      {kO, kA0, kC, kA1},
      {kO, kB0, kA0, kC, kA1},
      {kO, kB0, kC, kA0, kA1},
      {kO, kA0, kB0, kC, kA1},
      {kO, kB0, kC, kA1},
      {kO, kB0, kB1, kC, kA1},
      {kO, kB0, kB1, kC, kA0, kA1},
      {kO, kA0, kB0, kB1, kC, kA1},
  }};
  return table;
}

void enumerate_self_avoiding(std::vector<LatticePoint>& prefix, LatticePoint target,
                             const TriangleAddress& box, std::vector<Path>& out) {
  const LatticePoint x = prefix.back();
  if (x == target) {
    out.push_back(Path{prefix, 0});
    return;
  }
  for (const Vertex& y : neighbors(Vertex::unchecked(x))) {
    const LatticePoint p = y.point();
    if (!box.contains(p) || std::find(prefix.begin(), prefix.end(), p) != prefix.end()) continue;
    prefix.push_back(p);
    enumerate_self_avoiding(prefix, target, box, out);
    prefix.pop_back();
  }
}

using SparseRow = std::map<std::size_t, Rational>;

// Gaussian elimination on sparse rational rows; the system must be nonsingular.
std::vector<Rational> solve_sparse(std::vector<SparseRow> rows, std::vector<Rational> rhs) {
  const std::size_t n = rows.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && !rows[piv].count(c)) ++piv;
    if (piv == n) throw IntegrityError("singular prefix-chain system");
    std::swap(rows[piv], rows[c]);
    std::swap(rhs[piv], rhs[c]);
    const Rational inv = 1 / rows[c].at(c);
    for (auto& [k, v] : rows[c]) v *= inv;
    rhs[c] *= inv;
    for (std::size_t r = c + 1; r < n; ++r) {
      auto it = rows[r].find(c);
      if (it == rows[r].end()) continue;
      const Rational f = it->second;
      for (const auto& [k, v] : rows[c]) {
        Rational& dst = rows[r][k];
        dst -= f * v;
        if (dst == 0) rows[r].erase(k);
      }
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t c = n; c-- > 0;) {
    Rational acc = rhs[c];
    for (const auto& [k, v] : rows[c]) {
      if (k != c) acc -= v * x[k];
    }
    x[c] = acc;
  }
  return x;
}

// Absorption law of the loop-erased prefix of the level-1 conditioned walk.
std::map<std::vector<LatticePoint>, Rational> prefix_chain_law(CrossingType type) {
  const TransitionTable table = exact_conditional_chain({1, type});
  std::vector<std::map<LatticePoint, const TransitionRow*>> rows(table.stages.size());
  for (std::size_t s = 0; s < table.stages.size(); ++s) {
    for (const TransitionRow& r : table.stages[s].rows) rows[s][r.from] = &r;
  }

  using State = std::pair<std::size_t, std::vector<LatticePoint>>;
  std::map<State, std::size_t> index;
  std::vector<State> states;
  // Transient-to-transient and transient-to-terminal transition weights.
  std::vector<std::vector<std::pair<std::size_t, Rational>>> moves;
  std::vector<std::vector<std::pair<std::vector<LatticePoint>, Rational>>> exits;

  auto intern = [&](State s) {
    auto [it, fresh] = index.emplace(s, states.size());
    if (fresh) {
      states.push_back(std::move(s));
      moves.emplace_back();
      exits.emplace_back();
    }
    return it->second;
  };
  intern({0, {kOrigin}});
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State cur = states[k];
    const Stage& stage = table.stages[cur.first].stage;
    for (const auto& [y, p] : rows[cur.first].at(cur.second.back())->to) {
      std::vector<LatticePoint> next = cur.second;
      auto hit = std::find(next.begin(), next.end(), y);
      if (hit != next.end()) next.erase(hit + 1, next.end());
      else next.push_back(y);
      if (y == stage.target) {
        if (cur.first + 1 == table.stages.size()) {
          exits[k].emplace_back(std::move(next), p);
          continue;
        }
        const std::size_t to = intern({cur.first + 1, std::move(next)});
        moves[k].emplace_back(to, p);
        continue;
      }
      const std::size_t to = intern({cur.first, std::move(next)});
      moves[k].emplace_back(to, p);
    }
  }

  // Expected visit counts g solve g (I - Q) = e_start.
  const std::size_t n = states.size();
  std::vector<SparseRow> sys(n);
  for (std::size_t s = 0; s < n; ++s) sys[s][s] += 1;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [to, p] : moves[s]) {
      Rational& v = sys[to][s];
      v -= p;
    }
  }
  std::vector<Rational> rhs(n, Rational(0));
  rhs[0] = 1;
  const std::vector<Rational> g = solve_sparse(std::move(sys), std::move(rhs));

  std::map<std::vector<LatticePoint>, Rational> law;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [path, p] : exits[s]) law[path] += g[s] * p;
  }
  return law;
}

}  // namespace

int shape_label(const Path& w) {
  const auto& table = label_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] == w.points) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::vector<ShapeCell> shape_cells(const Path& w) {
  std::vector<ShapeCell> cells;
  for (const Cell& c : skeleton(w, 0).cells) {
    ShapeCell sc;
    sc.type = c.type;
    sc.entry = w.points[c.entry_time];
    sc.exit = w.points[c.exit_time];
    if (c.type == CellType::Type1) {
      for (LatticePoint q : c.triangle.corners()) {
        if (q != sc.entry && q != sc.exit) sc.side = q;
      }
    } else if (c.type == CellType::Type2) {
      sc.side = w.points[c.entry_time + 1];
    } else {
      throw std::invalid_argument("shape cell visits a corner twice");
    }
    cells.push_back(sc);
  }
  return cells;
}

std::vector<Shape> exact_shape_catalog(CrossingType type) {
  const LatticePoint target = crossing_target(type, 1);
  const TriangleAddress box{kOrigin, 1, Side::Right};
  std::vector<Path> paths;
  std::vector<LatticePoint> prefix{kOrigin};
  enumerate_self_avoiding(prefix, target, box, paths);

  const auto law = prefix_chain_law(type);
  for (const auto& [path, p] : law) {
    if (std::none_of(paths.begin(), paths.end(),
                     [&](const Path& w) { return w.points == path; })) {
      throw IntegrityError("loop erasure produced a path outside the level-1 triangle");
    }
  }

  const bool mirrored = target == corner_b(1);
  std::vector<Shape> out;
  for (const Path& w : paths) {
    Shape s;
    s.crossing = type;
    s.path = w;
    Path canon = w;
    if (mirrored) {
      for (LatticePoint& q : canon.points) q = swap_ab(q);
    }
    s.label = shape_label(canon);
    if (s.label == 0) throw IntegrityError("unlabelled level-1 shape " + to_json(w));
    s.cells = shape_cells(w);
    for (const ShapeCell& c : s.cells) (c.type == CellType::Type1 ? s.s1 : s.s2) += 1;
    if (static_cast<std::size_t>(s.s1 + 2 * s.s2) != w.length()) {
      throw IntegrityError("cell counts disagree with length for " + to_json(w));
    }
    const std::size_t first_exit = skeleton(w, 0).cells.front().exit_time;
    Path first{std::vector<LatticePoint>(w.points.begin(),
                                         w.points.begin() + static_cast<std::ptrdiff_t>(first_exit) + 1),
               0};
    const auto ft = classify_unit_crossing(first);
    if (!ft) throw IntegrityError("first cell is not a unit crossing in " + to_json(w));
    s.first_cell = *ft;
    auto it = law.find(w.points);
    s.probability = it == law.end() ? Rational(0) : it->second;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Shape& a, const Shape& b) {
    auto key = [](const Shape& s) {
      std::vector<std::tuple<std::int64_t, std::int64_t, int>> k;
      for (const ShapeCell& c : s.cells) k.emplace_back(c.entry.u, c.entry.v, static_cast<int>(c.type));
      return std::make_pair(k, s.path.points);
    };
    return key(a) < key(b);
  });
  Rational total = 0;
  for (const Shape& s : out) total += s.probability;
  if (total != 1) throw IntegrityError("catalog mass is " + to_string(total));
  return out;
}

const std::vector<Shape>& shape_catalog(CrossingType type) {
  static std::array<std::vector<Shape>, 4> cache;
  static std::array<std::once_flag, 4> once;
  const auto k = static_cast<std::size_t>(index_of(type));
  std::call_once(once[k], [&] { cache[k] = exact_shape_catalog(type); });
  return cache[k];
}

std::array<Rational, 4> first_cell_groupings(CrossingType type) {
  std::array<Rational, 4> out{0, 0, 0, 0};
  for (const Shape& s : shape_catalog(type)) {
    out[static_cast<std::size_t>(index_of(s.first_cell))] += s.probability;
  }
  return out;
}

}  // namespace lerw
