#include "lerw/sampler.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

#include "lerw/errors.hpp"
#include "lerw/measures.hpp"

namespace lerw {

CellMap CellMap::identity(int level) {
  const std::int64_t span = std::int64_t{1} << level;
  return {kOrigin, span * corner_b(0), span * corner_a(0), level};
}

namespace {

// Weights w_i / sum(w) as integers over a common denominator.
std::vector<std::uint64_t> integer_weights(const std::vector<Rational>& probs) {
  mpz_class den = 1;
  for (const Rational& p : probs) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), p.get_den_mpz_t());
  std::vector<std::uint64_t> out;
  for (const Rational& p : probs) {
    const mpz_class n = p.get_num() * (den / p.get_den());
    if (!n.fits_ulong_p()) throw CapacityError("shape weights overflow 64 bits");
    out.push_back(n.get_ui());
  }
  return out;
}

std::size_t draw_index(const std::vector<std::uint64_t>& cumulative, RandomStream& rng) {
  const std::uint64_t r = rng.below(cumulative.back());
  return static_cast<std::size_t>(
      std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
}

CellMap child_map(const CellMap& parent, const ShapeCell& cell) {
  // Cell corners are level-1 points; in level-k coordinates they sit at 2^(k-1) times that.
  const int k = parent.level;
  const std::int64_t half = std::int64_t{1} << (k - 1);
  const LatticePoint entry = parent(half * cell.entry);
  return {entry, parent(half * cell.side) - entry, parent(half * cell.exit) - entry, k - 1};
}

}  // namespace

ShapeTable::ShapeTable(CrossingType type) {
  std::vector<Rational> probs;
  for (const Shape& s : shape_catalog(type)) {
    if (s.probability == 0) continue;
    shapes_.push_back(&s);
    probs.push_back(s.probability);
  }
  cumulative_ = integer_weights(probs);
  std::partial_sum(cumulative_.begin(), cumulative_.end(), cumulative_.begin());
}

const Shape& ShapeTable::draw(RandomStream& rng) const {
  return *shapes_[draw_index(cumulative_, rng)];
}

const ShapeTable& shape_table(CrossingType type) {
  static const std::array<ShapeTable, 4> tables{ShapeTable(CrossingType::A),
                                                ShapeTable(CrossingType::B),
                                                ShapeTable(CrossingType::BA),
                                                ShapeTable(CrossingType::AB)};
  return tables[static_cast<std::size_t>(index_of(type))];
}

CrossingStream::CrossingStream(int level, CrossingType type) {
  append(CellMap::identity(level), type);
}

void CrossingStream::append(const CellMap& map, CrossingType type) {
  pending_.insert(pending_.begin(), Frame{map, type, nullptr, 0});
}

std::optional<LatticePoint> CrossingStream::next(RandomStream& rng) {
  for (;;) {
    if (stack_.empty()) {
      if (pending_.empty()) return std::nullopt;
      stack_.push_back(pending_.back());
      pending_.pop_back();
    }
    Frame& top = stack_.back();
    if (top.map.level == 0) {
      static const std::array<Path, 4> units{unit_crossing(CrossingType::A), unit_crossing(CrossingType::B),
                                             unit_crossing(CrossingType::BA),
                                             unit_crossing(CrossingType::AB)};
      const Path& unit = units[static_cast<std::size_t>(index_of(top.type))];
      if (++top.next < unit.points.size()) return top.map(unit.points[top.next]);
      stack_.pop_back();
      continue;
    }
    if (top.shape == nullptr) top.shape = &shape_table(top.type).draw(rng);
    if (top.next == top.shape->cells.size()) {
      stack_.pop_back();
      continue;
    }
    const ShapeCell& cell = top.shape->cells[top.next++];
    Frame child{child_map(top.map, cell), cell_crossing(cell.type), nullptr, 0};
    stack_.push_back(child);
  }
}

Path sample_crossing(int level, CrossingType type, RandomStream& rng) {
  if (level < 0) throw std::invalid_argument("negative level");
  Path w{{kOrigin}, 0};
  CrossingStream stream(level, type);
  while (auto p = stream.next(rng)) w.points.push_back(*p);
  return w;
}

namespace {

struct Offspring {
  std::vector<std::array<std::uint64_t, 2>> counts;
  std::vector<std::uint64_t> cumulative;
};

const Offspring& offspring(int cell_type_index) {
  static const std::array<Offspring, 2> table = [] {
    std::array<Offspring, 2> t;
    for (int k = 0; k < 2; ++k) {
      std::vector<Rational> probs;
      for (const Shape& s : shape_catalog(k == 0 ? CrossingType::A : CrossingType::BA)) {
        if (s.probability == 0) continue;
        t[k].counts.push_back({static_cast<std::uint64_t>(s.s1), static_cast<std::uint64_t>(s.s2)});
        probs.push_back(s.probability);
      }
      t[k].cumulative = integer_weights(probs);
      std::partial_sum(t[k].cumulative.begin(), t[k].cumulative.end(), t[k].cumulative.begin());
    }
    return t;
  }();
  return table[static_cast<std::size_t>(cell_type_index)];
}

}  // namespace

std::uint64_t sample_exit_time(int level, CrossingType type, RandomStream& rng) {
  if (level < 0) throw std::invalid_argument("negative level");
  std::array<std::uint64_t, 2> pop{0, 0};
  pop[is_two_corner(type) ? 0 : 1] = 1;
  for (int g = 0; g < level; ++g) {
    std::array<std::uint64_t, 2> next{0, 0};
    for (int k = 0; k < 2; ++k) {
      const Offspring& o = offspring(k);
      for (std::uint64_t i = 0; i < pop[static_cast<std::size_t>(k)]; ++i) {
        const auto& c = o.counts[draw_index(o.cumulative, rng)];
        next[0] += c[0];
        next[1] += c[1];
      }
    }
    pop = next;
  }
  return pop[0] + 2 * pop[1];
}

namespace {

// Level-up kernel. Under the limit law the level-(N+1) crossing has type j
// with probability alpha_j and shape sigma with probability P^(j)_1[sigma];
// its first 2^N-cell carries a level-N crossing of type first(sigma) whose law
// does not depend on (j, sigma) beyond that type. Conditioning on the observed
// level-N type i therefore gives weight alpha_j P^(j)_1[sigma] 1{first = i},
// whose total is (alpha P)_i = alpha_i, and leaves omega_N untouched.
struct LevelUp {
  std::vector<std::pair<CrossingType, const Shape*>> choices;
  std::vector<std::uint64_t> cumulative;
};

const LevelUp& level_up(CrossingType from) {
  static const std::array<LevelUp, 4> table = [] {
    const Vec4Q alpha = type_chain().alpha;
    std::array<LevelUp, 4> t;
    for (CrossingType i : kAllTypes) {
      LevelUp& l = t[static_cast<std::size_t>(index_of(i))];
      std::vector<Rational> w;
      for (CrossingType j : kAllTypes) {
        for (const Shape& s : shape_catalog(j)) {
          if (s.probability == 0 || s.first_cell != i) continue;
          l.choices.emplace_back(j, &s);
          w.push_back(alpha[static_cast<std::size_t>(index_of(j))] * s.probability);
        }
      }
      l.cumulative = integer_weights(w);
      std::partial_sum(l.cumulative.begin(), l.cumulative.end(), l.cumulative.begin());
    }
    return t;
  }();
  return table[static_cast<std::size_t>(index_of(from))];
}

void raise_level(InfiniteWalkState& s, RandomStream& rng) {
  s.history.back().exit_time = s.steps();
  const LevelUp& l = level_up(s.type);
  const auto& [j, shape] = l.choices[draw_index(l.cumulative, rng)];
  const std::int64_t span = std::int64_t{1} << s.level;
  for (std::size_t c = 1; c < shape->cells.size(); ++c) {
    const ShapeCell& cell = shape->cells[c];
    const LatticePoint entry = span * cell.entry;
    s.pending.append({entry, span * cell.side - entry, span * cell.exit - entry, s.level},
                     cell_crossing(cell.type));
  }
  s.level += 1;
  s.type = j;
  s.history.push_back({s.level, s.type, std::nullopt});
}

}  // namespace

InfiniteWalkState fresh_walk(RandomStream& rng) {
  static const std::vector<std::uint64_t> cumulative = [] {
    const Vec4Q alpha = type_chain().alpha;
    const std::vector<Rational> a(alpha.begin(), alpha.end());
    std::vector<std::uint64_t> c = integer_weights(a);
    std::partial_sum(c.begin(), c.end(), c.begin());
    return c;
  }();
  InfiniteWalkState s;
  s.level = 0;
  s.type = kAllTypes[draw_index(cumulative, rng)];
  s.points = {kOrigin};
  s.history = {{0, s.type, std::nullopt}};
  s.pending.append(CellMap::identity(0), s.type);
  return s;
}

void extend_walk(InfiniteWalkState& state, std::size_t target_steps, RandomStream& rng) {
  if (state.level < 0) state = fresh_walk(rng);
  while (state.steps() < target_steps) {
    if (auto p = state.pending.next(rng)) {
      state.points.push_back(*p);
      continue;
    }
    raise_level(state, rng);
  }
}

LatticePoint position_at(const InfiniteWalkState& state, std::size_t n) {
  if (n >= state.points.size()) {
    throw std::out_of_range("step " + std::to_string(n) + " beyond the expanded prefix of " +
                            std::to_string(state.steps()));
  }
  return state.points[n];
}

}  // namespace lerw
