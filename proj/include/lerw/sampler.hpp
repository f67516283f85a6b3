#pragma once

// Exact samplers for loop-erased crossings built from the level-1 catalogs,
// without simulating any underlying random walk.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lerw/catalog.hpp"
#include "lerw/paths.hpp"
#include "lerw/random.hpp"

namespace lerw {

// Image of the canonical level-k triangle: p -> origin + (p.u * b + p.v * a) / 2^k,
// where b and a are the images of b_k and a_k relative to origin.
struct CellMap {
  LatticePoint origin;
  LatticePoint b;
  LatticePoint a;
  int level = 0;

  LatticePoint operator()(LatticePoint p) const {
    return origin + LatticePoint{(p.u * b.u + p.v * a.u) >> level, (p.u * b.v + p.v * a.v) >> level};
  }
  static CellMap identity(int level);
};

// Draws shapes with exact integer weights.
class ShapeTable {
 public:
  explicit ShapeTable(CrossingType type);
  const Shape& draw(RandomStream& rng) const;

 private:
  std::vector<const Shape*> shapes_;
  std::vector<std::uint64_t> cumulative_;
};

const ShapeTable& shape_table(CrossingType type);

// Depth-first expansion of crossings: one vertex per call, O(level) memory.
class CrossingStream {
 public:
  CrossingStream() = default;
  CrossingStream(int level, CrossingType type);

  // Schedules a crossing after everything already pending.
  void append(const CellMap& map, CrossingType type);
  bool empty() const { return pending_.empty() && stack_.empty(); }

  // Next vertex after the crossing start; nullopt when exhausted.
  std::optional<LatticePoint> next(RandomStream& rng);

 private:
  struct Frame {
    CellMap map;
    CrossingType type = CrossingType::A;
    const Shape* shape = nullptr;
    std::size_t next = 0;
  };
  std::vector<Frame> stack_;
  std::vector<Frame> pending_;  // reversed: back() runs first
};

// Exact law P^(type)_N on loopless crossings of the level-N triangle.
Path sample_crossing(int level, CrossingType type, RandomStream& rng);

// Length of a crossing drawn from P^(type)_N, via the two-type branching
// process of Type 1 / Type 2 cell counts.
std::uint64_t sample_exit_time(int level, CrossingType type, RandomStream& rng);

// Infinite-gasket walk. The prefix agrees with omega_N, a level-N crossing
// whose law is the alpha-mixture of the four crossing laws.
struct LevelRecord {
  int level = 0;
  CrossingType type = CrossingType::A;
  // Length of omega_level once it is fully expanded.
  std::optional<std::size_t> exit_time;
};

struct InfiniteWalkState {
  int level = -1;  // -1: fresh
  CrossingType type = CrossingType::A;
  std::vector<LatticePoint> points;
  std::vector<LevelRecord> history;
  CrossingStream pending;

  std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
};

InfiniteWalkState fresh_walk(RandomStream& rng);

// Grows the prefix to at least `target_steps` steps; fresh states are
// initialised first. Levels are raised only when the pending expansion runs
// out.
void extend_walk(InfiniteWalkState& state, std::size_t target_steps, RandomStream& rng);

// X(n); throws std::out_of_range past the expanded prefix.
LatticePoint position_at(const InfiniteWalkState& state, std::size_t n);

}  // namespace lerw
