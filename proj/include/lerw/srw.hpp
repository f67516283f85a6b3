#pragma once

// Simple random walk on the gasket conditioned on the order in which it meets
// the coarse vertex set G_N.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lerw/gasket.hpp"
#include "lerw/paths.hpp"
#include "lerw/random.hpp"
#include "lerw/rational.hpp"

namespace lerw {

struct ConditionedWalkSpec {
  int level = 1;
  CrossingType type = CrossingType::A;
};

// One conditioning stage: walk from `start` inside the two 2^level-triangles at
// `start` until the first visit to one of their other corners, conditioned on
// that corner being `target`.
struct Stage {
  LatticePoint start;
  LatticePoint target;
  int level = 0;
};

std::vector<Stage> stages_for(const ConditionedWalkSpec& spec);

// Vertices of the two 2^level-triangles at `start`, sorted.
std::vector<LatticePoint> stage_region(LatticePoint start, int level);
std::vector<LatticePoint> reachable_region(int level);

// Probability of reaching `target` first, for every vertex of the stage region.
std::map<LatticePoint, Rational> exact_harmonic(const Stage& stage);

struct TransitionRow {
  LatticePoint from;
  std::vector<std::pair<LatticePoint, Rational>> to;
};

struct StageTable {
  Stage stage;
  std::vector<TransitionRow> rows;  // non-absorbing vertices with positive h
};

struct TransitionTable {
  ConditionedWalkSpec spec;
  std::vector<StageTable> stages;
};

constexpr int kDefaultExactLimit = 6;

// Throws CapacityError above `exact_limit`.
TransitionTable exact_conditional_chain(const ConditionedWalkSpec& spec,
                                        int exact_limit = kDefaultExactLimit);

// Floating-point h-transform sampler. Tables are built once and are read-only
// afterwards, so one instance can serve any number of threads.
class ConditionedWalk {
 public:
  static constexpr int kDefaultMaxLevel = 12;

  explicit ConditionedWalk(const ConditionedWalkSpec& spec, int max_level = kDefaultMaxLevel);

  const ConditionedWalkSpec& spec() const { return spec_; }
  Path sample(RandomStream& rng) const;

 private:
  struct Table {
    std::vector<LatticePoint> points;
    std::vector<std::array<std::int32_t, 4>> next;
    std::vector<std::array<double, 4>> cumulative;
    std::int32_t start = -1;
    std::int32_t target = -1;
  };
  static Table build(const Stage& stage);

  ConditionedWalkSpec spec_;
  std::vector<Table> tables_;
};

Path sample_conditioned(const ConditionedWalkSpec& spec, RandomStream& rng);

// Plain walk from O, kept only if its G_N hits (counted once in a row) start
// with the pattern of `spec`. Used as an independent check for small N.
std::optional<Path> rejection_attempt(const ConditionedWalkSpec& spec, RandomStream& rng);
Path sample_by_rejection(const ConditionedWalkSpec& spec, RandomStream& rng);

}  // namespace lerw
