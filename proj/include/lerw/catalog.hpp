#pragma once

// Loop-erased crossings of the level-1 triangle and their exact laws.

#include <array>
#include <cstdint>
#include <vector>

#include "lerw/paths.hpp"
#include "lerw/rational.hpp"

namespace lerw {

// One unit cell of a level-1 shape. `side` is the corner that plays the role
// of b in the cell's canonical frame: the unvisited corner of a Type 1 cell,
// the middle corner of a Type 2 cell.
struct ShapeCell {
  CellType type = CellType::Type1;
  LatticePoint entry;
  LatticePoint side;
  LatticePoint exit;
};

struct Shape {
  CrossingType crossing = CrossingType::A;
  int label = 0;  // 1..10, shared by a shape and its mirror image
  Path path;
  std::vector<ShapeCell> cells;
  int s1 = 0;
  int s2 = 0;
  CrossingType first_cell = CrossingType::A;
  Rational probability;
};

// Solves the loop-erased prefix chain of the level-1 conditioned walk exactly.
std::vector<Shape> exact_shape_catalog(CrossingType type);

// Cached copy of exact_shape_catalog; built once per type, thread-safe.
const std::vector<Shape>& shape_catalog(CrossingType type);

// Catalog mass by first-cell type, indexed by CrossingType.
std::array<Rational, 4> first_cell_groupings(CrossingType type);

// Canonical label of a loopless O -> a_1 path (1..10), 0 if none.
int shape_label(const Path& path_to_a1);

// Cells of a loopless level-1 crossing read off its unit skeleton.
std::vector<ShapeCell> shape_cells(const Path& w);

// Canonical sub-crossing of a cell: A for Type 1, BA for Type 2.
constexpr CrossingType cell_crossing(CellType t) {
  return t == CellType::Type1 ? CrossingType::A : CrossingType::BA;
}

// Affine placement of a canonical level-k point into a cell whose corners are
// entry (image of O), side (image of b_k) and exit (image of a_k); `span` = 2^k.
inline LatticePoint place_in_cell(LatticePoint p, LatticePoint entry, LatticePoint side,
                                  LatticePoint exit, std::int64_t span) {
  const LatticePoint db = side - entry;
  const LatticePoint da = exit - entry;
  return entry + LatticePoint{(p.u * db.u + p.v * da.u) / span, (p.u * db.v + p.v * da.v) / span};
}

}  // namespace lerw
