#pragma once

// Loop erasure by the erasing-larger-loops-first rule.

#include "lerw/paths.hpp"

namespace lerw {

// Chronological loop erasure, computed with an explicit stack.
Path erase_chronological(const Path& w);

struct LargestErasure {
  Path result;
  Path coarse;  // loop-erased Q_{N-1} w, scale N-1
};

// Erase the loops of the coarse path at scale N-1 and restore the fine pieces
// between the surviving coarse steps.
LargestErasure erase_largest(const Path& w, int level);

// Full erasure of a crossing of a 2^level-triangle. The one-argument form
// takes level = crossing_level(w).
Path ellf(const Path& w);
Path ellf(const Path& w, int level);

// Stops once every loop at scales >= stop_scale has been handled.
Path ellf_partial(const Path& w, int level, int stop_scale);

// \hat Q_K w = Q_K of the partially erased path. hatQ(w, N, N) = Q_N w and
// hatQ(w, N, 0) = ellf(w).
Path hatQ(const Path& w, int level, int k);

}  // namespace lerw
