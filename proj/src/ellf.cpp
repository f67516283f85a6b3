#include "lerw/ellf.hpp"

#include <stdexcept>
#include <unordered_map>

namespace lerw {

Path erase_chronological(const Path& w) {
  Path out{{}, w.scale};
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> pos;
  for (LatticePoint p : w.points) {
    auto it = pos.find(p);
    if (it == pos.end()) {
      pos.emplace(p, out.points.size());
      out.points.push_back(p);
      continue;
    }
    const std::size_t keep = it->second + 1;
    for (std::size_t k = keep; k < out.points.size(); ++k) pos.erase(out.points[k]);
    out.points.resize(keep);
  }
  return out;
}

LargestErasure erase_largest(const Path& w, int level) {
  if (level < 1) throw std::invalid_argument("erase_largest needs level >= 1");
  const int coarse_scale = level - 1;
  const std::vector<std::size_t> times = hitting_times(w, coarse_scale).times;
  const std::size_t m = times.size() - 1;

  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> last;
  for (std::size_t i = 0; i <= m; ++i) last[w.points[times[i]]] = i;

  LargestErasure out{{{}, w.scale}, {{}, coarse_scale}};
  std::size_t i = last.at(w.points[times[0]]);
  out.result.points.push_back(w.points[times[i]]);
  out.coarse.points.push_back(w.points[times[i]]);
  while (i < m) {
    out.result.points.insert(out.result.points.end(),
                             w.points.begin() + static_cast<std::ptrdiff_t>(times[i]) + 1,
                             w.points.begin() + static_cast<std::ptrdiff_t>(times[i + 1]) + 1);
    i = last.at(w.points[times[i + 1]]);
    out.coarse.points.push_back(w.points[times[i]]);
  }
  out.result.points.insert(out.result.points.end(),
                           w.points.begin() + static_cast<std::ptrdiff_t>(times[m]) + 1,
                           w.points.end());
  return out;
}

static void erase_into(const Path& w, std::size_t from, std::size_t to, int level, int stop,
                       Path& out);

static void erase_cells(const Path& w, int level, int stop, Path& out) {
  // w is free of loops at scale level-1; recurse into its 2^(level-1)-cells.
  const Skeleton sk = skeleton(w, level - 1);
  if (sk.cells.empty()) {
    out.points.insert(out.points.end(), w.points.begin() + 1, w.points.end());
    return;
  }
  for (const Cell& c : sk.cells) erase_into(w, c.entry_time, c.exit_time, level - 1, stop, out);
  const std::size_t tail = sk.cells.back().exit_time;
  out.points.insert(out.points.end(), w.points.begin() + static_cast<std::ptrdiff_t>(tail) + 1,
                    w.points.end());
}

// Appends the erasure of w[from..to] (without its first point) to out.
static void erase_into(const Path& w, std::size_t from, std::size_t to, int level, int stop,
                       Path& out) {
  if (level <= stop) {
    out.points.insert(out.points.end(), w.points.begin() + static_cast<std::ptrdiff_t>(from) + 1,
                      w.points.begin() + static_cast<std::ptrdiff_t>(to) + 1);
    return;
  }
  Path piece{std::vector<LatticePoint>(w.points.begin() + static_cast<std::ptrdiff_t>(from),
                                       w.points.begin() + static_cast<std::ptrdiff_t>(to) + 1),
             w.scale};
  const Path erased = erase_largest(piece, level).result;
  if (level - 1 <= stop) {
    out.points.insert(out.points.end(), erased.points.begin() + 1, erased.points.end());
    return;
  }
  erase_cells(erased, level, stop, out);
}

Path ellf_partial(const Path& w, int level, int stop_scale) {
  if (w.points.empty()) throw std::invalid_argument("empty path");
  if (stop_scale < 0) throw std::invalid_argument("negative stop scale");
  Path out{{w.points.front()}, w.scale};
  erase_into(w, 0, w.points.size() - 1, level, stop_scale, out);
  return out;
}

Path ellf(const Path& w, int level) { return ellf_partial(w, level, 0); }

Path ellf(const Path& w) { return ellf(w, crossing_level(w)); }

Path hatQ(const Path& w, int level, int k) {
  if (k < 0 || k > level) throw std::invalid_argument("hatQ needs 0 <= K <= N");
  return coarse_grain(ellf_partial(w, level, k), k);
}

}  // namespace lerw
