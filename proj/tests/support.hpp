#pragma once

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "gridex/grid.hpp"
#include "gridex/rng.hpp"

namespace gridex::test {

inline OccupancyGrid filled(int w, int h, CellState s, double res = 1.0) { return OccupancyGrid(w, h, res, {}, s); }

/// Obstacle border around a free interior.
inline OccupancyGrid open_room(int w, int h, double res = 1.0) {
  OccupancyGrid g(w, h, res, {}, CellState::Free);
  for (int x = 0; x < w; ++x) {
    g.set(CellIndex{x, 0}, CellState::Obstacle);
    g.set(CellIndex{x, h - 1}, CellState::Obstacle);
  }
  for (int y = 0; y < h; ++y) {
    g.set(CellIndex{0, y}, CellState::Obstacle);
    g.set(CellIndex{w - 1, y}, CellState::Obstacle);
  }
  return g;
}

/// Each cell drawn independently with the given weights (unknown, free, obstacle).
inline OccupancyGrid random_grid(Rng& rng, int w, int h, int pu, int pf, int po, double res = 1.0) {
  OccupancyGrid g(w, h, res);
  const int total = pu + pf + po;
  for (int i = 0; i < w * h; ++i) {
    const auto r = rng.uniform_int(0, total - 1);
    g.set(i, r < pu ? CellState::Unknown : (r < pu + pf ? CellState::Free : CellState::Obstacle));
  }
  return g;
}

/// Truth with only Free and Obstacle cells.
inline OccupancyGrid random_truth(Rng& rng, int w, int h, int obstacle_percent, double res = 1.0) {
  return random_grid(rng, w, h, 0, 100 - obstacle_percent, obstacle_percent, res);
}

/// Direct 8-neighborhood predicate over every cell.
inline std::vector<int> brute_frontiers(const OccupancyGrid& g) {
  std::vector<int> out;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (g.at(CellIndex{x, y}) != CellState::Free) continue;
      bool hit = false;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const CellIndex n{x + dx, y + dy};
          if (g.in_bounds(n) && g.at(n) == CellState::Unknown) hit = true;
        }
      if (hit) out.push_back(g.index(CellIndex{x, y}));
    }
  return out;
}

}  // namespace gridex::test
