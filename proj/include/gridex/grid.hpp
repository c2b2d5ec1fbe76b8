#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <span>
#include <vector>

#include "gridex/common.hpp"

namespace gridex {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

/// Ternary occupancy lattice used for both ground truth and robot belief.
/// Cell (x, y) covers [origin + x*res, origin + (x+1)*res) along each axis.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Pose2 origin = {},
                CellState fill = CellState::Unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Pose2 origin() const { return origin_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  int index(CellIndex c) const { return c.y * width_ + c.x; }
  CellIndex cell(int index) const { return {index % width_, index / width_}; }

  CellState at(CellIndex c) const { return cells_[static_cast<std::size_t>(index(c))]; }
  CellState at(int index) const { return cells_[static_cast<std::size_t>(index)]; }
  void set(CellIndex c, CellState s) { cells_[static_cast<std::size_t>(index(c))] = s; }
  void set(int index, CellState s) { cells_[static_cast<std::size_t>(index)] = s; }

  /// Cell containing a world point. May be out of bounds.
  CellIndex cell_of(Pose2 p) const;
  /// World position of a cell center.
  Pose2 center_of(CellIndex c) const;

  std::size_t count(CellState s) const;
  std::span<const CellState> cells() const { return cells_; }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Pose2 origin_{};
  std::vector<CellState> cells_;
};

/// Integer line stepping from a to b inclusive. `visit(CellIndex)` returns
/// false to stop early. Returns true when the walk reached b.
template <typename Visit>
bool trace_ray(CellIndex a, CellIndex b, Visit&& visit) {
  int dx = std::abs(b.x - a.x);
  int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  CellIndex c = a;
  while (true) {
    if (!visit(c)) return false;
    if (c == b) return true;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      c.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      c.y += sy;
    }
  }
}

struct SensorConfig {
  double range = 20.0;  // meters, omnidirectional
};

/// Copies truth into belief along one ray per cell of the range disc, up to
/// and including the first truth obstacle. Known belief cells never change.
/// Returns the number of belief cells that changed.
std::size_t raycast_scan(const OccupancyGrid& truth, OccupancyGrid& belief, Pose2 pose,
                         const SensorConfig& cfg);

/// Sorted cell indices.
using FrontierSet = std::vector<int>;

/// Free cells with at least one Unknown cell in their 8-neighborhood.
FrontierSet detect_frontiers(const OccupancyGrid& belief);

/// True iff `cell` is Free and has an Unknown 8-neighbor.
bool is_frontier(const OccupancyGrid& belief, CellIndex cell);

/// Byte mask over the grid, 1 on frontier cells.
std::vector<std::uint8_t> frontier_mask(const OccupancyGrid& belief, const FrontierSet& frontiers);

/// Frontier cells observable from `node`: within d_utility, reachable by a
/// ray of Free cells, and with an Unknown neighbor that a ray from `node`
/// would reach through known-Free cells (so a scan at `node` resolves it).
std::vector<int> observable_frontiers(const OccupancyGrid& belief, std::span<const std::uint8_t> mask,
                                      Pose2 node, double d_utility);

/// Frontiers observable from at least one of `nodes`.
FrontierSet coverable_frontiers(const OccupancyGrid& belief, const FrontierSet& frontiers,
                                std::span<const Pose2> nodes, double d_utility);

/// Cells reachable from `start` through 4-connected Free cells.
std::vector<std::uint8_t> flood_fill_free(const OccupancyGrid& grid, CellIndex start);

/// Portable gray map (P5: 0 obstacle, 127 unknown, 255 free) plus a
/// `<path>.meta` sidecar with resolution and origin.
void save_grid_image(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid load_grid_image(const std::filesystem::path& path);

}  // namespace gridex
