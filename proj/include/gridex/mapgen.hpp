#pragma once

#include <cstdint>
#include <vector>

#include "gridex/grid.hpp"

namespace gridex {

/// Rooms-and-corridors generator parameters. Sizes are in cells.
struct DungeonParams {
  int width = 250;
  int height = 250;
  double resolution = 0.4;
  Pose2 origin{};
  int rooms = 8;
  int room_min = 24;
  int room_max = 60;
  /// Corridor width in cells; wide enough for two node-lattice lines at the
  /// default 0.4 m cells / 4 m node spacing.
  int corridor_width = 20;
  int placement_attempts = 200;

  void validate() const;
};

struct Room {
  int x = 0, y = 0, w = 0, h = 0;
  CellIndex center() const { return {x + w / 2, y + h / 2}; }
};

struct DungeonMap {
  OccupancyGrid truth;
  std::vector<Room> rooms;
  CellIndex start;  // center of the first room
};

/// Places non-overlapping rectangular rooms, joins consecutive room centers
/// with L-shaped corridors and keeps a one-cell obstacle border. The result
/// has no Unknown cells and one connected free component.
DungeonMap generate_dungeon(std::uint64_t seed, const DungeonParams& params);

inline OccupancyGrid generate_dungeon_map(std::uint64_t seed, const DungeonParams& params) {
  return generate_dungeon(seed, params).truth;
}

}  // namespace gridex
