#include "gridex/mapgen.hpp"

#include <algorithm>

#include "gridex/rng.hpp"

namespace gridex {

void DungeonParams::validate() const {
  if (width < 10 || height < 10) throw ConfigError("map must be at least 10x10 cells");
  if (rooms < 1) throw ConfigError("room count must be >= 1");
  if (room_min < 1 || room_max < room_min) throw ConfigError("invalid room size range");
  if (corridor_width < 1) throw ConfigError("corridor width must be >= 1");
  if (!(resolution > 0.0)) throw ConfigError("resolution must be positive");
  if (placement_attempts < 1) throw ConfigError("placement attempts must be >= 1");
}

namespace {

bool overlaps(const Room& a, const Room& b, int gap) {
  return a.x - gap < b.x + b.w && b.x - gap < a.x + a.w && a.y - gap < b.y + b.h && b.y - gap < a.y + a.h;
}

void carve(OccupancyGrid& g, int x0, int y0, int x1, int y1) {
  x0 = std::max(x0, 1);
  y0 = std::max(y0, 1);
  x1 = std::min(x1, g.width() - 2);
  y1 = std::min(y1, g.height() - 2);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) g.set(CellIndex{x, y}, CellState::Free);
}

}  // namespace

DungeonMap generate_dungeon(std::uint64_t seed, const DungeonParams& p) {
  p.validate();
  Rng rng(seed);
  DungeonMap out{OccupancyGrid(p.width, p.height, p.resolution, p.origin, CellState::Obstacle), {}, {}};

  const int inner_w = p.width - 2, inner_h = p.height - 2;
  const int wmin = std::min(p.room_min, inner_w), wmax = std::min(p.room_max, inner_w);
  const int hmin = std::min(p.room_min, inner_h), hmax = std::min(p.room_max, inner_h);
  for (int attempt = 0; attempt < p.placement_attempts && static_cast<int>(out.rooms.size()) < p.rooms; ++attempt) {
    Room r;
    r.w = static_cast<int>(rng.uniform_int(wmin, wmax));
    r.h = static_cast<int>(rng.uniform_int(hmin, hmax));
    r.x = static_cast<int>(rng.uniform_int(1, p.width - 1 - r.w));
    r.y = static_cast<int>(rng.uniform_int(1, p.height - 1 - r.h));
    const bool clash = std::any_of(out.rooms.begin(), out.rooms.end(), [&](const Room& o) { return overlaps(r, o, 2); });
    if (!clash) out.rooms.push_back(r);
  }
  // The first candidate always fits an empty map, so at least one room exists.

  for (const Room& r : out.rooms) carve(out.truth, r.x, r.y, r.x + r.w - 1, r.y + r.h - 1);

  const int lo = p.corridor_width / 2;
  const int hi = p.corridor_width - 1 - lo;
  for (std::size_t i = 1; i < out.rooms.size(); ++i) {
    const CellIndex a = out.rooms[i - 1].center();
    const CellIndex b = out.rooms[i].center();
    const bool horizontal_first = rng.uniform_int(0, 1) == 0;
    const CellIndex corner = horizontal_first ? CellIndex{b.x, a.y} : CellIndex{a.x, b.y};
    // leg a -> corner, then corner -> b; each leg is a band around the center line
    for (auto [s, e] : {std::pair{a, corner}, std::pair{corner, b}}) {
      if (s.y == e.y)
        carve(out.truth, std::min(s.x, e.x) - lo, s.y - lo, std::max(s.x, e.x) + hi, s.y + hi);
      else
        carve(out.truth, s.x - lo, std::min(s.y, e.y) - lo, s.x + hi, std::max(s.y, e.y) + hi);
    }
  }
  out.start = out.rooms.front().center();
  return out;
}

}  // namespace gridex
