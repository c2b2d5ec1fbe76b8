#include "gridex/grid.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace gridex {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Pose2 origin, CellState fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width <= 0 || height <= 0) throw ConfigError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

CellIndex OccupancyGrid::cell_of(Pose2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

Pose2 OccupancyGrid::center_of(CellIndex c) const {
  return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

namespace {

// Offsets of every cell whose center lies within `radius` cells of the origin cell.
std::vector<CellIndex> disc_offsets(double radius) {
  std::vector<CellIndex> out;
  const int r = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (static_cast<double>(dx * dx + dy * dy) <= r2) out.push_back({dx, dy});
  return out;
}

}  // namespace

std::size_t raycast_scan(const OccupancyGrid& truth, OccupancyGrid& belief, Pose2 pose,
                         const SensorConfig& cfg) {
  if (!(cfg.range > 0.0)) throw ConfigError("sensor range must be positive");
  if (truth.width() != belief.width() || truth.height() != belief.height())
    throw PreconditionError("truth and belief dimensions differ");
  const CellIndex origin = truth.cell_of(pose);
  if (!truth.in_bounds(origin)) throw PreconditionError("scan pose outside the grid");
  if (truth.at(origin) != CellState::Free) throw PreconditionError("scan pose is not on a free cell");

  std::size_t changed = 0;
  for (CellIndex off : disc_offsets(cfg.range / truth.resolution())) {
    const CellIndex target{origin.x + off.x, origin.y + off.y};
    trace_ray(origin, target, [&](CellIndex c) {
      if (!truth.in_bounds(c)) return false;
      const CellState t = truth.at(c);
      if (belief.at(c) == CellState::Unknown) {
        belief.set(c, t);
        ++changed;
      }
      return t != CellState::Obstacle;
    });
  }
  return changed;
}

bool is_frontier(const OccupancyGrid& belief, CellIndex cell) {
  if (belief.at(cell) != CellState::Free) return false;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const CellIndex n{cell.x + dx, cell.y + dy};
      if (belief.in_bounds(n) && belief.at(n) == CellState::Unknown) return true;
    }
  return false;
}

FrontierSet detect_frontiers(const OccupancyGrid& belief) {
  FrontierSet out;
  for (int y = 0; y < belief.height(); ++y)
    for (int x = 0; x < belief.width(); ++x)
      if (is_frontier(belief, {x, y})) out.push_back(belief.index({x, y}));
  return out;
}

std::vector<std::uint8_t> frontier_mask(const OccupancyGrid& belief, const FrontierSet& frontiers) {
  std::vector<std::uint8_t> mask(belief.size(), 0);
  for (int f : frontiers) mask[static_cast<std::size_t>(f)] = 1;
  return mask;
}

std::vector<int> observable_frontiers(const OccupancyGrid& belief, std::span<const std::uint8_t> mask,
                                      Pose2 node, double d_utility) {
  std::vector<int> out;
  const CellIndex origin = belief.cell_of(node);
  if (!belief.in_bounds(origin)) return out;
  const double res = belief.resolution();
  const double reach = d_utility / res;
  const int r = static_cast<int>(std::floor(reach));
  const double r2 = reach * reach;

  auto free_ray = [&](CellIndex to) {
    return trace_ray(origin, to, [&](CellIndex c) { return belief.at(c) == CellState::Free; });
  };
  // Ray to `to` whose cells before `to` are all Free.
  auto free_prefix = [&](CellIndex to) {
    return trace_ray(origin, to, [&](CellIndex c) { return c == to || belief.at(c) == CellState::Free; });
  };

  const int y0 = std::max(0, origin.y - r), y1 = std::min(belief.height() - 1, origin.y + r);
  const int x0 = std::max(0, origin.x - r), x1 = std::min(belief.width() - 1, origin.x + r);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const CellIndex f{x, y};
      const int fi = belief.index(f);
      if (!mask[static_cast<std::size_t>(fi)]) continue;
      const int dx = x - origin.x, dy = y - origin.y;
      if (static_cast<double>(dx * dx + dy * dy) > r2) continue;
      if (!free_ray(f)) continue;
      bool witnessed = false;
      for (int ny = -1; ny <= 1 && !witnessed; ++ny)
        for (int nx = -1; nx <= 1 && !witnessed; ++nx) {
          const CellIndex u{x + nx, y + ny};
          if ((nx == 0 && ny == 0) || !belief.in_bounds(u) || belief.at(u) != CellState::Unknown) continue;
          witnessed = free_prefix(u);
        }
      if (witnessed) out.push_back(fi);
    }
  }
  return out;
}

FrontierSet coverable_frontiers(const OccupancyGrid& belief, const FrontierSet& frontiers,
                                std::span<const Pose2> nodes, double d_utility) {
  if (frontiers.empty()) return {};
  const auto mask = frontier_mask(belief, frontiers);
  std::vector<std::uint8_t> covered(belief.size(), 0);
  for (Pose2 p : nodes)
    for (int f : observable_frontiers(belief, mask, p, d_utility)) covered[static_cast<std::size_t>(f)] = 1;
  FrontierSet out;
  for (int f : frontiers)
    if (covered[static_cast<std::size_t>(f)]) out.push_back(f);
  return out;
}

std::vector<std::uint8_t> flood_fill_free(const OccupancyGrid& grid, CellIndex start) {
  std::vector<std::uint8_t> seen(grid.size(), 0);
  if (!grid.in_bounds(start) || grid.at(start) != CellState::Free) return seen;
  std::vector<CellIndex> stack{start};
  seen[static_cast<std::size_t>(grid.index(start))] = 1;
  constexpr CellIndex kSteps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    for (CellIndex s : kSteps) {
      const CellIndex n{c.x + s.x, c.y + s.y};
      if (!grid.in_bounds(n) || grid.at(n) != CellState::Free) continue;
      auto& flag = seen[static_cast<std::size_t>(grid.index(n))];
      if (flag) continue;
      flag = 1;
      stack.push_back(n);
    }
  }
  return seen;
}

void save_grid_image(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  // Image rows run top to bottom; grid row 0 is the bottom (min y) row.
  for (int y = grid.height() - 1; y >= 0; --y)
    for (int x = 0; x < grid.width(); ++x) {
      unsigned char v = 127;
      switch (grid.at(CellIndex{x, y})) {
        case CellState::Obstacle: v = 0; break;
        case CellState::Free: v = 255; break;
        case CellState::Unknown: v = 127; break;
      }
      out.put(static_cast<char>(v));
    }
  std::ofstream meta(path.string() + ".meta");
  meta.precision(17);
  meta << "resolution " << grid.resolution() << "\n"
       << "origin " << grid.origin().x << ' ' << grid.origin().y << "\n";
}

OccupancyGrid load_grid_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) throw InputError("unsupported image header in " + path.string());
  in.get();
  double res = 1.0;
  Pose2 origin{};
  std::ifstream meta(path.string() + ".meta");
  for (std::string key; meta >> key;) {
    if (key == "resolution") meta >> res;
    else if (key == "origin") meta >> origin.x >> origin.y;
    else throw InputError("unknown sidecar key '" + key + "'");
  }
  OccupancyGrid grid(w, h, res, origin);
  for (int y = h - 1; y >= 0; --y)
    for (int x = 0; x < w; ++x) {
      const int v = in.get();
      if (v == EOF) throw InputError("truncated image " + path.string());
      grid.set(CellIndex{x, y}, v < 64 ? CellState::Obstacle : (v > 191 ? CellState::Free : CellState::Unknown));
    }
  return grid;
}

}  // namespace gridex
