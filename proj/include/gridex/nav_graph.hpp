#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gridex/grid.hpp"

namespace gridex {

struct RoadmapParams {
  double node_resolution = 4.0;                            // meters between lattice points
  double neighbor_threshold = 2.0 * std::sqrt(2.0) * 4.0;  // d_n, meters
};

struct RoadmapNode {
  int id = 0;
  CellIndex cell;
  Pose2 pos;
  int li = 0, lj = 0;  // lattice coordinates
};

/// Lattice offset of a neighbor slot, in node-spacing units.
struct LatticeOffset {
  int di = 0, dj = 0;
};

/// Append-only roadmap over belief free space. Nodes sit at cell centers of
/// a lattice anchored at the grid origin; ids follow insertion order.
class RoadmapGraph {
 public:
  RoadmapGraph(const OccupancyGrid& shape, RoadmapParams params);

  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  const RoadmapNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<RoadmapNode>& nodes() const { return nodes_; }
  /// Neighbor ids sorted ascending, including the node itself.
  const std::vector<int>& neighbors(int id) const { return adj_[static_cast<std::size_t>(id)]; }
  bool has_edge(int a, int b) const;
  std::size_t edge_count() const;  // undirected, self-edges included

  double edge_length(int a, int b) const { return distance(node(a).pos, node(b).pos); }
  int node_at_lattice(int li, int lj) const;
  int node_at_cell(CellIndex c) const;

  const RoadmapParams& params() const { return params_; }
  int stride() const { return stride_; }
  /// Neighbor stencil: self first, then the remaining offsets within d_n in row-major order.
  const std::vector<LatticeOffset>& stencil() const { return stencil_; }
  std::vector<Pose2> positions() const;

 private:
  friend struct RoadmapBuilder;

  enum class Link : std::uint8_t { Untested, Edge, Pending, Blocked };

  RoadmapParams params_;
  int stride_ = 1;
  int grid_w_ = 0, grid_h_ = 0;
  int lattice_w_ = 0, lattice_h_ = 0;
  std::vector<LatticeOffset> stencil_;
  std::vector<int> reverse_slot_;
  std::vector<int> lattice_to_node_;
  std::vector<RoadmapNode> nodes_;
  std::vector<std::vector<int>> adj_;
  std::vector<Link> links_;  // nodes x stencil slots
};

struct ExtendStats {
  int nodes_added = 0;
  int edges_added = 0;
};

/// True iff every cell on the discretized segment a-b is Free (Unknown blocks).
/// Symmetric in a and b.
bool line_of_sight(const OccupancyGrid& belief, Pose2 a, Pose2 b);
bool line_of_sight(const OccupancyGrid& belief, CellIndex a, CellIndex b);

/// Adds every free lattice point not yet in the graph and every newly
/// line-of-sight-clear pair within d_n (plus self-edges). Never removes anything.
ExtendStats extend_dense_graph(RoadmapGraph& graph, const OccupancyGrid& belief);

/// Node nearest to p; ties by smallest id.
int robot_node(const RoadmapGraph& graph, Pose2 p);

struct LocalView {
  int center = -1;
  double side = 0.0;
  std::vector<int> nodes;                   // ascending ids
  std::vector<std::pair<int, int>> edges;   // node ids, first <= second, self-edges included
  std::vector<std::uint8_t> member;         // indexed by node id
  std::vector<int> local_index;             // node id -> row in `nodes`, -1 outside

  bool contains(int id) const { return id >= 0 && id < static_cast<int>(member.size()) && member[static_cast<std::size_t>(id)]; }
};

/// Nodes inside the closed axis-aligned side x side window centered on v_cur.
LocalView extract_local_view(const RoadmapGraph& graph, int v_cur, double side);

struct GraphPath {
  std::vector<int> nodes;
  double cost = 0.0;
};

/// Optional node filter: empty span means every node is allowed.
using NodeFilter = std::span<const std::uint8_t>;

/// A* with the straight-line heuristic. nullopt when dst is unreachable.
std::optional<GraphPath> astar_path(const RoadmapGraph& graph, int src, int dst, NodeFilter allowed = {});

struct ShortestPathTree {
  int source = -1;
  std::vector<double> dist;  // +inf when unreachable
  std::vector<int> parent;   // -1 for the source and unreachable nodes

  bool reachable(int id) const { return std::isfinite(dist[static_cast<std::size_t>(id)]); }
  /// Node sequence source..target; empty when unreachable.
  std::vector<int> path_to(int target) const;
};

ShortestPathTree dijkstra_tree(const RoadmapGraph& graph, int src, NodeFilter allowed = {});

/// Node ids reachable from src, as a byte mask.
std::vector<std::uint8_t> connected_mask(const RoadmapGraph& graph, int src);

/// Text edge list: "id x y" per node, then "id id" per undirected edge.
void write_graph_dump(const RoadmapGraph& graph, std::ostream& out);

}  // namespace gridex
