#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gridex/nav_graph.hpp"

namespace gridex {

/// Unweighted simple graph (no self-loops) in a compact index space.
struct SimpleGraph {
  std::vector<std::vector<int>> adj;

  int size() const { return static_cast<int>(adj.size()); }
  std::size_t edge_count() const;
  void add_edge(int a, int b);
};

/// Local view as a simple graph indexed by view rows; self-edges dropped.
SimpleGraph local_simple_graph(const RoadmapGraph& graph, const LocalView& view);

/// Q = 1/(2m) sum_ij [A_ij - beta k_i k_j / 2m] delta(c_i, c_j), evaluated per
/// community as sum_c [e_c/m - beta (sum_c k)^2 / 4m^2].
/// Throws UndefinedScoreError on an edgeless graph.
double modularity(const SimpleGraph& graph, std::span<const int> labels, double beta);

struct CommunityConfig {
  double beta = 1.0;
  int cap = 10;

  void validate() const;
  /// round((d_local / node_resolution)^2 / 10)
  static int default_cap(double d_local, double node_resolution);
};

/// node -> community assignment over the roadmap. Community ids are globally
/// unique and allocated monotonically; retired ids stay empty.
class Partition {
 public:
  int community_of(int node) const {
    return node < static_cast<int>(of_.size()) ? of_[static_cast<std::size_t>(node)] : -1;
  }
  bool assigned(int node) const { return community_of(node) >= 0; }
  const std::vector<int>& members(int community) const { return members_[static_cast<std::size_t>(community)]; }
  int size_of(int community) const { return static_cast<int>(members(community).size()); }
  /// Ids of non-empty communities, ascending.
  std::vector<int> community_ids() const;
  int id_bound() const { return static_cast<int>(members_.size()); }
  const std::vector<int>& assignment() const { return of_; }

  int create();
  void assign(int node, int community);  // node must be unassigned or is moved
  void resize(int node_count);

 private:
  std::vector<int> of_;
  std::vector<std::vector<int>> members_;  // ascending ids
};

/// Greedy local moving for nodes of the view that have no community yet.
/// Each starts as a fresh singleton and repeatedly moves to the neighboring
/// community with the largest positive modularity gain that stays under the
/// cap. Returns the newly assigned node ids (ascending).
std::vector<int> assign_new_nodes(const RoadmapGraph& graph, const LocalView& view, Partition& partition,
                                  const CommunityConfig& cfg);

struct CommunitySplit {
  int community = -1;
  std::vector<int> fragments;  // new community ids created by the split
};

struct RefineReport {
  std::vector<CommunitySplit> splits;
  int merges = 0;
};

/// Splits communities touched by `fresh` nodes into connected components and
/// merges the resulting fragments into a neighbor when that raises Q within the cap.
RefineReport refine_partition(const RoadmapGraph& graph, const LocalView& view, Partition& partition,
                              const CommunityConfig& cfg, std::span<const int> fresh);

/// Connectivity of `members` through roadmap edges among them.
bool members_connected(const RoadmapGraph& graph, std::span<const int> members);

struct GlobalNode {
  int community = -1;
  int anchor = -1;  // member nearest the community centroid
  int site = -1;    // anchor, or the robot node for the current global node
  Pose2 pos;
  bool explored = true;
};

struct GlobalEdge {
  int a = -1, b = -1;  // global node indices, a < b
  std::vector<int> path;  // roadmap nodes from site(a) to site(b)
  double cost = 0.0;
};

struct GlobalGraph {
  std::vector<GlobalNode> nodes;  // ordered by community id
  std::vector<GlobalEdge> edges;
  std::vector<std::vector<int>> incident;  // node -> edge indices
  int current = -1;

  int node_of_community(int community) const;
};

GlobalGraph rebuild_global_graph(const RoadmapGraph& graph, const Partition& partition, int robot_node);

/// 1 = unexplored (some member has positive utility). Also updates the
/// `explored` field of each global node.
std::vector<std::uint8_t> classify_global_nodes(GlobalGraph& global, const Partition& partition,
                                                std::span<const int> utilities);

void write_partition_dump(const Partition& partition, std::ostream& out);
void write_global_graph_dump(const GlobalGraph& global, std::ostream& out);

}  // namespace gridex
