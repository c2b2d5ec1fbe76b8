#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridex/community.hpp"
#include "gridex/grid.hpp"
#include "gridex/nav_graph.hpp"

namespace gridex {

/// u_i for each entry of `nodes`: frontier cells observable within d_utility
/// (see observable_frontiers).
std::vector<int> compute_utilities(const OccupancyGrid& belief, const FrontierSet& frontiers,
                                   std::span<const Pose2> nodes, double d_utility);

/// Global reference path P_g: open tour over the current global node and
/// every unexplored global node, expanded to roadmap nodes.
struct GlobalReference {
  std::vector<int> order;     // global node indices; order[0] is the current global node
  std::vector<int> path;      // concatenated roadmap node path
  std::vector<int> leg_ends;  // leg_ends[k]: index in `path` where order[k+1] is reached
  double cost = 0.0;

  bool empty() const { return order.empty(); }
};

GlobalReference plan_global_reference(const GlobalGraph& global, std::span<const std::uint8_t> unexplored);

/// Local reference paths P_l: one shortest path in the view from v_cur to
/// every utility node of the view.
struct LocalReferences {
  std::vector<int> targets;
  std::vector<std::vector<int>> paths;
  std::vector<int> unreachable;
};

LocalReferences plan_local_references(const RoadmapGraph& graph, const LocalView& view, int v_cur,
                                      std::span<const int> utilities);

/// Guidepost flags per view row: e (on some local reference path) and b (on
/// the in-window prefix of the path to the next global node).
struct Guideposts {
  std::vector<std::uint8_t> local;
  std::vector<std::uint8_t> global;
};

Guideposts mark_guideposts(const LocalView& view, const LocalReferences& local, const GlobalReference& global);

}  // namespace gridex
