#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "gridex/nav_graph.hpp"
#include "gridex/rng.hpp"

namespace gridex {

/// Shortest-path trees rooted at roadmap nodes, computed on demand. Valid
/// only while the graph it was built for is unchanged.
class DistanceCache {
 public:
  DistanceCache(const RoadmapGraph& graph, std::vector<std::uint8_t> allowed = {})
      : graph_(&graph), allowed_(std::move(allowed)) {}

  const ShortestPathTree& tree(int root);
  double distance(int from, int to) { return tree(from).dist[static_cast<std::size_t>(to)]; }
  void clear() { trees_.clear(); }

 private:
  const RoadmapGraph* graph_;
  std::vector<std::uint8_t> allowed_;
  std::unordered_map<int, std::unique_ptr<ShortestPathTree>> trees_;
};

/// Frontier-coverage instance: which frontiers (compact ids) each roadmap
/// node observes. Nodes outside `candidates` are never sampled.
struct CoverageProblem {
  const RoadmapGraph* graph = nullptr;
  int start = -1;
  int frontier_count = 0;
  std::vector<std::vector<int>> observed;  // indexed by node id
  std::vector<std::uint8_t> candidates;    // indexed by node id
  std::vector<int> incumbent;              // viewpoints of the previous plan, tried first as one extra draw
};

struct CoveragePlan {
  std::vector<int> viewpoints;  // sampled viewpoints in visiting order (start excluded)
  std::vector<int> path;        // roadmap node path starting at `start`; empty when nothing to cover
  double cost = 0.0;

  bool empty() const { return path.empty(); }
};

/// Sample-then-route coverage planning. For each restart, viewpoints are drawn
/// with probability proportional to their remaining frontier count until every
/// frontier is covered; the viewpoints are ordered by an open TSP from the
/// start node. The cheapest path over `restarts` draws wins (earliest on ties).
/// A non-empty `incumbent` adds one more draw that keeps those viewpoints
/// which still see something before sampling the rest.
CoveragePlan plan_coverage(const CoverageProblem& problem, int restarts, Rng& rng, DistanceCache& distances);

}  // namespace gridex
