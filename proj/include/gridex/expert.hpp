#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridex/coverage.hpp"
#include "gridex/grid.hpp"
#include "gridex/nav_graph.hpp"

namespace gridex {

using ExpertPlan = CoveragePlan;

struct ExpertConfig {
  RoadmapParams roadmap;
  double sensor_range = 20.0;
  double d_utility = 16.0;
};

/// Truth-Free cell next to a wall cell (truth Obstacle) that the belief has not seen yet.
bool is_privileged_frontier(const OccupancyGrid& truth, const OccupancyGrid& belief, CellIndex c);

struct PrivilegedFrontierSet {
  std::vector<int> cells;   // observable from some privileged node reachable from the robot
  std::vector<int> pruned;  // privileged frontiers no reachable node can observe
};

/// Ground-truth coverage planner. Owns the privileged roadmap built on the
/// truth free space, the cells each privileged node's sensor would reveal,
/// and a per-node list of the privileged frontiers it observes.
class PrivilegedPlanner {
 public:
  PrivilegedPlanner(OccupancyGrid truth, const ExpertConfig& cfg);
  PrivilegedPlanner(const PrivilegedPlanner&) = delete;
  PrivilegedPlanner& operator=(const PrivilegedPlanner&) = delete;

  const RoadmapGraph& graph() const { return graph_; }
  const OccupancyGrid& truth() const { return truth_; }
  const ExpertConfig& config() const { return cfg_; }

  /// Cell `c` lies on a truth-free ray from `node` within utility reach + 2 cells.
  bool reveals(int node, CellIndex c) const;

  /// Refresh observation lists. With `scan`, only nodes whose lists can have
  /// changed since the previous call (belief edits within sensor range of
  /// `scan`) are recomputed.
  void observe(const OccupancyGrid& belief, std::optional<Pose2> scan = std::nullopt);

  /// Frontiers as of the last observe() call, pruned against the component of `start_node`.
  PrivilegedFrontierSet frontiers(int start_node) const;
  const std::vector<int>& observed(int node) const { return observed_[static_cast<std::size_t>(node)]; }

  /// Sample-and-route coverage over the current observation lists; empty plan
  /// when nothing is left to cover. The previous plan's viewpoints seed one extra draw.
  ExpertPlan plan(Pose2 p_t, int restarts, std::uint64_t seed);

 private:
  void refresh_node(int node, const OccupancyGrid& belief);

  OccupancyGrid truth_;
  ExpertConfig cfg_;
  RoadmapGraph graph_;
  int reveal_radius_ = 0;
  int reveal_side_ = 0;
  std::vector<std::vector<std::uint8_t>> reveal_;  // per node, reveal_side_^2 bytes
  std::vector<int> component_;
  std::vector<std::uint8_t> frontier_mask_;
  std::vector<std::vector<int>> observed_;
  bool primed_ = false;
  std::vector<int> last_viewpoints_;
  DistanceCache distances_;
};

PrivilegedFrontierSet privileged_frontiers(PrivilegedPlanner& planner, const OccupancyGrid& belief, int robot_node);

/// Requires a non-empty privileged frontier set.
ExpertPlan plan_expert_path(PrivilegedPlanner& planner, const OccupancyGrid& belief, Pose2 p_t, int restarts,
                            std::uint64_t seed);

/// First node after the start of the (already edge-expanded) plan; the start
/// itself when the plan is a single node.
int expert_waypoint(const ExpertPlan& plan, int robot_node);

/// r = -(exp(d / 2 d_n) - 1) / (e - 1) with d = |w* - w|; in [-1, 0].
double expert_reward(Pose2 waypoint, Pose2 expert_waypoint, double d_n);
double expert_reward_from_distance(double d, double d_n);

/// f = C_move + C_next - C_prev.
inline double coverage_gap(double c_move, double c_next, double c_prev) { return c_move + c_next - c_prev; }

}  // namespace gridex
