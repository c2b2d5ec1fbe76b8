#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridex/community.hpp"
#include "gridex/expert.hpp"
#include "gridex/grid.hpp"
#include "gridex/mapgen.hpp"
#include "gridex/nav_graph.hpp"
#include "gridex/routing.hpp"

namespace gridex {

/// Environment configuration. Optional fields fall back to values derived
/// from the others (d_n = 2*sqrt(2)*node_resolution, d_utility = 0.8*d_sensor,
/// cap = round((d_local/node_resolution)^2 / 10)).
struct EnvConfig {
  int width = 250;
  int height = 250;
  double map_resolution = 0.4;
  double sensor_range = 20.0;
  double node_resolution = 4.0;
  std::optional<double> neighbor_threshold;
  double local_size = 40.0;
  std::optional<double> utility_range;
  std::optional<int> community_cap;
  double beta = 1.0;
  int restarts = 10;
  int max_steps = 200;
  std::uint64_t seed = 0;
  int rooms = 8;
  int room_min = 24;
  int room_max = 60;
  std::optional<int> corridor_width;
  bool expert = true;

  double d_n() const;
  double d_utility() const;
  int cap() const;
  /// Defaults to two node spacings so that corridors always carry lattice points.
  int corridor() const;
  void validate() const;

  DungeonParams dungeon() const;
  RoadmapParams roadmap() const;
  CommunityConfig community() const;
  ExpertConfig expert_config() const;
  SensorConfig sensor() const { return {sensor_range}; }

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Per-step seed streams.
std::uint64_t start_seed(std::uint64_t seed);
std::uint64_t expert_seed(std::uint64_t seed, int step);
std::uint64_t baseline_seed(std::uint64_t seed, int step);

/// Policy input: the local window as an informative graph.
struct Observation {
  std::vector<std::array<double, 5>> nodes;  // (x, y, u, e, b), x/y relative to the robot over d_local/2
  std::vector<std::pair<int, int>> edges;    // row pairs, first <= second, self-edges included
  int current = -1;
  std::vector<int> neighbors;                // rows, stencil order, self first
  std::vector<int> node_ids;                 // roadmap id of each row
  std::vector<int> neighbor_ids;             // roadmap id of each action
};

struct StepInfo {
  int step = 0;                       // index of the step just taken (0-based)
  int node = -1;                      // roadmap node after the move
  Pose2 position;
  std::optional<Pose2> expert_waypoint;
  double d = 0.0;                     // |w - w*|
  double c_move = 0.0;
  double c_prev = 0.0;                // C(psi*_t)
  double c_next = 0.0;                // C(psi*_{t+1})
  double f = 0.0;
  double distance = 0.0;              // travel so far
  double explored = 0.0;              // fraction of reachable free cells known free
  int splits = 0;
  std::string termination;            // empty while running
};

struct Transition {
  int action = -1;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct Metrics {
  double distance = 0.0;
  int steps = 0;
  std::string termination;           // "complete" or "max_steps"
  double explored = 0.0;
  double unexplored_free = 0.0;      // reachable free cells still unknown, as a fraction
  double sum_reward = 0.0;
  double sum_f = 0.0;
  double initial_expert_cost = 0.0;  // C(psi*_1)
  double final_expert_cost = 0.0;    // C(psi*_{n+1})
  int splits = 0;
  std::vector<std::pair<double, double>> curve;  // (distance, explored) after reset and every step
  std::vector<double> pipeline_ms;   // wall time, not logged
  std::vector<double> expert_ms;     // wall time, not logged
};

/// One exploration episode: truth map, belief, roadmap, partition, global
/// graph, references, observation, privileged expert and reward bookkeeping.
class Environment {
 public:
  explicit Environment(EnvConfig cfg = {});
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  const Observation& reset();
  const Observation& reset(const EnvConfig& cfg);
  Transition step(int action);

  const EnvConfig& config() const { return cfg_; }
  const OccupancyGrid& truth() const { return map_.truth; }
  const DungeonMap& map() const { return map_; }
  const OccupancyGrid& belief() const { return belief_; }
  const RoadmapGraph& graph() const { return *graph_; }
  const Partition& partition() const { return partition_; }
  const GlobalGraph& global_graph() const { return global_; }
  const LocalView& view() const { return view_; }
  const LocalReferences& local_references() const { return local_refs_; }
  const GlobalReference& global_reference() const { return global_ref_; }
  const std::vector<std::uint8_t>& unexplored_global() const { return unexplored_; }
  const Guideposts& guideposts() const { return guideposts_; }
  const Observation& observation() const { return obs_; }
  const RefineReport& last_refine() const { return refine_; }
  const FrontierSet& frontiers() const { return frontiers_; }
  /// Utilities restricted to the robot's roadmap component, by node id.
  const std::vector<int>& utilities() const { return utilities_; }
  /// Belief frontiers observable from a roadmap node.
  const std::vector<int>& observed(int node) const { return observed_[static_cast<std::size_t>(node)]; }
  const std::vector<std::uint8_t>& component() const { return component_; }
  PrivilegedPlanner* expert() { return expert_.get(); }
  const ExpertPlan& expert_plan() const { return plan_; }
  const Metrics& metrics() const { return metrics_; }

  int robot_node() const { return v_cur_; }
  Pose2 robot_pose() const { return pose_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  /// No belief frontier is observable from the robot's component.
  bool coverage_complete() const { return coverage_complete_; }
  std::size_t unknown_count() const { return unknown_; }
  double explored_fraction() const;
  double unexplored_free_fraction() const;

 private:
  void update_pipeline(std::optional<Pose2> scan);
  void replan_expert(int step_index);
  void build_observation();

  EnvConfig cfg_;
  DungeonMap map_;
  std::vector<std::uint8_t> reachable_;
  std::size_t reachable_count_ = 0;
  OccupancyGrid belief_;
  std::unique_ptr<RoadmapGraph> graph_;
  std::unique_ptr<PrivilegedPlanner> expert_;
  Partition partition_;
  GlobalGraph global_;
  LocalView view_;
  RefineReport refine_;
  FrontierSet frontiers_;
  std::vector<std::vector<int>> observed_;
  std::vector<int> utilities_;
  std::vector<std::uint8_t> component_;
  std::vector<std::uint8_t> unexplored_;
  GlobalReference global_ref_;
  LocalReferences local_refs_;
  Guideposts guideposts_;
  Observation obs_;
  ExpertPlan plan_;
  Metrics metrics_;
  Pose2 pose_;
  int v_cur_ = -1;
  int steps_ = 0;
  bool done_ = false;
  bool finished_ = false;
  bool coverage_complete_ = false;
  bool active_ = false;
  std::size_t unknown_ = 0;
};

}  // namespace gridex
