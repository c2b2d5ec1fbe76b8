#include "gridex/expert.hpp"

#include <algorithm>
#include <cmath>

namespace gridex {

bool is_privileged_frontier(const OccupancyGrid& truth, const OccupancyGrid& belief, CellIndex c) {
  if (truth.at(c) != CellState::Free) return false;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const CellIndex n{c.x + dx, c.y + dy};
      if (belief.in_bounds(n) && belief.at(n) == CellState::Unknown && truth.at(n) == CellState::Obstacle) return true;
    }
  return false;
}

PrivilegedPlanner::PrivilegedPlanner(OccupancyGrid truth, const ExpertConfig& cfg)
    : truth_(std::move(truth)), cfg_(cfg), graph_(truth_, cfg.roadmap), distances_(graph_) {
  extend_dense_graph(graph_, truth_);
  const double res = truth_.resolution();
  reveal_radius_ = static_cast<int>(std::floor(cfg_.d_utility / res)) + 2;
  reveal_side_ = 2 * reveal_radius_ + 1;
  const double sensor_cells = cfg_.sensor_range / res;
  const double limit = sensor_cells * sensor_cells;

  reveal_.resize(static_cast<std::size_t>(graph_.size()));
  for (const auto& node : graph_.nodes()) {
    auto& bits = reveal_[static_cast<std::size_t>(node.id)];
    bits.assign(static_cast<std::size_t>(reveal_side_ * reveal_side_), 0);
    for (int dy = -reveal_radius_; dy <= reveal_radius_; ++dy)
      for (int dx = -reveal_radius_; dx <= reveal_radius_; ++dx) {
        if (static_cast<double>(dx * dx + dy * dy) > limit) continue;
        const CellIndex target{node.cell.x + dx, node.cell.y + dy};
        if (!truth_.in_bounds(target)) continue;
        const bool reached = trace_ray(node.cell, target, [&](CellIndex c) {
          return c == target || truth_.at(c) == CellState::Free;
        });
        if (reached)
          bits[static_cast<std::size_t>((dy + reveal_radius_) * reveal_side_ + dx + reveal_radius_)] = 1;
      }
  }

  component_.assign(static_cast<std::size_t>(graph_.size()), -1);
  int next = 0;
  for (const auto& node : graph_.nodes()) {
    if (component_[static_cast<std::size_t>(node.id)] >= 0) continue;
    const auto mask = connected_mask(graph_, node.id);
    for (std::size_t v = 0; v < mask.size(); ++v)
      if (mask[v]) component_[v] = next;
    ++next;
  }
  observed_.resize(static_cast<std::size_t>(graph_.size()));
}

bool PrivilegedPlanner::reveals(int node, CellIndex c) const {
  const auto& n = graph_.node(node);
  const int dx = c.x - n.cell.x, dy = c.y - n.cell.y;
  if (std::abs(dx) > reveal_radius_ || std::abs(dy) > reveal_radius_) return false;
  return reveal_[static_cast<std::size_t>(node)][static_cast<std::size_t>((dy + reveal_radius_) * reveal_side_ + dx + reveal_radius_)] != 0;
}

void PrivilegedPlanner::refresh_node(int node, const OccupancyGrid& belief) {
  auto& out = observed_[static_cast<std::size_t>(node)];
  out.clear();
  const auto& n = graph_.node(node);
  const double reach = cfg_.d_utility / truth_.resolution();
  const int r = static_cast<int>(std::floor(reach));
  const double r2 = reach * reach;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (static_cast<double>(dx * dx + dy * dy) > r2) continue;
      const CellIndex f{n.cell.x + dx, n.cell.y + dy};
      if (!truth_.in_bounds(f)) continue;
      const int fi = truth_.index(f);
      if (!frontier_mask_[static_cast<std::size_t>(fi)] || !reveals(node, f)) continue;
      // a scan here must settle the whole block, otherwise f stays a frontier
      bool settles = true;
      for (int by = -1; by <= 1 && settles; ++by)
        for (int bx = -1; bx <= 1 && settles; ++bx) {
          const CellIndex c{f.x + bx, f.y + by};
          if (belief.in_bounds(c) && belief.at(c) == CellState::Unknown && truth_.at(c) == CellState::Obstacle)
            settles = reveals(node, c);
        }
      if (settles) out.push_back(fi);
    }
}

void PrivilegedPlanner::observe(const OccupancyGrid& belief, std::optional<Pose2> scan) {
  if (belief.width() != truth_.width() || belief.height() != truth_.height())
    throw PreconditionError("belief dimensions differ from the truth map");
  frontier_mask_.assign(truth_.size(), 0);
  for (int y = 0; y < truth_.height(); ++y)
    for (int x = 0; x < truth_.width(); ++x)
      if (is_privileged_frontier(truth_, belief, {x, y})) frontier_mask_[static_cast<std::size_t>(truth_.index({x, y}))] = 1;

  const bool full = !scan || !primed_;
  const double radius = cfg_.sensor_range + cfg_.d_utility + 3.0 * truth_.resolution();
  for (const auto& node : graph_.nodes())
    if (full || distance(node.pos, *scan) <= radius) refresh_node(node.id, belief);
  primed_ = true;
}

PrivilegedFrontierSet PrivilegedPlanner::frontiers(int start_node) const {
  PrivilegedFrontierSet out;
  const int comp = component_[static_cast<std::size_t>(start_node)];
  std::vector<std::uint8_t> seen(truth_.size(), 0);
  for (const auto& node : graph_.nodes())
    if (component_[static_cast<std::size_t>(node.id)] == comp)
      for (int f : observed_[static_cast<std::size_t>(node.id)]) seen[static_cast<std::size_t>(f)] = 1;
  for (std::size_t c = 0; c < frontier_mask_.size(); ++c) {
    if (!frontier_mask_[c]) continue;
    (seen[c] ? out.cells : out.pruned).push_back(static_cast<int>(c));
  }
  return out;
}

ExpertPlan PrivilegedPlanner::plan(Pose2 p_t, int restarts, std::uint64_t seed) {
  if (!primed_) throw StateError("plan() before observe()");
  const int start = robot_node(graph_, p_t);
  const int comp = component_[static_cast<std::size_t>(start)];
  CoverageProblem problem;
  problem.graph = &graph_;
  problem.start = start;
  problem.observed.resize(static_cast<std::size_t>(graph_.size()));
  problem.candidates.assign(static_cast<std::size_t>(graph_.size()), 0);
  std::vector<int> compact(truth_.size(), -1);
  for (const auto& node : graph_.nodes()) {
    if (component_[static_cast<std::size_t>(node.id)] != comp) continue;
    problem.candidates[static_cast<std::size_t>(node.id)] = 1;
    auto& list = problem.observed[static_cast<std::size_t>(node.id)];
    for (int f : observed_[static_cast<std::size_t>(node.id)]) {
      auto& id = compact[static_cast<std::size_t>(f)];
      if (id < 0) id = problem.frontier_count++;
      list.push_back(id);
    }
  }
  problem.incumbent = last_viewpoints_;
  Rng rng(seed);
  auto result = plan_coverage(problem, restarts, rng, distances_);
  last_viewpoints_ = result.viewpoints;
  return result;
}

PrivilegedFrontierSet privileged_frontiers(PrivilegedPlanner& planner, const OccupancyGrid& belief, int robot_node) {
  planner.observe(belief);
  return planner.frontiers(robot_node);
}

ExpertPlan plan_expert_path(PrivilegedPlanner& planner, const OccupancyGrid& belief, Pose2 p_t, int restarts,
                            std::uint64_t seed) {
  planner.observe(belief);
  const int start = robot_node(planner.graph(), p_t);
  if (planner.frontiers(start).cells.empty()) throw PreconditionError("no privileged frontiers to cover");
  return planner.plan(p_t, restarts, seed);
}

int expert_waypoint(const ExpertPlan& plan, int robot_node) {
  if (plan.path.empty()) throw StateError("expert plan is empty");
  if (plan.path.front() != robot_node) throw PreconditionError("expert plan does not start at the robot node");
  return plan.path.size() >= 2 ? plan.path[1] : plan.path.front();
}

double expert_reward_from_distance(double d, double d_n) {
  if (!(d_n > 0.0)) throw PreconditionError("d_n must be positive");
  if (d < 0.0 || d > 2.0 * d_n * (1.0 + 1e-12)) throw PreconditionError("waypoints are farther apart than 2*d_n");
  const double e = std::exp(1.0);
  const double r = -(std::exp(std::min(d, 2.0 * d_n) / (2.0 * d_n)) - 1.0) / (e - 1.0);
  return std::clamp(r, -1.0, 0.0);
}

double expert_reward(Pose2 waypoint, Pose2 expert_wp, double d_n) {
  return expert_reward_from_distance(distance(waypoint, expert_wp), d_n);
}

}  // namespace gridex
