#include "gridex/episode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridex/rng.hpp"

namespace gridex {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

double EnvConfig::d_n() const { return neighbor_threshold.value_or(2.0 * std::sqrt(2.0) * node_resolution); }

double EnvConfig::d_utility() const { return utility_range.value_or(0.8 * sensor_range); }

int EnvConfig::cap() const { return community_cap.value_or(CommunityConfig::default_cap(local_size, node_resolution)); }

int EnvConfig::corridor() const {
  return corridor_width.value_or(static_cast<int>(std::ceil(2.0 * node_resolution / map_resolution - 1e-9)));
}

void EnvConfig::validate() const {
  if (width < 10 || height < 10) throw ConfigError("map must be at least 10x10 cells");
  if (!(map_resolution > 0.0) || !std::isfinite(map_resolution)) throw ConfigError("map resolution must be positive");
  if (!(sensor_range > 0.0)) throw ConfigError("sensor range must be positive");
  if (!(node_resolution > 0.0)) throw ConfigError("node resolution must be positive");
  const double ratio = node_resolution / map_resolution;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1.0)
    throw ConfigError("node resolution must be a whole multiple of the map resolution");
  if (!(d_n() >= node_resolution)) throw ConfigError("neighbor threshold must reach the adjacent lattice point");
  if (!(local_size >= 2.0 * d_n())) throw ConfigError("local window must contain every neighbor of the robot node");
  if (!(d_utility() > 0.0)) throw ConfigError("utility range must be positive");
  if (d_utility() + 2.0 * map_resolution > sensor_range)
    throw ConfigError("utility range must stay two cells inside the sensor range");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (cap() < 1) throw ConfigError("community cap must be >= 1");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (max_steps < 1) throw ConfigError("max steps must be >= 1");
  dungeon().validate();
}

DungeonParams EnvConfig::dungeon() const {
  DungeonParams p;
  p.width = width;
  p.height = height;
  p.resolution = map_resolution;
  p.rooms = rooms;
  p.room_min = room_min;
  p.room_max = room_max;
  p.corridor_width = corridor();
  return p;
}

RoadmapParams EnvConfig::roadmap() const { return {node_resolution, d_n()}; }

CommunityConfig EnvConfig::community() const { return {beta, cap()}; }

ExpertConfig EnvConfig::expert_config() const { return {roadmap(), sensor_range, d_utility()}; }

std::uint64_t start_seed(std::uint64_t seed) { return derive_seed(seed, 1); }
std::uint64_t expert_seed(std::uint64_t seed, int step) { return derive_seed(seed, 1000 + static_cast<std::uint64_t>(step)); }
std::uint64_t baseline_seed(std::uint64_t seed, int step) {
  return derive_seed(seed, 1000000 + static_cast<std::uint64_t>(step));
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {}

const Observation& Environment::reset(const EnvConfig& cfg) {
  cfg_ = cfg;
  return reset();
}

const Observation& Environment::reset() {
  cfg_.validate();
  active_ = false;
  map_ = generate_dungeon(cfg_.seed, cfg_.dungeon());
  const auto& truth = map_.truth;
  reachable_ = flood_fill_free(truth, map_.start);
  reachable_count_ = static_cast<std::size_t>(std::count(reachable_.begin(), reachable_.end(), std::uint8_t{1}));

  // Start: a seeded truth-free lattice point connected to the first room.
  std::unique_ptr<RoadmapGraph> lattice;
  const RoadmapGraph* truth_graph = nullptr;
  expert_.reset();
  if (cfg_.expert) {
    expert_ = std::make_unique<PrivilegedPlanner>(truth, cfg_.expert_config());
    truth_graph = &expert_->graph();
  } else {
    lattice = std::make_unique<RoadmapGraph>(truth, cfg_.roadmap());
    extend_dense_graph(*lattice, truth);
    truth_graph = lattice.get();
  }
  if (truth_graph->empty()) throw ConfigError("map has no free lattice point to start from");
  const int anchor = gridex::robot_node(*truth_graph, truth.center_of(map_.start));
  const auto mask = connected_mask(*truth_graph, anchor);
  std::vector<int> candidates;
  for (const auto& n : truth_graph->nodes())
    if (mask[static_cast<std::size_t>(n.id)] && reachable_[static_cast<std::size_t>(truth.index(n.cell))])
      candidates.push_back(n.id);
  if (candidates.empty()) throw ConfigError("no valid start cell");
  Rng rng(start_seed(cfg_.seed));
  pose_ = truth_graph->node(candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))]).pos;

  belief_ = OccupancyGrid(truth.width(), truth.height(), truth.resolution(), truth.origin(), CellState::Unknown);
  raycast_scan(truth, belief_, pose_, cfg_.sensor());
  graph_ = std::make_unique<RoadmapGraph>(belief_, cfg_.roadmap());
  partition_ = Partition{};
  observed_.clear();
  metrics_ = Metrics{};
  plan_ = ExpertPlan{};
  steps_ = 0;
  done_ = finished_ = false;

  update_pipeline(std::nullopt);
  if (expert_) {
    const auto t0 = std::chrono::steady_clock::now();
    expert_->observe(belief_);
    if (!coverage_complete_) plan_ = expert_->plan(pose_, cfg_.restarts, expert_seed(cfg_.seed, 0));
    metrics_.expert_ms.push_back(elapsed_ms(t0));
  }
  metrics_.initial_expert_cost = plan_.cost;
  metrics_.explored = explored_fraction();
  metrics_.curve.emplace_back(0.0, metrics_.explored);
  done_ = coverage_complete_;
  active_ = true;
  return obs_;
}

double Environment::explored_fraction() const {
  if (reachable_count_ == 0) return 1.0;
  std::size_t known = 0;
  for (std::size_t i = 0; i < reachable_.size(); ++i)
    if (reachable_[i] && belief_.at(static_cast<int>(i)) == CellState::Free) ++known;
  return static_cast<double>(known) / static_cast<double>(reachable_count_);
}

double Environment::unexplored_free_fraction() const {
  if (reachable_count_ == 0) return 0.0;
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < reachable_.size(); ++i)
    if (reachable_[i] && belief_.at(static_cast<int>(i)) == CellState::Unknown) ++unknown;
  return static_cast<double>(unknown) / static_cast<double>(reachable_count_);
}

void Environment::update_pipeline(std::optional<Pose2> scan) {
  const auto t0 = std::chrono::steady_clock::now();
  frontiers_ = detect_frontiers(belief_);
  const auto mask = frontier_mask(belief_, frontiers_);

  const int old_size = graph_->size();
  extend_dense_graph(*graph_, belief_);
  v_cur_ = graph_->node_at_cell(belief_.cell_of(pose_));
  if (v_cur_ < 0) throw IntegrityError("robot is not on a roadmap node");
  component_ = connected_mask(*graph_, v_cur_);

  // A scan only edits cells within sensor range, so only nodes close enough
  // to see those cells (or their neighbors) can change their lists.
  const double radius = cfg_.sensor_range + cfg_.d_utility() + 3.0 * belief_.resolution();
  observed_.resize(static_cast<std::size_t>(graph_->size()));
  for (const auto& n : graph_->nodes())
    if (!scan || n.id >= old_size || distance(n.pos, *scan) <= radius)
      observed_[static_cast<std::size_t>(n.id)] = observable_frontiers(belief_, mask, n.pos, cfg_.d_utility());
  utilities_.assign(static_cast<std::size_t>(graph_->size()), 0);
  coverage_complete_ = true;
  for (const auto& n : graph_->nodes()) {
    if (!component_[static_cast<std::size_t>(n.id)]) continue;
    utilities_[static_cast<std::size_t>(n.id)] = static_cast<int>(observed_[static_cast<std::size_t>(n.id)].size());
    if (utilities_[static_cast<std::size_t>(n.id)] > 0) coverage_complete_ = false;
  }

  view_ = extract_local_view(*graph_, v_cur_, cfg_.local_size);
  const auto cc = cfg_.community();
  const auto fresh = assign_new_nodes(*graph_, view_, partition_, cc);
  refine_ = refine_partition(*graph_, view_, partition_, cc, fresh);
  for (const auto& n : graph_->nodes())
    if (!partition_.assigned(n.id)) throw IntegrityError("roadmap node added outside the local window");

  global_ = rebuild_global_graph(*graph_, partition_, v_cur_);
  unexplored_ = classify_global_nodes(global_, partition_, utilities_);
  global_ref_ = plan_global_reference(global_, unexplored_);
  local_refs_ = plan_local_references(*graph_, view_, v_cur_, utilities_);
  guideposts_ = mark_guideposts(view_, local_refs_, global_ref_);
  unknown_ = belief_.count(CellState::Unknown);
  build_observation();
  metrics_.pipeline_ms.push_back(elapsed_ms(t0));
}

void Environment::build_observation() {
  obs_ = Observation{};
  const double half = cfg_.local_size / 2.0;
  int max_u = 1;
  for (int id : view_.nodes) max_u = std::max(max_u, utilities_[static_cast<std::size_t>(id)]);
  obs_.node_ids = view_.nodes;
  obs_.nodes.reserve(view_.nodes.size());
  for (std::size_t row = 0; row < view_.nodes.size(); ++row) {
    const int id = view_.nodes[row];
    const Pose2 p = graph_->node(id).pos;
    obs_.nodes.push_back({(p.x - pose_.x) / half, (p.y - pose_.y) / half,
                          static_cast<double>(utilities_[static_cast<std::size_t>(id)]) / max_u,
                          static_cast<double>(guideposts_.local[row]), static_cast<double>(guideposts_.global[row])});
  }
  for (auto [a, b] : view_.edges)
    obs_.edges.emplace_back(view_.local_index[static_cast<std::size_t>(a)], view_.local_index[static_cast<std::size_t>(b)]);
  obs_.current = view_.local_index[static_cast<std::size_t>(v_cur_)];
  const auto& cur = graph_->node(v_cur_);
  for (const auto& off : graph_->stencil()) {
    const int id = graph_->node_at_lattice(cur.li + off.di, cur.lj + off.dj);
    if (id < 0 || !graph_->has_edge(v_cur_, id) || !view_.contains(id)) continue;
    obs_.neighbors.push_back(view_.local_index[static_cast<std::size_t>(id)]);
    obs_.neighbor_ids.push_back(id);
  }
}

Transition Environment::step(int action) {
  if (!active_) throw StateError("step() before reset()");
  if (finished_) throw StateError("episode is done");
  if (action < 0 || action >= static_cast<int>(obs_.neighbor_ids.size()))
    throw ProtocolError("action " + std::to_string(action) + " outside [0, " + std::to_string(obs_.neighbor_ids.size()) + ")");

  Transition tr;
  tr.action = action;
  auto& info = tr.info;
  info.step = steps_;
  const Pose2 w = graph_->node(obs_.neighbor_ids[static_cast<std::size_t>(action)]).pos;

  // Expert waypoint from the pre-move state; no plan means the objective is met.
  if (expert_ && !plan_.empty() && !coverage_complete_) {
    const auto& pg = expert_->graph();
    const int here = pg.node_at_cell(belief_.cell_of(pose_));
    const Pose2 ws = pg.node(expert_waypoint(plan_, here)).pos;
    info.expert_waypoint = ws;
    info.d = distance(w, ws);
    tr.reward = expert_reward(w, ws, cfg_.d_n());
  }
  info.c_prev = plan_.cost;

  info.c_move = distance(pose_, w);
  pose_ = w;
  metrics_.distance += info.c_move;
  ++steps_;
  raycast_scan(map_.truth, belief_, pose_, cfg_.sensor());
  update_pipeline(pose_);
  done_ = coverage_complete_ || steps_ >= cfg_.max_steps;

  if (expert_) {
    const auto t0 = std::chrono::steady_clock::now();
    expert_->observe(belief_, pose_);
    plan_ = coverage_complete_ ? ExpertPlan{} : expert_->plan(pose_, cfg_.restarts, expert_seed(cfg_.seed, steps_));
    metrics_.expert_ms.push_back(elapsed_ms(t0));
  }
  info.c_next = plan_.cost;
  info.f = coverage_gap(info.c_move, info.c_next, info.c_prev);

  info.node = v_cur_;
  info.position = pose_;
  info.distance = metrics_.distance;
  info.explored = explored_fraction();
  info.splits = static_cast<int>(refine_.splits.size());
  tr.done = done_;

  metrics_.steps = steps_;
  metrics_.explored = info.explored;
  metrics_.sum_reward += tr.reward;
  metrics_.sum_f += info.f;
  metrics_.splits += info.splits;
  metrics_.curve.emplace_back(metrics_.distance, info.explored);
  if (done_) {
    finished_ = true;
    metrics_.termination = coverage_complete_ ? "complete" : "max_steps";
    metrics_.final_expert_cost = info.c_next;
    metrics_.unexplored_free = unexplored_free_fraction();
    info.termination = metrics_.termination;
  }
  return tr;
}

}  // namespace gridex
