#include "gridex/policies.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "gridex/coverage.hpp"
#include "gridex/serialize.hpp"

namespace gridex {

namespace {

int action_for(const Observation& obs, int node) {
  for (std::size_t a = 0; a < obs.neighbor_ids.size(); ++a)
    if (obs.neighbor_ids[a] == node) return static_cast<int>(a);
  throw IntegrityError("planned hop is not an advertised neighbor");
}

int stay_action(const Environment& env) { return action_for(env.observation(), env.robot_node()); }

}  // namespace

int ExpertFollowPolicy::act(Environment& env) {
  auto* planner = env.expert();
  if (!planner) throw ConfigError("expert-follow needs the expert enabled");
  const auto& plan = env.expert_plan();
  if (plan.empty()) return stay_action(env);
  const auto& pg = planner->graph();
  const int here = pg.node_at_cell(env.belief().cell_of(env.robot_pose()));
  const Pose2 target = pg.node(expert_waypoint(plan, here)).pos;
  // The privileged hop can cross cells the robot has not seen yet; take the
  // advertised neighbor closest to it.
  const auto& obs = env.observation();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < obs.neighbor_ids.size(); ++a) {
    const double d = distance(env.graph().node(obs.neighbor_ids[a]).pos, target);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(a);
    }
  }
  return best;
}

int CoveragePolicy::act(Environment& env) {
  const auto& graph = env.graph();
  const auto& comp = env.component();
  CoverageProblem problem;
  problem.graph = &graph;
  problem.start = env.robot_node();
  problem.observed.resize(static_cast<std::size_t>(graph.size()));
  problem.candidates = comp;
  std::vector<int> compact(env.belief().size(), -1);
  for (const auto& n : graph.nodes()) {
    if (!comp[static_cast<std::size_t>(n.id)]) continue;
    auto& list = problem.observed[static_cast<std::size_t>(n.id)];
    for (int f : env.observed(n.id)) {
      auto& id = compact[static_cast<std::size_t>(f)];
      if (id < 0) id = problem.frontier_count++;
      list.push_back(id);
    }
  }
  if (problem.frontier_count == 0) return stay_action(env);
  DistanceCache distances(graph, comp);
  Rng rng(baseline_seed(env.config().seed, env.steps()));
  const auto plan = plan_coverage(problem, restarts_, rng, distances);
  if (plan.path.size() < 2) return stay_action(env);
  return action_for(env.observation(), plan.path[1]);
}

int GreedyFrontierPolicy::act(Environment& env) {
  const auto& util = env.utilities();
  const auto tree = dijkstra_tree(env.graph(), env.robot_node(), env.component());
  int target = -1;
  for (int v = 0; v < env.graph().size(); ++v) {
    if (util[static_cast<std::size_t>(v)] <= 0 || !tree.reachable(v)) continue;
    if (target < 0 || tree.dist[static_cast<std::size_t>(v)] < tree.dist[static_cast<std::size_t>(target)]) target = v;
  }
  if (target < 0 || target == env.robot_node()) return stay_action(env);
  return action_for(env.observation(), tree.path_to(target)[1]);
}

int GuidepostPolicy::act(Environment& env) {
  const auto& obs = env.observation();
  if (visits_.size() < static_cast<std::size_t>(env.graph().size())) visits_.resize(static_cast<std::size_t>(env.graph().size()), 0);
  ++visits_[static_cast<std::size_t>(env.robot_node())];
  int best = -1;
  std::tuple<int, int, int, int, int> best_key{};
  for (std::size_t a = 0; a < obs.neighbors.size(); ++a) {
    const int id = obs.neighbor_ids[a];
    if (id == env.robot_node()) continue;
    const auto& row = obs.nodes[static_cast<std::size_t>(obs.neighbors[a])];
    const int e = row[3] > 0.5 ? 0 : 1, b = row[4] > 0.5 ? 0 : 1, seen = visits_[static_cast<std::size_t>(id)];
    // visits only outrank b among local-path nodes
    const std::tuple<int, int, int, int, int> key{e, e == 0 ? seen : 0, b, seen, id};
    if (best < 0 || key < best_key) {
      best = static_cast<int>(a);
      best_key = key;
    }
  }
  return best < 0 ? stay_action(env) : best;
}

const std::vector<std::string>& builtin_policies() {
  static const std::vector<std::string> names{"expert-follow", "coverage", "greedy-frontier", "guidepost-heuristic"};
  return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const EnvConfig& cfg) {
  if (name == "expert-follow") return std::make_unique<ExpertFollowPolicy>();
  if (name == "coverage") return std::make_unique<CoveragePolicy>(cfg.restarts);
  if (name == "greedy-frontier") return std::make_unique<GreedyFrontierPolicy>();
  if (name == "guidepost-heuristic") return std::make_unique<GuidepostPolicy>();
  if (name == "remote") throw ConfigError("the remote policy is driven through `serve`");
  throw ConfigError("unknown policy '" + name + "'");
}

EpisodeResult run_policy(const std::string& name, const EnvConfig& cfg, const RunOptions& opts) {
  auto policy = make_policy(name, cfg);
  return run_policy(*policy, name, cfg, opts);
}

EpisodeResult run_policy(Policy& policy, const std::string& name, const EnvConfig& cfg, const RunOptions& opts) {
  Environment env(cfg);
  policy.begin_episode();
  const auto& first = env.reset();
  std::unique_ptr<EpisodeLogWriter> log;
  if (opts.log_path) {
    log = std::make_unique<EpisodeLogWriter>(*opts.log_path);
    log->header(name, cfg, first);
  }
  const int window = opts.livelock_window > 0
                         ? opts.livelock_window
                         : static_cast<int>(std::lround(3.0 * cfg.local_size / cfg.node_resolution));
  EpisodeResult result;
  result.policy = name;
  std::size_t best_unknown = env.unknown_count();
  int stalled = 0;
  bool finished = false;
  while (!finished) {
    const auto tr = env.step(policy.act(env));
    result.transitions.push_back(tr);
    if (log) log->transition(tr, env.observation());
    finished = tr.done;
    if (env.unknown_count() < best_unknown) {
      best_unknown = env.unknown_count();
      stalled = 0;
    } else if (++stalled >= window && !finished) {
      if (log) log->close();
      throw LivelockError("policy '" + name + "' resolved no unknown cell in " + std::to_string(window) +
                          " steps (seed " + std::to_string(cfg.seed) + ", step " + std::to_string(env.steps()) +
                          ", node " + std::to_string(env.robot_node()) + ")");
    }
  }
  result.metrics = env.metrics();
  if (log) {
    log->footer(result.metrics);
    log->close();
  }
  return result;
}

}  // namespace gridex
