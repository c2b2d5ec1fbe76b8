#include <cmath>
#include <set>

#include "gridex/expert.hpp"
#include "support.hpp"

using namespace gridex;
using namespace gridex::test;

namespace {

// Truth: one free row y=4 from x=1 to x=38 in a 40x9 obstacle block.
OccupancyGrid corridor_truth() {
  OccupancyGrid t(40, 9, 0.5, {}, CellState::Obstacle);
  for (int x = 1; x <= 38; ++x) t.set(CellIndex{x, 4}, CellState::Free);
  return t;
}

ExpertConfig corridor_config() {
  ExpertConfig cfg;
  cfg.roadmap = RoadmapParams{2.0, 2.0};
  cfg.d_utility = 1.0;
  cfg.sensor_range = 2.0;
  return cfg;
}

OccupancyGrid scattered_truth(std::uint64_t seed, int size) {
  Rng rng(seed);
  auto t = open_room(size, size, 0.5);
  for (int k = 0; k < 12; ++k) {
    const int x0 = static_cast<int>(rng.uniform_int(2, size - 8)), y0 = static_cast<int>(rng.uniform_int(2, size - 8));
    const int w = static_cast<int>(rng.uniform_int(1, 6)), h = static_cast<int>(rng.uniform_int(1, 6));
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) t.set(CellIndex{x, y}, CellState::Obstacle);
  }
  return t;
}

ExpertConfig small_config() {
  ExpertConfig cfg;
  cfg.roadmap = RoadmapParams{2.0, 2.0 * 2.0 * std::sqrt(2.0)};
  cfg.sensor_range = 8.0;
  cfg.d_utility = 6.4;
  return cfg;
}

}  // namespace

TEST_SUITE("expert") {

TEST_CASE("reward endpoints, midpoint and failure") {
  for (double dn : {0.5, 2.0 * std::sqrt(2.0) * 4.0, 17.0}) {
    CHECK(expert_reward_from_distance(0.0, dn) == 0.0);
    CHECK(expert_reward_from_distance(2.0 * dn, dn) == -1.0);
    CHECK(std::abs(expert_reward_from_distance(dn, dn) - (-0.37754066879814543)) <= 1e-9);
    CHECK_THROWS_AS(expert_reward_from_distance(2.0 * dn * 1.01, dn), PreconditionError);
    CHECK_THROWS_AS(expert_reward_from_distance(-0.1, dn), PreconditionError);
  }
  CHECK_THROWS_AS(expert_reward_from_distance(0.0, 0.0), PreconditionError);
  CHECK(expert_reward({1, 1}, {1, 1}, 4.0) == 0.0);
  CHECK(expert_reward({0, 0}, {3, 4}, 2.5) == -1.0);
}

TEST_CASE("reward is bounded and strictly decreasing") {
  Rng rng(4);
  const double dn = 11.3;
  std::vector<double> ds;
  for (int i = 0; i < 1000; ++i) ds.push_back(rng.uniform01() * 2.0 * dn);
  std::sort(ds.begin(), ds.end());
  double prev = 1.0;
  for (double d : ds) {
    const double r = expert_reward_from_distance(d, dn);
    CHECK(r >= -1.0);
    CHECK(r <= 0.0);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("coverage gap") {
  CHECK(coverage_gap(2.0, 8.0, 10.0) == 0.0);
  CHECK(coverage_gap(0.0, 12.5, 10.0) == 2.5);
}

TEST_CASE("waypoint of a plan") {
  ExpertPlan p;
  CHECK_THROWS_AS(expert_waypoint(p, 0), StateError);
  p.path = {4, 7, 9};
  CHECK(expert_waypoint(p, 4) == 7);
  CHECK_THROWS_AS(expert_waypoint(p, 7), PreconditionError);
  p.path = {4};
  CHECK(expert_waypoint(p, 4) == 4);
}

TEST_CASE("privileged frontier predicate") {
  {
    // unknown free space alone is not a privileged frontier, an unknown wall is
    const auto room = open_room(6, 6, 1.0);
    auto b = room;
    b.set(CellIndex{3, 3}, CellState::Unknown);
    CHECK_FALSE(is_privileged_frontier(room, b, {2, 2}));
    CHECK_FALSE(is_privileged_frontier(room, b, {3, 3}));
    b.set(CellIndex{5, 3}, CellState::Unknown);
    CHECK(is_privileged_frontier(room, b, {4, 2}));
    CHECK(is_privileged_frontier(room, b, {4, 4}));
    CHECK_FALSE(is_privileged_frontier(room, b, {3, 3}));
    CHECK_FALSE(is_privileged_frontier(room, b, {5, 3}));
  }
  const auto truth = corridor_truth();
  OccupancyGrid belief(40, 9, 0.5);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 20; ++x) belief.set(CellIndex{x, y}, truth.at(CellIndex{x, y}));
  // known left of x=20: every truth-free cell from x=19 on touches an unknown wall cell
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 40; ++x) {
      const bool expect = truth.at(CellIndex{x, y}) == CellState::Free && x >= 19;
      CHECK(is_privileged_frontier(truth, belief, {x, y}) == expect);
    }
  CHECK_FALSE(is_privileged_frontier(truth, truth, {10, 4}));
}

TEST_CASE("explored belief has no privileged frontiers; blank belief gives every wall-side free cell") {
  const auto truth = open_room(30, 30, 0.5);
  PrivilegedPlanner planner(truth, small_config());
  const int start = robot_node(planner.graph(), truth.center_of({15, 15}));
  const auto done = privileged_frontiers(planner, truth, start);
  CHECK(done.cells.empty());
  CHECK(done.pruned.empty());
  CHECK_THROWS_AS(plan_expert_path(planner, truth, truth.center_of({15, 15}), 3, 1), PreconditionError);

  const OccupancyGrid blank(30, 30, 0.5);
  const auto all = privileged_frontiers(planner, blank, start);
  std::set<int> got(all.cells.begin(), all.cells.end());
  got.insert(all.pruned.begin(), all.pruned.end());
  std::set<int> wall_side;
  for (int i = 0; i < static_cast<int>(truth.size()); ++i) {
    const auto c = truth.cell(i);
    if (truth.at(i) != CellState::Free) continue;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (truth.at(CellIndex{c.x + dx, c.y + dy}) == CellState::Obstacle) wall_side.insert(i);
  }
  CHECK(wall_side.size() == 4 * 28 - 4);
  CHECK(got == wall_side);
}

TEST_CASE("one pocket seen from a single node: plan is the shortest path there") {
  const auto truth = corridor_truth();
  auto belief = truth;
  belief.set(CellIndex{39, 4}, CellState::Unknown);  // the end wall
  PrivilegedPlanner planner(truth, corridor_config());
  const auto& g = planner.graph();
  const int far = g.node_at_cell({36, 4}), near = g.node_at_cell({4, 4});
  REQUIRE(far >= 0);
  REQUIRE(near >= 0);
  planner.observe(belief);
  for (const auto& n : g.nodes()) CHECK(planner.observed(n.id).empty() == (n.id != far));

  const auto plan = plan_expert_path(planner, belief, truth.center_of({4, 4}), 5, 9);
  const auto tree = dijkstra_tree(g, near);
  CHECK(plan.path == tree.path_to(far));
  CHECK(plan.cost == doctest::Approx(tree.dist[static_cast<std::size_t>(far)]));
  CHECK(plan.cost == doctest::Approx(16.0));
  CHECK(plan.viewpoints == std::vector<int>{far});
  CHECK(expert_waypoint(plan, near) == g.node_at_cell({8, 4}));

  const auto here = plan_expert_path(planner, belief, truth.center_of({36, 4}), 5, 9);
  CHECK(here.path == std::vector<int>{far});
  CHECK(here.cost == 0.0);
  CHECK(here.viewpoints.empty());
}

TEST_CASE("plan viewpoints cover every frontier; plan legs are roadmap edges") {
  const auto truth = open_room(50, 50, 0.5);
  PrivilegedPlanner planner(truth, small_config());
  OccupancyGrid belief(50, 50, 0.5);
  const Pose2 p = truth.center_of({10, 10});
  raycast_scan(truth, belief, p, {8.0});
  const auto plan = plan_expert_path(planner, belief, p, 10, 77);
  const int start = robot_node(planner.graph(), p);
  std::set<int> seen(planner.observed(start).begin(), planner.observed(start).end());
  for (int v : plan.viewpoints) seen.insert(planner.observed(v).begin(), planner.observed(v).end());
  const auto fr = planner.frontiers(start);
  CHECK_FALSE(fr.cells.empty());
  for (int f : fr.cells) CHECK(seen.count(f) == 1);
  CHECK(fr.pruned.empty());
  REQUIRE_FALSE(plan.path.empty());
  CHECK(plan.path.front() == start);
  double len = 0.0;
  for (std::size_t i = 1; i < plan.path.size(); ++i) {
    CHECK(planner.graph().has_edge(plan.path[i - 1], plan.path[i]));
    len += planner.graph().edge_length(plan.path[i - 1], plan.path[i]);
  }
  CHECK(len == doctest::Approx(plan.cost));
}

TEST_CASE("executing the plan with scans clears every unpruned frontier") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto truth = scattered_truth(seed, 50);
    const auto cfg = small_config();
    PrivilegedPlanner planner(truth, cfg);
    OccupancyGrid belief(50, 50, 0.5);
    CellIndex at{3, 3};
    if (truth.at(at) != CellState::Free) continue;
    const Pose2 p = truth.center_of(at);
    raycast_scan(truth, belief, p, {cfg.sensor_range});
    const int start = robot_node(planner.graph(), p);
    planner.observe(belief);
    if (planner.frontiers(start).cells.empty()) continue;
    const auto plan = planner.plan(p, 10, seed);
    for (int v : plan.path) raycast_scan(truth, belief, planner.graph().node(v).pos, {cfg.sensor_range});
    planner.observe(belief);
    CHECK(planner.frontiers(start).cells.empty());
  }
}

TEST_CASE("incremental observe matches a full refresh") {
  const auto truth = scattered_truth(21, 60);
  const auto cfg = small_config();
  PrivilegedPlanner inc(truth, cfg), full(truth, cfg);
  OccupancyGrid belief(60, 60, 0.5);
  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const CellIndex c{static_cast<int>(rng.uniform_int(1, 58)), static_cast<int>(rng.uniform_int(1, 58))};
    if (truth.at(c) != CellState::Free) continue;
    raycast_scan(truth, belief, truth.center_of(c), {cfg.sensor_range});
    inc.observe(belief, truth.center_of(c));
    full.observe(belief);
    for (const auto& n : inc.graph().nodes()) CHECK(inc.observed(n.id) == full.observed(n.id));
  }
}

TEST_CASE("more restarts never cost more for the same seed") {
  const auto truth = scattered_truth(3, 50);
  PrivilegedPlanner planner(truth, small_config());
  OccupancyGrid belief(50, 50, 0.5);
  const Pose2 p = truth.center_of({25, 25});
  raycast_scan(truth, belief, p, {8.0});
  planner.observe(belief);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 8; ++k) {
    const double c = planner.plan(p, k, 1234).cost;
    CHECK(c <= prev + 1e-9);
    prev = c;
  }
}

TEST_CASE("privileged roadmap contains the belief roadmap") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto truth = scattered_truth(seed + 40, 50);
    const auto cfg = small_config();
    PrivilegedPlanner planner(truth, cfg);
    OccupancyGrid belief(50, 50, 0.5);
    RoadmapGraph rg(belief, cfg.roadmap);
    Rng rng(seed);
    for (int k = 0; k < 6; ++k) {
      const CellIndex c{static_cast<int>(rng.uniform_int(1, 48)), static_cast<int>(rng.uniform_int(1, 48))};
      if (truth.at(c) != CellState::Free) continue;
      raycast_scan(truth, belief, truth.center_of(c), {cfg.sensor_range});
      extend_dense_graph(rg, belief);
    }
    const auto& pg = planner.graph();
    for (const auto& n : rg.nodes()) {
      const int m = pg.node_at_cell(n.cell);
      REQUIRE(m >= 0);
      for (int v : rg.neighbors(n.id)) CHECK(pg.has_edge(m, pg.node_at_cell(rg.node(v).cell)));
    }
  }
}

TEST_CASE("coverage planner input checks") {
  const auto room = open_room(10, 10, 1.0);
  RoadmapGraph rg(room, RoadmapParams{2.0, 3.0});
  extend_dense_graph(rg, room);
  CoverageProblem prob;
  prob.graph = &rg;
  prob.start = 0;
  prob.frontier_count = 1;
  prob.observed.resize(static_cast<std::size_t>(rg.size()));
  prob.candidates.assign(static_cast<std::size_t>(rg.size()), 1);
  DistanceCache cache(rg);
  Rng rng(1);
  CHECK_THROWS_AS(plan_coverage(prob, 1, rng, cache), IntegrityError);
  prob.observed[3] = {0};
  CHECK_THROWS_AS(plan_coverage(prob, 0, rng, cache), ConfigError);
  const auto plan = plan_coverage(prob, 2, rng, cache);
  CHECK(plan.viewpoints == std::vector<int>{3});
  CHECK(plan.path.back() == 3);
}

}
