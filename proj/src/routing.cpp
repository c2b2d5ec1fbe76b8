#include "gridex/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "gridex/tsp.hpp"

namespace gridex {

std::vector<int> compute_utilities(const OccupancyGrid& belief, const FrontierSet& frontiers,
                                   std::span<const Pose2> nodes, double d_utility) {
  std::vector<int> out(nodes.size(), 0);
  if (frontiers.empty()) return out;
  const auto mask = frontier_mask(belief, frontiers);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out[i] = static_cast<int>(observable_frontiers(belief, mask, nodes[i], d_utility).size());
  return out;
}

namespace {

struct GlobalTree {
  std::vector<double> dist;
  std::vector<int> via_edge;  // edge used to enter the node
};

GlobalTree global_dijkstra(const GlobalGraph& g, int src) {
  const std::size_t n = g.nodes.size();
  GlobalTree t{std::vector<double>(n, std::numeric_limits<double>::infinity()), std::vector<int>(n, -1)};
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  t.dist[static_cast<std::size_t>(src)] = 0.0;
  open.push({0.0, src});
  std::vector<char> closed(n, 0);
  while (!open.empty()) {
    const int u = open.top().second;
    open.pop();
    if (closed[static_cast<std::size_t>(u)]) continue;
    closed[static_cast<std::size_t>(u)] = 1;
    for (int ei : g.incident[static_cast<std::size_t>(u)]) {
      const auto& e = g.edges[static_cast<std::size_t>(ei)];
      const int v = e.a == u ? e.b : e.a;
      const double cand = t.dist[static_cast<std::size_t>(u)] + e.cost;
      if (cand < t.dist[static_cast<std::size_t>(v)]) {
        t.dist[static_cast<std::size_t>(v)] = cand;
        t.via_edge[static_cast<std::size_t>(v)] = ei;
        open.push({cand, v});
      }
    }
  }
  return t;
}

// Roadmap path from global node `from` (tree root) to `to`.
std::vector<int> expand(const GlobalGraph& g, const GlobalTree& tree, int from, int to) {
  std::vector<std::vector<int>> legs;
  for (int v = to; v != from;) {
    const auto& e = g.edges[static_cast<std::size_t>(tree.via_edge[static_cast<std::size_t>(v)])];
    std::vector<int> leg = e.path;
    const int u = e.a == v ? e.b : e.a;
    if (e.a == v) std::reverse(leg.begin(), leg.end());  // stored a->b, we walk u->v
    legs.push_back(std::move(leg));
    v = u;
  }
  std::vector<int> out{g.nodes[static_cast<std::size_t>(from)].site};
  for (auto it = legs.rbegin(); it != legs.rend(); ++it) out.insert(out.end(), it->begin() + 1, it->end());
  return out;
}

}  // namespace

GlobalReference plan_global_reference(const GlobalGraph& global, std::span<const std::uint8_t> unexplored) {
  GlobalReference ref;
  if (global.current < 0) return ref;
  std::vector<int> stops{global.current};
  for (std::size_t g = 0; g < global.nodes.size(); ++g)
    if (unexplored[g] && static_cast<int>(g) != global.current) stops.push_back(static_cast<int>(g));
  if (stops.size() == 1) return ref;

  std::vector<GlobalTree> trees;
  trees.reserve(stops.size());
  for (int s : stops) trees.push_back(global_dijkstra(global, s));
  const int n = static_cast<int>(stops.size());
  CostMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = trees[static_cast<std::size_t>(i)].dist[static_cast<std::size_t>(stops[static_cast<std::size_t>(j)])];
      if (!std::isfinite(d)) throw IntegrityError("unexplored global node unreachable from the current global node");
      m(i, j) = d;
    }
  // Dijkstra distances can differ by rounding depending on direction.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(i, j) = m(j, i) = std::min(m(i, j), m(j, i));

  const auto order = solve_open_tsp(m, 0);
  ref.cost = open_path_cost(m, order);
  ref.path.push_back(global.nodes[static_cast<std::size_t>(global.current)].site);
  for (int k : order) ref.order.push_back(stops[static_cast<std::size_t>(k)]);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const int a = order[k - 1], b = order[k];
    const auto leg = expand(global, trees[static_cast<std::size_t>(a)], stops[static_cast<std::size_t>(a)], stops[static_cast<std::size_t>(b)]);
    ref.path.insert(ref.path.end(), leg.begin() + 1, leg.end());
    ref.leg_ends.push_back(static_cast<int>(ref.path.size()) - 1);
  }
  return ref;
}

LocalReferences plan_local_references(const RoadmapGraph& graph, const LocalView& view, int v_cur,
                                      std::span<const int> utilities) {
  if (!view.contains(v_cur)) throw PreconditionError("robot node is not in the local view");
  LocalReferences out;
  std::vector<int> targets;
  for (int id : view.nodes)
    if (static_cast<std::size_t>(id) < utilities.size() && utilities[static_cast<std::size_t>(id)] > 0) targets.push_back(id);
  if (targets.empty()) return out;
  const auto tree = dijkstra_tree(graph, v_cur, view.member);
  for (int t : targets) {
    if (!tree.reachable(t)) {
      out.unreachable.push_back(t);
      continue;
    }
    out.targets.push_back(t);
    out.paths.push_back(tree.path_to(t));
  }
  return out;
}

Guideposts mark_guideposts(const LocalView& view, const LocalReferences& local, const GlobalReference& global) {
  Guideposts g{std::vector<std::uint8_t>(view.nodes.size(), 0), std::vector<std::uint8_t>(view.nodes.size(), 0)};
  for (const auto& path : local.paths)
    for (int v : path)
      if (view.contains(v)) g.local[static_cast<std::size_t>(view.local_index[static_cast<std::size_t>(v)])] = 1;
  if (!global.empty() && !global.leg_ends.empty()) {
    const int end = global.leg_ends.front();
    for (int i = 0; i <= end; ++i) {
      const int v = global.path[static_cast<std::size_t>(i)];
      if (!view.contains(v)) break;  // clipped at the first exit from the window
      g.global[static_cast<std::size_t>(view.local_index[static_cast<std::size_t>(v)])] = 1;
    }
  }
  return g;
}

}  // namespace gridex
