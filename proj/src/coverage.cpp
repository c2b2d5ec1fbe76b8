#include "gridex/coverage.hpp"

#include <limits>

#include "gridex/tsp.hpp"

namespace gridex {

const ShortestPathTree& DistanceCache::tree(int root) {
  auto& slot = trees_[root];
  if (!slot) slot = std::make_unique<ShortestPathTree>(dijkstra_tree(*graph_, root, allowed_));
  return *slot;
}

CoveragePlan plan_coverage(const CoverageProblem& problem, int restarts, Rng& rng, DistanceCache& distances) {
  if (restarts < 1) throw ConfigError("restart count must be >= 1");
  const std::size_t n = problem.observed.size();
  std::vector<std::int64_t> base(n, 0);
  std::vector<std::vector<int>> observers(static_cast<std::size_t>(problem.frontier_count));
  for (std::size_t v = 0; v < n; ++v) {
    if (!problem.candidates[v]) continue;
    base[v] = static_cast<std::int64_t>(problem.observed[v].size());
    for (int f : problem.observed[v]) observers[static_cast<std::size_t>(f)].push_back(static_cast<int>(v));
  }
  for (const auto& o : observers)
    if (o.empty()) throw IntegrityError("frontier not observable from any candidate viewpoint");
  if (problem.frontier_count == 0) return {};

  CoveragePlan best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> utility;
  std::vector<std::uint8_t> covered;
  const int draws = restarts + (problem.incumbent.empty() ? 0 : 1);
  for (int r = 0; r < draws; ++r) {
    utility = base;
    covered.assign(static_cast<std::size_t>(problem.frontier_count), 0);
    std::vector<int> picks;
    std::int64_t total = 0;
    for (auto u : utility) total += u;
    auto take = [&](int pick) {
      for (int f : problem.observed[static_cast<std::size_t>(pick)]) {
        if (covered[static_cast<std::size_t>(f)]) continue;
        covered[static_cast<std::size_t>(f)] = 1;
        for (int l : observers[static_cast<std::size_t>(f)]) {
          --utility[static_cast<std::size_t>(l)];
          --total;
        }
      }
    };
    // The start position is part of every viewpoint set.
    if (problem.start >= 0 && static_cast<std::size_t>(problem.start) < n && problem.candidates[static_cast<std::size_t>(problem.start)])
      take(problem.start);
    if (r == restarts)
      for (int v : problem.incumbent)
        if (v >= 0 && static_cast<std::size_t>(v) < n && problem.candidates[static_cast<std::size_t>(v)] &&
            utility[static_cast<std::size_t>(v)] > 0) {
          picks.push_back(v);
          take(v);
        }
    while (total > 0) {
      std::int64_t draw = rng.uniform_int(0, total - 1);
      int pick = -1;
      for (std::size_t v = 0; v < n; ++v) {
        if (draw < utility[v]) {
          pick = static_cast<int>(v);
          break;
        }
        draw -= utility[v];
      }
      picks.push_back(pick);
      take(pick);
    }

    std::vector<int> stops{problem.start};
    for (int p : picks)
      if (p != problem.start) stops.push_back(p);
    const int m = static_cast<int>(stops.size());
    CostMatrix cost(m);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double d = distances.distance(stops[static_cast<std::size_t>(i)], stops[static_cast<std::size_t>(j)]);
        if (!std::isfinite(d)) throw IntegrityError("viewpoint unreachable from the start node");
        cost(i, j) = cost(j, i) = d;
      }
    const auto order = solve_open_tsp(cost, 0);
    const double c = open_path_cost(cost, order);
    if (c < best_cost) {
      best_cost = c;
      best.viewpoints.clear();
      for (std::size_t k = 1; k < order.size(); ++k) best.viewpoints.push_back(stops[static_cast<std::size_t>(order[k])]);
      best.cost = c;
    }
  }

  best.path = {problem.start};
  int at = problem.start;
  for (int v : best.viewpoints) {
    const auto leg = distances.tree(at).path_to(v);
    best.path.insert(best.path.end(), leg.begin() + 1, leg.end());
    at = v;
  }
  return best;
}

}  // namespace gridex
