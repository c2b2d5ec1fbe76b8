#include "gridex/nav_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>

namespace gridex {

RoadmapGraph::RoadmapGraph(const OccupancyGrid& shape, RoadmapParams params) : params_(params) {
  if (!(params.node_resolution > 0.0)) throw ConfigError("node resolution must be positive");
  if (!(params.neighbor_threshold > 0.0)) throw ConfigError("neighbor threshold must be positive");
  const double ratio = params.node_resolution / shape.resolution();
  stride_ = static_cast<int>(std::lround(ratio));
  if (stride_ < 1 || std::abs(ratio - stride_) > 1e-6 * ratio)
    throw ConfigError("node resolution must be a whole multiple of the map resolution");
  grid_w_ = shape.width();
  grid_h_ = shape.height();
  lattice_w_ = (grid_w_ - 1) / stride_ + 1;
  lattice_h_ = (grid_h_ - 1) / stride_ + 1;
  lattice_to_node_.assign(static_cast<std::size_t>(lattice_w_) * static_cast<std::size_t>(lattice_h_), -1);

  const double reach = params.neighbor_threshold / params.node_resolution;
  const int r = static_cast<int>(std::floor(reach + 1e-9));
  const double limit = reach * reach * (1.0 + 1e-9);
  stencil_.push_back({0, 0});
  for (int dj = -r; dj <= r; ++dj)
    for (int di = -r; di <= r; ++di)
      if ((di != 0 || dj != 0) && static_cast<double>(di * di + dj * dj) <= limit) stencil_.push_back({di, dj});
  reverse_slot_.resize(stencil_.size());
  for (std::size_t k = 0; k < stencil_.size(); ++k)
    for (std::size_t q = 0; q < stencil_.size(); ++q)
      if (stencil_[q].di == -stencil_[k].di && stencil_[q].dj == -stencil_[k].dj) reverse_slot_[k] = static_cast<int>(q);
}

bool RoadmapGraph::has_edge(int a, int b) const {
  const auto& n = neighbors(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::size_t RoadmapGraph::edge_count() const {
  std::size_t twice = 0;
  for (std::size_t i = 0; i < adj_.size(); ++i)
    for (int v : adj_[i]) twice += (v == static_cast<int>(i)) ? 2 : 1;
  return twice / 2;
}

int RoadmapGraph::node_at_lattice(int li, int lj) const {
  if (li < 0 || lj < 0 || li >= lattice_w_ || lj >= lattice_h_) return -1;
  return lattice_to_node_[static_cast<std::size_t>(lj) * static_cast<std::size_t>(lattice_w_) + static_cast<std::size_t>(li)];
}

int RoadmapGraph::node_at_cell(CellIndex c) const {
  if (c.x % stride_ != 0 || c.y % stride_ != 0) return -1;
  return node_at_lattice(c.x / stride_, c.y / stride_);
}

std::vector<Pose2> RoadmapGraph::positions() const {
  std::vector<Pose2> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.pos);
  return out;
}

namespace {

enum class Sight { Clear, Unknown, Obstacle };

Sight classify_segment(const OccupancyGrid& belief, CellIndex a, CellIndex b) {
  // canonical orientation so that a-b and b-a walk the same cells
  if (std::pair{b.y, b.x} < std::pair{a.y, a.x}) std::swap(a, b);
  Sight result = Sight::Clear;
  trace_ray(a, b, [&](CellIndex c) {
    if (!belief.in_bounds(c)) {
      result = Sight::Obstacle;
      return false;
    }
    switch (belief.at(c)) {
      case CellState::Free: return true;
      case CellState::Obstacle: result = Sight::Obstacle; return false;
      case CellState::Unknown: result = Sight::Unknown; return true;
    }
    return true;
  });
  return result;
}

}  // namespace

bool line_of_sight(const OccupancyGrid& belief, CellIndex a, CellIndex b) {
  if (!belief.in_bounds(a) || !belief.in_bounds(b)) return false;
  return classify_segment(belief, a, b) == Sight::Clear;
}

bool line_of_sight(const OccupancyGrid& belief, Pose2 a, Pose2 b) {
  return line_of_sight(belief, belief.cell_of(a), belief.cell_of(b));
}

struct RoadmapBuilder {
  static void link(RoadmapGraph& g, int a, int b) {
    auto insert = [](std::vector<int>& v, int x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
    insert(g.adj_[static_cast<std::size_t>(a)], b);
    if (a != b) insert(g.adj_[static_cast<std::size_t>(b)], a);
  }

  static ExtendStats extend(RoadmapGraph& g, const OccupancyGrid& belief) {
    if (belief.width() != g.grid_w_ || belief.height() != g.grid_h_)
      throw PreconditionError("belief dimensions differ from the roadmap lattice");
    ExtendStats stats;
    const std::size_t slots = g.stencil_.size();
    for (int lj = 0; lj < g.lattice_h_; ++lj)
      for (int li = 0; li < g.lattice_w_; ++li) {
        const CellIndex c{li * g.stride_, lj * g.stride_};
        auto& slot = g.lattice_to_node_[static_cast<std::size_t>(lj) * static_cast<std::size_t>(g.lattice_w_) + static_cast<std::size_t>(li)];
        if (slot != -1 || belief.at(c) != CellState::Free) continue;
        const int id = static_cast<int>(g.nodes_.size());
        slot = id;
        g.nodes_.push_back({id, c, belief.center_of(c), li, lj});
        g.adj_.emplace_back();
        g.links_.resize(g.links_.size() + slots, RoadmapGraph::Link::Untested);
        g.links_[static_cast<std::size_t>(id) * slots] = RoadmapGraph::Link::Edge;
        link(g, id, id);
        ++stats.nodes_added;
        ++stats.edges_added;
      }

    using Link = RoadmapGraph::Link;
    for (const auto& n : g.nodes_) {
      for (std::size_t k = 1; k < slots; ++k) {
        const auto off = g.stencil_[k];
        if (off.dj < 0 || (off.dj == 0 && off.di < 0)) continue;  // each pair once
        auto& state = g.links_[static_cast<std::size_t>(n.id) * slots + k];
        if (state == Link::Edge || state == Link::Blocked) continue;
        const int other = g.node_at_lattice(n.li + off.di, n.lj + off.dj);
        if (other < 0) continue;
        const Sight s = classify_segment(belief, n.cell, g.node(other).cell);
        const Link next = s == Sight::Clear ? Link::Edge : (s == Sight::Obstacle ? Link::Blocked : Link::Pending);
        state = next;
        g.links_[static_cast<std::size_t>(other) * slots + static_cast<std::size_t>(g.reverse_slot_[k])] = next;
        if (next == Link::Edge) {
          link(g, n.id, other);
          ++stats.edges_added;
        }
      }
    }
    return stats;
  }
};

ExtendStats extend_dense_graph(RoadmapGraph& graph, const OccupancyGrid& belief) {
  return RoadmapBuilder::extend(graph, belief);
}

int robot_node(const RoadmapGraph& graph, Pose2 p) {
  if (graph.empty()) throw StateError("robot_node on an empty roadmap");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& n : graph.nodes()) {
    const double d = distance(n.pos, p);
    if (d < best_d) {
      best_d = d;
      best = n.id;
    }
  }
  return best;
}

LocalView extract_local_view(const RoadmapGraph& graph, int v_cur, double side) {
  if (v_cur < 0 || v_cur >= graph.size()) throw PreconditionError("window center is not a roadmap node");
  LocalView view;
  view.center = v_cur;
  view.side = side;
  view.member.assign(static_cast<std::size_t>(graph.size()), 0);
  view.local_index.assign(static_cast<std::size_t>(graph.size()), -1);
  const Pose2 c = graph.node(v_cur).pos;
  const double half = side / 2.0 + 1e-9;
  for (const auto& n : graph.nodes()) {
    if (std::abs(n.pos.x - c.x) <= half && std::abs(n.pos.y - c.y) <= half) {
      view.member[static_cast<std::size_t>(n.id)] = 1;
      view.local_index[static_cast<std::size_t>(n.id)] = static_cast<int>(view.nodes.size());
      view.nodes.push_back(n.id);
    }
  }
  for (int u : view.nodes)
    for (int v : graph.neighbors(u))
      if (v >= u && view.contains(v)) view.edges.emplace_back(u, v);
  return view;
}

namespace {

bool allowed_node(NodeFilter allowed, int id) {
  return allowed.empty() || allowed[static_cast<std::size_t>(id)] != 0;
}

struct QueueEntry {
  double key;
  int id;
  bool operator>(const QueueEntry& o) const { return key > o.key || (key == o.key && id > o.id); }
};
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

}  // namespace

std::optional<GraphPath> astar_path(const RoadmapGraph& graph, int src, int dst, NodeFilter allowed) {
  if (src < 0 || dst < 0 || src >= graph.size() || dst >= graph.size())
    throw PreconditionError("astar_path endpoints must be roadmap nodes");
  if (!allowed_node(allowed, src) || !allowed_node(allowed, dst)) return std::nullopt;
  const std::size_t n = static_cast<std::size_t>(graph.size());
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  const Pose2 goal = graph.node(dst).pos;
  MinQueue open;
  g[static_cast<std::size_t>(src)] = 0.0;
  open.push({distance(graph.node(src).pos, goal), src});
  while (!open.empty()) {
    const int u = open.top().id;
    open.pop();
    auto& done = closed[static_cast<std::size_t>(u)];
    if (done) continue;
    done = 1;
    if (u == dst) break;
    for (int v : graph.neighbors(u)) {
      if (v == u || closed[static_cast<std::size_t>(v)] || !allowed_node(allowed, v)) continue;
      const double cand = g[static_cast<std::size_t>(u)] + graph.edge_length(u, v);
      if (cand < g[static_cast<std::size_t>(v)]) {
        g[static_cast<std::size_t>(v)] = cand;
        parent[static_cast<std::size_t>(v)] = u;
        open.push({cand + distance(graph.node(v).pos, goal), v});
      }
    }
  }
  if (!closed[static_cast<std::size_t>(dst)]) return std::nullopt;
  GraphPath path;
  path.cost = g[static_cast<std::size_t>(dst)];
  for (int v = dst; v != -1; v = parent[static_cast<std::size_t>(v)]) path.nodes.push_back(v);
  std::reverse(path.nodes.begin(), path.nodes.end());
  return path;
}

std::vector<int> ShortestPathTree::path_to(int target) const {
  std::vector<int> out;
  if (!reachable(target)) return out;
  for (int v = target; v != -1; v = parent[static_cast<std::size_t>(v)]) out.push_back(v);
  std::reverse(out.begin(), out.end());
  return out;
}

ShortestPathTree dijkstra_tree(const RoadmapGraph& graph, int src, NodeFilter allowed) {
  if (src < 0 || src >= graph.size()) throw PreconditionError("dijkstra source must be a roadmap node");
  const std::size_t n = static_cast<std::size_t>(graph.size());
  ShortestPathTree tree;
  tree.source = src;
  tree.dist.assign(n, std::numeric_limits<double>::infinity());
  tree.parent.assign(n, -1);
  if (!allowed_node(allowed, src)) return tree;
  std::vector<std::uint8_t> closed(n, 0);
  MinQueue open;
  tree.dist[static_cast<std::size_t>(src)] = 0.0;
  open.push({0.0, src});
  while (!open.empty()) {
    const int u = open.top().id;
    open.pop();
    if (closed[static_cast<std::size_t>(u)]) continue;
    closed[static_cast<std::size_t>(u)] = 1;
    for (int v : graph.neighbors(u)) {
      if (v == u || closed[static_cast<std::size_t>(v)] || !allowed_node(allowed, v)) continue;
      const double cand = tree.dist[static_cast<std::size_t>(u)] + graph.edge_length(u, v);
      if (cand < tree.dist[static_cast<std::size_t>(v)]) {
        tree.dist[static_cast<std::size_t>(v)] = cand;
        tree.parent[static_cast<std::size_t>(v)] = u;
        open.push({cand, v});
      }
    }
  }
  return tree;
}

std::vector<std::uint8_t> connected_mask(const RoadmapGraph& graph, int src) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(graph.size()), 0);
  if (src < 0 || src >= graph.size()) return seen;
  std::vector<int> stack{src};
  seen[static_cast<std::size_t>(src)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : graph.neighbors(u))
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
  }
  return seen;
}

void write_graph_dump(const RoadmapGraph& graph, std::ostream& out) {
  char buf[96];
  for (const auto& n : graph.nodes()) {
    std::snprintf(buf, sizeof buf, "%d %.9g %.9g\n", n.id, n.pos.x, n.pos.y);
    out << buf;
  }
  for (const auto& n : graph.nodes())
    for (int v : graph.neighbors(n.id))
      if (v >= n.id) out << n.id << ' ' << v << '\n';
}

}  // namespace gridex
