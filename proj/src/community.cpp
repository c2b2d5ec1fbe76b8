#include "gridex/community.hpp"

#include "gridex/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace gridex {

std::size_t SimpleGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adj) twice += a.size();
  return twice / 2;
}

void SimpleGraph::add_edge(int a, int b) {
  if (a == b) return;
  auto& la = adj[static_cast<std::size_t>(a)];
  if (std::find(la.begin(), la.end(), b) != la.end()) return;
  la.push_back(b);
  adj[static_cast<std::size_t>(b)].push_back(a);
}

SimpleGraph local_simple_graph(const RoadmapGraph& graph, const LocalView& view) {
  (void)graph;
  SimpleGraph g;
  g.adj.resize(view.nodes.size());
  for (auto [u, v] : view.edges)
    if (u != v) g.add_edge(view.local_index[static_cast<std::size_t>(u)], view.local_index[static_cast<std::size_t>(v)]);
  return g;
}

double modularity(const SimpleGraph& graph, std::span<const int> labels, double beta) {
  if (labels.size() != static_cast<std::size_t>(graph.size())) throw PreconditionError("partition does not cover the graph");
  const double m = static_cast<double>(graph.edge_count());
  if (m == 0.0) throw UndefinedScoreError("modularity is undefined for an edgeless graph");
  std::map<int, std::pair<double, double>> per;  // label -> (internal edges, degree total)
  for (int i = 0; i < graph.size(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    auto& [internal, total] = per[c];
    total += static_cast<double>(graph.adj[static_cast<std::size_t>(i)].size());
    for (int j : graph.adj[static_cast<std::size_t>(i)])
      if (j > i && labels[static_cast<std::size_t>(j)] == c) internal += 1.0;
  }
  double q = 0.0;
  for (const auto& [c, et] : per) q += et.first / m - beta * et.second * et.second / (4.0 * m * m);
  return q;
}

void CommunityConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (cap < 1) throw ConfigError("community cap must be >= 1");
}

int CommunityConfig::default_cap(double d_local, double node_resolution) {
  const double cells = d_local / node_resolution;
  return std::max(1, static_cast<int>(std::lround(cells * cells / 10.0)));
}

std::vector<int> Partition::community_ids() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < members_.size(); ++c)
    if (!members_[c].empty()) out.push_back(static_cast<int>(c));
  return out;
}

int Partition::create() {
  members_.emplace_back();
  return static_cast<int>(members_.size()) - 1;
}

void Partition::resize(int node_count) {
  if (node_count > static_cast<int>(of_.size())) of_.resize(static_cast<std::size_t>(node_count), -1);
}

void Partition::assign(int node, int community) {
  resize(node + 1);
  auto& slot = of_[static_cast<std::size_t>(node)];
  if (slot >= 0) {
    auto& old = members_[static_cast<std::size_t>(slot)];
    old.erase(std::lower_bound(old.begin(), old.end(), node));
  }
  slot = community;
  auto& m = members_[static_cast<std::size_t>(community)];
  m.insert(std::lower_bound(m.begin(), m.end(), node), node);
}

namespace {

constexpr double kGainEps = 1e-12;
constexpr int kOrderRestarts = 16;

// Degree totals per community over the nodes of the local view.
std::vector<double> community_degrees(const LocalView& view, const SimpleGraph& sg, const Partition& p) {
  std::vector<double> sigma(static_cast<std::size_t>(p.id_bound()), 0.0);
  for (std::size_t i = 0; i < view.nodes.size(); ++i) {
    const int c = p.community_of(view.nodes[i]);
    if (c >= 0) sigma[static_cast<std::size_t>(c)] += static_cast<double>(sg.adj[i].size());
  }
  return sigma;
}

}  // namespace

std::vector<int> assign_new_nodes(const RoadmapGraph& graph, const LocalView& view, Partition& partition,
                                  const CommunityConfig& cfg) {
  cfg.validate();
  partition.resize(graph.size());
  std::vector<int> fresh;
  for (int id : view.nodes)
    if (!partition.assigned(id)) {
      partition.assign(id, partition.create());
      fresh.push_back(id);
    }
  if (fresh.empty()) return fresh;

  const SimpleGraph sg = local_simple_graph(graph, view);
  const double m = static_cast<double>(sg.edge_count());
  if (m == 0.0) return fresh;
  const std::vector<double> sigma0 = community_degrees(view, sg, partition);
  Partition work = partition;
  std::vector<double> sig = sigma0;
  std::vector<int> order = fresh;
  std::vector<char> is_fresh(view.nodes.size(), 0);
  for (int id : fresh) is_fresh[static_cast<std::size_t>(view.local_index[static_cast<std::size_t>(id)])] = 1;

  auto community = [&](int li) { return work.community_of(view.nodes[static_cast<std::size_t>(li)]); };
  auto links_to = [&](int li, int c) {
    double k = 0.0;
    for (int lj : sg.adj[static_cast<std::size_t>(li)])
      if (community(lj) == c) k += 1.0;
    return k;
  };
  // one-node move gain; target < 0 means a new singleton
  auto gain = [&](int li, int target) {
    const double ki = static_cast<double>(sg.adj[static_cast<std::size_t>(li)].size());
    const int home = community(li);
    const double k_home = links_to(li, home), k_t = target < 0 ? 0.0 : links_to(li, target);
    const double s_home = sig[static_cast<std::size_t>(home)] - ki;
    const double s_t = target < 0 ? 0.0 : sig[static_cast<std::size_t>(target)];
    return (k_t - k_home) / m - cfg.beta * ki * (s_t - s_home) / (2.0 * m * m);
  };
  auto move = [&](int li, int target) {
    const double ki = static_cast<double>(sg.adj[static_cast<std::size_t>(li)].size());
    if (target < 0) {
      target = work.create();
      sig.push_back(0.0);
    }
    sig[static_cast<std::size_t>(community(li))] -= ki;
    sig[static_cast<std::size_t>(target)] += ki;
    work.assign(view.nodes[static_cast<std::size_t>(li)], target);
  };

  auto local_move = [&] {
    bool any = false;
    for (int pass = 0; pass < 1000; ++pass) {
      bool moved = false;
      for (int node : order) {
        const int li = view.local_index[static_cast<std::size_t>(node)];
        const auto& nbrs = sg.adj[static_cast<std::size_t>(li)];
        if (nbrs.empty()) continue;
        const int home = community(li);
        std::set<int> targets;
        for (int lj : nbrs) targets.insert(community(lj));
        int best = home;
        double best_gain = kGainEps;
        if (work.size_of(home) > 1) {
          const double g = gain(li, -1);
          if (g > best_gain) {
            best_gain = g;
            best = -1;
          }
        }
        for (int c : targets) {
          if (c == home || work.size_of(c) + 1 > cfg.cap) continue;
          const double g = gain(li, c);
          if (g > best_gain) {
            best_gain = g;
            best = c;
          }
        }
        if (best != home) {
          move(li, best);
          moved = any = true;
        }
      }
      if (!moved) break;
    }
    return any;
  };

  // Exchanging two adjacent fresh nodes keeps both sizes, so it can still
  // improve things when the cap blocks every single move.
  auto swap_pass = [&] {
    bool any = false;
    for (int u : order) {
      const int lu = view.local_index[static_cast<std::size_t>(u)];
      for (int lv : sg.adj[static_cast<std::size_t>(lu)]) {
        if (!is_fresh[static_cast<std::size_t>(lv)]) continue;
        const int a = community(lu), b = community(lv);
        if (a == b) continue;
        const double g1 = gain(lu, b);
        move(lu, b);
        const double g2 = gain(lv, a);
        if (g1 + g2 > kGainEps) {
          move(lv, a);
          any = true;
        } else {
          move(lu, a);
        }
      }
    }
    return any;
  };

  // Aggregation: a community made only of fresh nodes may join a neighbor.
  std::set<int> old_ids;
  for (std::size_t i = 0; i < view.nodes.size(); ++i)
    if (!is_fresh[i]) old_ids.insert(community(static_cast<int>(i)));
  auto merge_best = [&] {
    std::map<std::pair<int, int>, double> between;
    for (int u : fresh) {
      const int lu = view.local_index[static_cast<std::size_t>(u)];
      const int cu = community(lu);
      if (old_ids.count(cu)) continue;
      for (int lv : sg.adj[static_cast<std::size_t>(lu)]) {
        const int cv = community(lv);
        if (cv != cu) between[{cu, cv}] += 1.0;
      }
    }
    double best_gain = kGainEps;
    std::pair<int, int> best{-1, -1};
    for (const auto& [key, e] : between) {
      const auto [a, b] = key;
      if (work.size_of(a) + work.size_of(b) > cfg.cap) continue;
      const double g = e / m - cfg.beta * sig[static_cast<std::size_t>(a)] * sig[static_cast<std::size_t>(b)] / (2.0 * m * m);
      if (g > best_gain) {
        best_gain = g;
        best = key;
      }
    }
    if (best.first < 0) return false;
    const auto members = work.members(best.first);
    for (int v : members) work.assign(v, best.second);
    sig[static_cast<std::size_t>(best.second)] += sig[static_cast<std::size_t>(best.first)];
    sig[static_cast<std::size_t>(best.first)] = 0.0;
    return true;
  };

  // every accepted change raises Q, so this terminates; the bound is a guard
  auto run = [&] {
    for (int round = 0; round < 1000; ++round) {
      bool changed = local_move();
      changed = swap_pass() || changed;
      changed = merge_best() || changed;
      if (!changed) break;
    }
  };

  // A few visiting orders, best Q kept. Greedy moves under a tight cap land
  // in different local optima depending on order.
  Rng rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(fresh.size()));
  const Partition start = partition;
  std::vector<int> labels(view.nodes.size());
  double best_q = -std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < kOrderRestarts; ++attempt) {
    work = start;
    sig = sigma0;
    if (attempt > 0)
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    run();
    for (std::size_t i = 0; i < view.nodes.size(); ++i) labels[i] = work.community_of(view.nodes[i]);
    const double q = modularity(sg, labels, cfg.beta);
    if (q > best_q + kGainEps) {
      best_q = q;
      partition = work;
    }
  }
  return fresh;
}

bool members_connected(const RoadmapGraph& graph, std::span<const int> members) {
  if (members.size() <= 1) return true;
  std::set<int> pool(members.begin(), members.end());
  std::vector<int> stack{*pool.begin()};
  pool.erase(pool.begin());
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : graph.neighbors(u)) {
      auto it = pool.find(v);
      if (it == pool.end()) continue;
      pool.erase(it);
      stack.push_back(v);
    }
  }
  return pool.empty();
}

namespace {

std::vector<std::vector<int>> components_of(const RoadmapGraph& graph, const std::vector<int>& members) {
  std::set<int> pool(members.begin(), members.end());
  std::vector<std::vector<int>> out;
  while (!pool.empty()) {
    std::vector<int> comp{*pool.begin()};
    pool.erase(pool.begin());
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (int v : graph.neighbors(comp[i])) {
        auto it = pool.find(v);
        if (it == pool.end()) continue;
        pool.erase(it);
        comp.push_back(v);
      }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

RefineReport refine_partition(const RoadmapGraph& graph, const LocalView& view, Partition& partition,
                              const CommunityConfig& cfg, std::span<const int> fresh) {
  cfg.validate();
  RefineReport report;
  std::set<int> fresh_set(fresh.begin(), fresh.end());
  std::set<int> touched;
  for (int id : fresh)
    if (partition.assigned(id)) touched.insert(partition.community_of(id));

  std::vector<int> fragments;
  for (int c : touched) {
    auto comps = components_of(graph, partition.members(c));
    if (comps.size() <= 1) continue;
    // The fragment holding pre-existing members keeps the id (it is the only
    // one that can), otherwise the largest; ties by smallest member id.
    auto has_old = [&](const std::vector<int>& comp) {
      return std::any_of(comp.begin(), comp.end(), [&](int v) { return !fresh_set.count(v); });
    };
    std::stable_sort(comps.begin(), comps.end(), [&](const auto& a, const auto& b) {
      const bool oa = has_old(a), ob = has_old(b);
      if (oa != ob) return oa;
      if (a.size() != b.size()) return a.size() > b.size();
      return a.front() < b.front();
    });
    CommunitySplit split{c, {}};
    for (std::size_t i = 1; i < comps.size(); ++i) {
      const int id = partition.create();
      for (int v : comps[i]) partition.assign(v, id);
      split.fragments.push_back(id);
      fragments.push_back(id);
    }
    report.splits.push_back(std::move(split));
  }
  if (fragments.empty()) return report;

  const SimpleGraph sg = local_simple_graph(graph, view);
  const double m = static_cast<double>(sg.edge_count());
  if (m == 0.0) return report;
  std::vector<double> sigma = community_degrees(view, sg, partition);

  for (int f : fragments) {
    const auto members = partition.members(f);
    if (members.empty()) continue;
    std::map<int, double> links;
    for (int u : members)
      for (int v : graph.neighbors(u)) {
        if (v == u || !view.contains(u) || !view.contains(v)) continue;
        const int c = partition.community_of(v);
        if (c >= 0 && c != f) links[c] += 1.0;
      }
    int best = -1;
    double best_gain = kGainEps;
    for (auto [c, e] : links) {
      if (partition.size_of(c) + static_cast<int>(members.size()) > cfg.cap) continue;
      const double gain = e / m - cfg.beta * sigma[static_cast<std::size_t>(f)] * sigma[static_cast<std::size_t>(c)] / (2.0 * m * m);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best < 0) continue;
    for (int v : members) partition.assign(v, best);
    sigma[static_cast<std::size_t>(best)] += sigma[static_cast<std::size_t>(f)];
    sigma[static_cast<std::size_t>(f)] = 0.0;
    ++report.merges;
  }
  return report;
}

int GlobalGraph::node_of_community(int community) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), community,
                             [](const GlobalNode& n, int c) { return n.community < c; });
  return (it != nodes.end() && it->community == community) ? static_cast<int>(it - nodes.begin()) : -1;
}

GlobalGraph rebuild_global_graph(const RoadmapGraph& graph, const Partition& partition, int robot_node) {
  GlobalGraph out;
  for (int c : partition.community_ids()) {
    const auto& members = partition.members(c);
    Pose2 centroid{};
    for (int v : members) {
      centroid.x += graph.node(v).pos.x;
      centroid.y += graph.node(v).pos.y;
    }
    centroid.x /= static_cast<double>(members.size());
    centroid.y /= static_cast<double>(members.size());
    int anchor = members.front();
    double best = std::numeric_limits<double>::infinity();
    for (int v : members) {
      const double d = distance(graph.node(v).pos, centroid);
      if (d < best) {
        best = d;
        anchor = v;
      }
    }
    if (!members_connected(graph, members))
      throw IntegrityError("community " + std::to_string(c) + " has members unreachable from its anchor");
    out.nodes.push_back({c, anchor, anchor, graph.node(anchor).pos, true});
  }
  if (robot_node >= 0 && partition.assigned(robot_node)) {
    out.current = out.node_of_community(partition.community_of(robot_node));
    auto& cur = out.nodes[static_cast<std::size_t>(out.current)];
    cur.site = robot_node;
    cur.pos = graph.node(robot_node).pos;
  }

  std::set<std::pair<int, int>> pairs;
  for (const auto& n : graph.nodes()) {
    const int cu = partition.community_of(n.id);
    if (cu < 0) continue;
    for (int v : graph.neighbors(n.id)) {
      const int cv = partition.community_of(v);
      if (cv < 0 || cv == cu) continue;
      const int a = out.node_of_community(cu), b = out.node_of_community(cv);
      pairs.insert({std::min(a, b), std::max(a, b)});
    }
  }
  out.incident.resize(out.nodes.size());
  for (auto [a, b] : pairs) {
    auto path = astar_path(graph, out.nodes[static_cast<std::size_t>(a)].site, out.nodes[static_cast<std::size_t>(b)].site);
    if (!path) throw IntegrityError("adjacent communities without a connecting path");
    out.incident[static_cast<std::size_t>(a)].push_back(static_cast<int>(out.edges.size()));
    out.incident[static_cast<std::size_t>(b)].push_back(static_cast<int>(out.edges.size()));
    out.edges.push_back({a, b, std::move(path->nodes), path->cost});
  }
  return out;
}

std::vector<std::uint8_t> classify_global_nodes(GlobalGraph& global, const Partition& partition,
                                                std::span<const int> utilities) {
  std::vector<std::uint8_t> unexplored(global.nodes.size(), 0);
  for (std::size_t g = 0; g < global.nodes.size(); ++g) {
    for (int v : partition.members(global.nodes[g].community))
      if (static_cast<std::size_t>(v) < utilities.size() && utilities[static_cast<std::size_t>(v)] > 0) {
        unexplored[g] = 1;
        break;
      }
    global.nodes[g].explored = !unexplored[g];
  }
  return unexplored;
}

void write_partition_dump(const Partition& partition, std::ostream& out) {
  const auto& of = partition.assignment();
  for (std::size_t v = 0; v < of.size(); ++v)
    if (of[v] >= 0) out << v << ' ' << of[v] << '\n';
}

void write_global_graph_dump(const GlobalGraph& global, std::ostream& out) {
  char buf[128];
  for (std::size_t g = 0; g < global.nodes.size(); ++g) {
    const auto& n = global.nodes[g];
    std::snprintf(buf, sizeof buf, "gnode %zu %d %d %.9g %.9g %d\n", g, n.community, n.site, n.pos.x, n.pos.y,
                  n.explored ? 0 : 1);
    out << buf;
  }
  for (const auto& e : global.edges) {
    std::snprintf(buf, sizeof buf, "gedge %d %d %.9g\n", e.a, e.b, e.cost);
    out << buf;
  }
}

}  // namespace gridex
