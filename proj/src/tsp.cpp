#include "gridex/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridex/common.hpp"

namespace gridex {

double open_path_cost(const CostMatrix& cost, std::span<const int> order) {
  double total = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) total += cost(order[i - 1], order[i]);
  return total;
}

std::vector<int> nearest_neighbor_order(const CostMatrix& cost, int start) {
  const int n = cost.size();
  std::vector<int> order{start};
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  used[static_cast<std::size_t>(start)] = 1;
  for (int step = 1; step < n; ++step) {
    const int cur = order.back();
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (!used[static_cast<std::size_t>(j)] && (best < 0 || cost(cur, j) < best_d)) {
        best = j;
        best_d = cost(cur, j);
      }
    used[static_cast<std::size_t>(best)] = 1;
    order.push_back(best);
  }
  return order;
}

double tsp_improvement_epsilon(const CostMatrix& cost) {
  double scale = 0.0;
  for (int i = 0; i < cost.size(); ++i)
    for (int j = 0; j < cost.size(); ++j) scale = std::max(scale, cost(i, j));
  return 1e-10 * (1.0 + scale);
}

namespace {

void validate(const CostMatrix& cost, int start) {
  const int n = cost.size();
  if (n < 1) throw InputError("empty cost matrix");
  if (start < 0 || start >= n) throw InputError("start index out of range");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c = cost(i, j);
      if (!std::isfinite(c)) throw InputError("non-finite cost entry");
      if (c < 0.0) throw InputError("negative cost entry");
      if (std::abs(c - cost(j, i)) > 1e-9 * (1.0 + std::abs(c))) throw InputError("cost matrix is not symmetric");
    }
}

// Tour over n real nodes plus the virtual terminal `n` kept at the last
// position; the closing edge terminal->start costs nothing.
struct Tour {
  const CostMatrix& cost;
  int n;
  std::vector<int> t;

  double c(int a, int b) const { return (a == n || b == n) ? 0.0 : cost(a, b); }

  // Reverse positions [i, j], 1 <= i < j <= n-1.
  bool two_opt(double eps) {
    bool any = false;
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 1; i < n - 1; ++i)
        for (int j = i + 1; j <= n - 1; ++j) {
          const int a = t[static_cast<std::size_t>(i - 1)], b = t[static_cast<std::size_t>(i)];
          const int d = t[static_cast<std::size_t>(j)], e = t[static_cast<std::size_t>(j + 1)];
          const double delta = c(a, d) + c(b, e) - c(a, b) - c(d, e);
          if (delta < -eps) {
            std::reverse(t.begin() + i, t.begin() + j + 1);
            improved = any = true;
          }
        }
    }
    return any;
  }

  // Move a segment of 1..3 real nodes to another gap, optionally reversed.
  bool or_opt(double eps) {
    for (int len = 1; len <= 3; ++len)
      for (int i = 1; i + len - 1 <= n - 1; ++i) {
        const int j = i + len - 1;
        const int prev = t[static_cast<std::size_t>(i - 1)], next = t[static_cast<std::size_t>(j + 1)];
        const int first = t[static_cast<std::size_t>(i)], last = t[static_cast<std::size_t>(j)];
        const double removed = c(prev, first) + c(last, next) - c(prev, next);
        for (int k = 0; k <= n - 1; ++k) {
          if (k >= i - 1 && k <= j) continue;  // gap (t[k], t[k+1]) must lie outside the segment
          const int x = t[static_cast<std::size_t>(k)], y = t[static_cast<std::size_t>(k + 1)];
          const double fwd = c(x, first) + c(last, y) - c(x, y);
          const double rev = c(x, last) + c(first, y) - c(x, y);
          const bool reversed = rev < fwd;
          if (std::min(fwd, rev) - removed < -eps) {
            std::vector<int> seg(t.begin() + i, t.begin() + j + 1);
            if (reversed) std::reverse(seg.begin(), seg.end());
            t.erase(t.begin() + i, t.begin() + j + 1);
            const int insert_at = k < i ? k + 1 : k + 1 - len;
            t.insert(t.begin() + insert_at, seg.begin(), seg.end());
            return true;
          }
        }
      }
    return false;
  }
};

}  // namespace

std::vector<int> solve_open_tsp(const CostMatrix& cost, int start) {
  validate(cost, start);
  const int n = cost.size();
  if (n <= 2) return nearest_neighbor_order(cost, start);
  Tour tour{cost, n, nearest_neighbor_order(cost, start)};
  tour.t.push_back(n);
  const double eps = tsp_improvement_epsilon(cost);
  do {
    tour.two_opt(eps);
  } while (tour.or_opt(eps));
  tour.t.pop_back();
  return tour.t;
}

}  // namespace gridex
