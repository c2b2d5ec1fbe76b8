#pragma once

#include <span>
#include <vector>

namespace gridex {

/// Dense square cost matrix, row-major.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(int n, double fill = 0.0) : n_(n), d_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }
  double& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

/// Length of an open path visiting `order` in sequence.
double open_path_cost(const CostMatrix& cost, std::span<const int> order);

/// Nearest-neighbor open path from `start` (ties to the smaller index).
std::vector<int> nearest_neighbor_order(const CostMatrix& cost, int start);

/// Open-path TSP from `start` with a free end. Solved as a cycle through a
/// zero-cost virtual terminal that stays pinned next to `start`: nearest
/// neighbor construction, then 2-opt and or-opt moves until neither improves.
/// The result is 2-opt locally optimal. Throws InputError on a non-square,
/// asymmetric, negative or non-finite matrix.
std::vector<int> solve_open_tsp(const CostMatrix& cost, int start);

/// Tolerance below which a move does not count as an improvement.
double tsp_improvement_epsilon(const CostMatrix& cost);

}  // namespace gridex
