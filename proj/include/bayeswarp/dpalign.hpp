#pragma once

#include "bayeswarp/grid.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace bayeswarp {

struct DpConfig {
  /// Lattice points per axis; 0 uses the working grid size.
  std::size_t lattice = 0;
  /// Admissible (dt, dgamma) steps in lattice units, tried in this order;
  /// the first strictly better predecessor wins ties.
  std::vector<std::pair<int, int>> slopes{{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}};

  void validate() const;
};

struct DpResult {
  /// Path interpolated onto the working grid.
  Warping gamma;
  double cost;
  /// Lattice nodes (i, j) from (0, 0) to (M-1, M-1).
  std::vector<std::pair<int, int>> path;
  std::size_t lattice;
};

/// Minimises int (q1(t) - q2(gamma(t)) sqrt(gamma'(t)))^2 dt over monotone
/// piecewise-linear lattice paths. Each segment is integrated with 10-point
/// Gauss-Legendre on linear interpolants of q1 and q2.
DpResult dp_align(const Srvf& q1, const Srvf& q2, const DpConfig& cfg = {});

/// Brute-force enumeration over the same paths and segment costs; M <= 8.
DpResult exhaustive_align(const Srvf& q1, const Srvf& q2, std::size_t lattice, const DpConfig& cfg = {});

/// Piecewise-linear warp through lattice nodes, sampled on `grid`.
Warping path_to_warping(const Grid& grid, const std::vector<std::pair<int, int>>& path, std::size_t lattice);

}  // namespace bayeswarp
