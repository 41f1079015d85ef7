#include "bayeswarp/dpalign.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/fdcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bayeswarp {

void DpConfig::validate() const {
  if (lattice == 1) throw InvalidInput("dp lattice needs at least 2 points");
  if (slopes.empty()) throw InvalidInput("dp needs at least one slope");
  for (const auto& [a, b] : slopes)
    if (a < 1 || b < 1) throw InvalidInput("dp slopes must be positive");
}

namespace {

// 10-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 10> kNodes{-0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
                                        -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
                                        0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
                                        0.9739065285171717};
constexpr std::array<double, 10> kWeights{0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
                                          0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
                                          0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                          0.0666713443086881};

class SegmentCost {
 public:
  SegmentCost(const Srvf& q1, const Srvf& q2, std::size_t lattice)
      : f1_(q1.grid(), q1.values(), Interpolation::linear),
        f2_(q2.grid(), q2.values(), Interpolation::linear),
        step_(1.0 / static_cast<double>(lattice - 1)) {}

  double operator()(int i0, int j0, int i1, int j1) const {
    const double t0 = i0 * step_, t1 = i1 * step_;
    const double g0 = j0 * step_, g1 = j1 * step_;
    const double slope = (g1 - g0) / (t1 - t0);
    const double root = std::sqrt(slope);
    const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
    double acc = 0.0;
    for (std::size_t k = 0; k < kNodes.size(); ++k) {
      const double t = mid + half * kNodes[k];
      const double r = f1_.value(t) - f2_.value(g0 + slope * (t - t0)) * root;
      acc += kWeights[k] * r * r;
    }
    return half * acc;
  }

 private:
  numeric::Interpolant f1_;
  numeric::Interpolant f2_;
  double step_;
};

std::size_t lattice_size(const Srvf& q1, const DpConfig& cfg) {
  return cfg.lattice == 0 ? q1.grid().size() : cfg.lattice;
}

void require_pair(const Srvf& q1, const Srvf& q2) {
  if (q1.grid() != q2.grid()) throw InvalidInput("grid mismatch");
}

}  // namespace

Warping path_to_warping(const Grid& grid, const std::vector<std::pair<int, int>>& path, std::size_t lattice) {
  const double step = 1.0 / static_cast<double>(lattice - 1);
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  std::size_t seg = 0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double t = grid[n];
    while (seg + 2 < path.size() && path[seg + 1].first * step < t) ++seg;
    const double ta = path[seg].first * step, tb = path[seg + 1].first * step;
    const double ga = path[seg].second * step, gb = path[seg + 1].second * step;
    out[static_cast<Eigen::Index>(n)] = ga + (gb - ga) * (t - ta) / (tb - ta);
  }
  out[0] = 0.0;
  out[out.size() - 1] = 1.0;
  return Warping(grid, std::move(out));
}

DpResult dp_align(const Srvf& q1, const Srvf& q2, const DpConfig& cfg) {
  require_pair(q1, q2);
  cfg.validate();
  const std::size_t m = lattice_size(q1, cfg);
  const SegmentCost cost(q1, q2, m);
  const int mm = static_cast<int>(m);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> energy(m * m, inf);
  std::vector<int> from(m * m, -1);
  auto at = [mm](int i, int j) { return static_cast<std::size_t>(i) * static_cast<std::size_t>(mm) + static_cast<std::size_t>(j); };
  energy[0] = 0.0;
  for (int i = 1; i < mm; ++i) {
    for (int j = 1; j < mm; ++j) {
      double best = inf;
      int arg = -1;
      for (const auto& [di, dj] : cfg.slopes) {
        const int pi = i - di, pj = j - dj;
        if (pi < 0 || pj < 0) continue;
        const double prev = energy[at(pi, pj)];
        if (prev == inf) continue;
        const double e = prev + cost(pi, pj, i, j);
        if (e < best) {
          best = e;
          arg = static_cast<int>(at(pi, pj));
        }
      }
      energy[at(i, j)] = best;
      from[at(i, j)] = arg;
    }
  }
  if (energy[at(mm - 1, mm - 1)] == inf) throw NumericalError("dp lattice admits no path");
  std::vector<std::pair<int, int>> path;
  for (int node = static_cast<int>(at(mm - 1, mm - 1)); node >= 0; node = from[static_cast<std::size_t>(node)]) {
    path.emplace_back(node / mm, node % mm);
    if (node == 0) break;
  }
  std::reverse(path.begin(), path.end());
  return DpResult{path_to_warping(q1.grid(), path, m), energy[at(mm - 1, mm - 1)], std::move(path), m};
}

DpResult exhaustive_align(const Srvf& q1, const Srvf& q2, std::size_t lattice, const DpConfig& cfg) {
  require_pair(q1, q2);
  cfg.validate();
  if (lattice < 2) throw InvalidInput("exhaustive lattice needs at least 2 points");
  if (lattice > 8) throw InvalidInput("exhaustive enumeration is limited to lattices of at most 8 points");
  const SegmentCost cost(q1, q2, lattice);
  const int last = static_cast<int>(lattice) - 1;

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> best_path;
  std::vector<std::pair<int, int>> path{{0, 0}};
  // Costs accumulate from the start node, the same order as the DP recursion.
  auto search = [&](auto&& self, int i, int j, double acc) -> void {
    if (i == last && j == last) {
      if (acc < best) {
        best = acc;
        best_path = path;
      }
      return;
    }
    for (const auto& [di, dj] : cfg.slopes) {
      const int ni = i + di, nj = j + dj;
      if (ni > last || nj > last) continue;
      path.emplace_back(ni, nj);
      self(self, ni, nj, acc + cost(i, j, ni, nj));
      path.pop_back();
    }
  };
  search(search, 0, 0, 0.0);
  if (best_path.empty()) throw NumericalError("lattice admits no path");
  return DpResult{path_to_warping(q1.grid(), best_path, lattice), best, std::move(best_path), lattice};
}

}  // namespace bayeswarp
