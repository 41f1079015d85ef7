#pragma once

#include "bayeswarp/grid.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace bayeswarp {

/// Tangent vectors with ||g|| at or beyond this radius are rejected by exp_map.
inline constexpr double kInjectivityRadius = 3.14159265358979323846 - 1e-6;

Psi gamma_to_psi(const Warping& gamma);
Warping psi_to_gamma(const Psi& psi);

/// Exponential map of the unit sphere at psi = 1. Throws InjectivityError
/// for ||g|| >= kInjectivityRadius.
Psi exp_map(const TangentFunction& g);
/// Inverse exponential map at psi = 1. Throws InjectivityError when psi is
/// (numerically) antipodal to 1.
TangentFunction inv_exp_map(const Psi& psi);

double geodesic_dist(const Psi& a, const Psi& b);

// Exp/log on the discrete sphere at an arbitrary base point (trapezoid inner
// product). The identity-based maps above are the base = 1 special case.
namespace sphere {
Eigen::VectorXd exp(const Grid& grid, const Eigen::VectorXd& base, const Eigen::VectorXd& v);
Eigen::VectorXd log(const Grid& grid, const Eigen::VectorXd& base, const Eigen::VectorXd& x);
double dist(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
}  // namespace sphere

enum class CenterStatistic { mean, median };

struct KarcherOptions {
  double tolerance = 1e-6;
  int max_iterations = 100;
  double initial_step = 0.5;
};

struct KarcherResult {
  Psi center;
  bool converged = false;
  int iterations = 0;
  /// Some sample lies at or beyond pi/2 from the chordal average; the
  /// descent may then settle on a local minimum.
  bool dispersed = false;
};

KarcherResult karcher_center(const std::vector<Psi>& samples, CenterStatistic statistic,
                             const KarcherOptions& options = {});

struct ClusterOptions {
  std::size_t k_max = 5;
  double tau = 0.15;
  /// Worker threads for the distance matrix; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/// Pairwise geodesic distances, row-major n x n.
Eigen::MatrixXd pairwise_distances(const std::vector<Psi>& samples, unsigned threads = 0);

/// Complete-linkage clustering on a precomputed distance matrix. Returns
/// labels 0..k-1 numbered by first appearance in input order.
std::vector<int> cluster_distance_matrix(const Eigen::MatrixXd& distances, const ClusterOptions& options);

std::vector<int> cluster_modes(const std::vector<Psi>& samples, const ClusterOptions& options = {});

}  // namespace bayeswarp
