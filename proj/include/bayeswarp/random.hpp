#pragma once

#include <Eigen/Core>

#include <cmath>
#include <random>

namespace bayeswarp {

/// One stream per chain; (seed, config, data) fix every draw.
using Rng = std::mt19937_64;

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = standard_normal(rng);
  return z;
}

/// Draw from InvGamma(shape, scale): density proportional to x^{-shape-1} exp(-scale/x).
inline double sample_inv_gamma(double shape, double scale, Rng& rng) {
  const double g = std::gamma_distribution<double>(shape, 1.0)(rng);
  return scale / g;
}

/// Metropolis acceptance from a log target ratio; NaN rejects.
inline bool metropolis_accept(double log_ratio, Rng& rng) {
  if (!(log_ratio == log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

}  // namespace bayeswarp
