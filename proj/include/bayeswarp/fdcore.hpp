#pragma once

#include "bayeswarp/grid.hpp"

#include <Eigen/Core>

namespace bayeswarp {

/// How compositions f(gamma(t)) read f between grid points.
enum class Interpolation {
  linear,
  /// C1 piecewise cubic with slopes from the second-order finite differences
  /// of derivative(); keeps f(gamma) differentiable in gamma.
  cubic_hermite,
};

// Raw kernels on value vectors. The public operations below validate their
// arguments and call into these; hot loops in the sampler use them directly.
namespace numeric {

double trapz(const Grid& grid, const Eigen::VectorXd& values);
/// Weights w with trapz(f) == w.dot(f).
Eigen::VectorXd trapz_weights(const Grid& grid);
/// Cumulative trapezoid, starting at 0.
Eigen::VectorXd cumtrapz(const Grid& grid, const Eigen::VectorXd& values);
/// Second-order three-point differences: centred in the interior, one-sided
/// at both ends. Exact for quadratics on any grid.
Eigen::VectorXd derivative(const Grid& grid, const Eigen::VectorXd& values);
double inner(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double norm(const Grid& grid, const Eigen::VectorXd& a);

/// Index j with points[j] <= x <= points[j+1]; x is clamped into [0, 1].
Eigen::Index locate(const Grid& grid, double x);

/// Interpolant of sampled values. For cubic_hermite the slopes are
/// precomputed once at construction.
class Interpolant {
 public:
  Interpolant(const Grid& grid, const Eigen::VectorXd& values, Interpolation kind);

  double value(double x) const;
  /// Value and slope at x (slope is one-sided at grid nodes for linear).
  void evaluate(double x, double& value, double& slope) const;

 private:
  Grid grid_;
  Eigen::VectorXd values_;
  Eigen::VectorXd slopes_;
  Interpolation kind_;
};

}  // namespace numeric

SampledFunction derivative(const SampledFunction& f);
Srvf to_srvf(const SampledFunction& f);
/// f(t) = f0 + cumulative integral of q|q|.
SampledFunction from_srvf(const Srvf& q, double f0);

SampledFunction warp_function(const SampledFunction& f, const Warping& gamma,
                              Interpolation interp = Interpolation::linear);
/// (q o gamma) sqrt(gamma'), gamma' from derivative() clamped at zero.
Srvf warp_srvf(const Srvf& q, const Warping& gamma, Interpolation interp = Interpolation::linear);

double l2_dist(const Srvf& a, const Srvf& b);
double l2_dist(const SampledFunction& a, const SampledFunction& b);
/// Pointwise sum of squared differences, no quadrature weights.
double sse(const Warping& a, const Warping& b);

}  // namespace bayeswarp
