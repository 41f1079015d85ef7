#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace bayeswarp {

struct PotentialEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  /// Gauss-Newton Hessian; empty unless requested.
  Eigen::MatrixXd gnh;
};

/// Negative log-likelihood Phi over basis coefficients. The Gaussian prior
/// N(0, C) is handled by the samplers, not here.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Eigen::VectorXd& c) const = 0;
  virtual PotentialEval evaluate(const Eigen::VectorXd& c, bool with_gnh) const = 0;
};

/// eta = -(C^{-1} + beta H)^{-1} (grad Phi - beta H c), with C = diag(prior_variances).
/// beta = 0 reduces to eta = -C grad Phi and needs no GNH.
Eigen::VectorXd natural_gradient(const PotentialEval& eval, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& prior_variances, double beta);

}  // namespace bayeswarp
