#pragma once

#include "bayeswarp/basis.hpp"
#include "bayeswarp/fdcore.hpp"
#include "bayeswarp/grid.hpp"
#include "bayeswarp/potential.hpp"
#include "bayeswarp/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <memory>
#include <optional>

namespace bayeswarp {

struct InvGammaPrior {
  double shape = 1.0;
  double scale = 1.0;
};

struct UniformPrior {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(double x) const { return x >= lower && x <= upper; }
};

struct PriorConfig {
  /// Level-2 registration variance; deliberately diffuse.
  InvGammaPrior sigma2{1.0, 0.01};
  /// Observation variances. Unset means InvGamma(3, 0.02 * var(y_k)).
  std::optional<InvGammaPrior> sigma1_2;
  std::optional<InvGammaPrior> sigma2_2;
  InvGammaPrior s1_2{2.0, 1.0};
  InvGammaPrior s2_2{2.0, 1.0};
  UniformPrior l1{0.01, 1.0};
  UniformPrior l2{0.01, 1.0};
  double sigma_g = 1.0;
  /// Weight of the Gauss-Newton Hessian in the preconditioner.
  double beta = 0.0;
};

/// Fills the data-dependent observation priors and validates everything.
PriorConfig resolve_priors(PriorConfig priors, const SampledFunction& y1, const SampledFunction& y2);
void validate(const PriorConfig& priors);

struct ModelState {
  TangentCoeffs c;
  SampledFunction f1;
  SampledFunction f2;
  double sigma2 = 1.0;
  double sigma1_2 = 1.0;
  double sigma2_2 = 1.0;
  double s1_2 = 1.0;
  double s2_2 = 1.0;
  double l1 = 0.1;
  double l2 = 0.1;
};

/// K_ij = s2 exp(-(|t_i - t_j| / (2 l))^2), plus 1e-8 s2 on the diagonal.
Eigen::MatrixXd se_kernel(const Grid& grid, double s2, double l);

/// Cholesky factor of the unit-scale SE correlation (jitter included) at a
/// fixed length scale. K = s2 * R.
class SeCorrelation {
 public:
  SeCorrelation(const Grid& grid, double l);

  double lengthscale() const { return l_; }
  const Eigen::MatrixXd& lower() const { return lower_; }
  double log_det() const { return log_det_; }
  /// f^T R^{-1} f.
  double quad(const Eigen::VectorXd& f) const;
  /// log N(f; 0, s2 R).
  double log_density(const Eigen::VectorXd& f, double s2) const;

 private:
  double l_;
  Eigen::MatrixXd lower_;
  double log_det_ = 0.0;
};

struct GpFit {
  double s2;
  double l;
  double noise;
  SampledFunction mean;
};

/// Zero-mean GP regression with SE kernel. (l, noise/s2) are chosen on a
/// fixed log grid by marginal likelihood with s2 profiled out; `mean` is the
/// posterior mean at the grid points.
GpFit fit_gp(const SampledFunction& y);

/// Phi(c) = (N/2) log sigma2 + (1/(2 sigma2)) int (q1 - G(c))^2 dt with
/// G(c) = (q2 o gamma_c) sqrt(gamma_c'), gamma_c = psi_to_gamma(exp_map(B^T c)).
///
/// The gradient and GNH differentiate the discrete pipeline exactly
/// (exp map, cumulative trapezoid, finite-difference rate, interpolation),
/// so they agree with finite differences of value() to roundoff.
class RegistrationPotential final : public Potential {
 public:
  RegistrationPotential(std::shared_ptr<const Basis> basis, Srvf q1, Srvf q2, double sigma2,
                        Interpolation interp = Interpolation::cubic_hermite);

  std::size_t dimension() const override { return basis_->dimension(); }
  double value(const Eigen::VectorXd& c) const override;
  PotentialEval evaluate(const Eigen::VectorXd& c, bool with_gnh) const override;

  /// int (q1 - G(c))^2 dt.
  double misfit(const Eigen::VectorXd& c) const;
  Srvf warped(const Eigen::VectorXd& c) const;
  Warping warping(const Eigen::VectorXd& c) const;

  const Basis& basis() const { return *basis_; }
  double sigma2() const { return sigma2_; }

 private:
  struct Forward;
  Forward forward(const Eigen::VectorXd& c, bool tangents) const;

  std::shared_ptr<const Basis> basis_;
  Srvf q1_;
  Srvf q2_;
  double sigma2_;
  numeric::Interpolant q2_interp_;
  Eigen::VectorXd weights_;
};

double phi(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
           Interpolation interp = Interpolation::cubic_hermite);
Eigen::VectorXd grad_phi(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
                         Interpolation interp = Interpolation::cubic_hermite);
Eigen::MatrixXd gnh(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2 = 1.0,
                    Interpolation interp = Interpolation::cubic_hermite);
Eigen::VectorXd natural_gradient(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
                                 const PriorSpectrum& spectrum, double beta,
                                 Interpolation interp = Interpolation::cubic_hermite);

double loglik_level1(const SampledFunction& y, const SampledFunction& f, double sig2);

/// Conjugate posterior InvGamma(a + N/2, b + sum (y - f)^2 / 2).
InvGammaPrior obs_variance_posterior(const SampledFunction& y, const SampledFunction& f, const InvGammaPrior& prior);
double gibbs_obs_variance(const SampledFunction& y, const SampledFunction& f, const InvGammaPrior& prior, Rng& rng);
/// Kernel scale s_k^2 | f_k, l_k ~ InvGamma(a + N/2, b + f^T R^{-1} f / 2).
double gibbs_kernel_scale(const SampledFunction& f, const SeCorrelation& corr, const InvGammaPrior& prior, Rng& rng);
/// Level-2 variance, conjugate with Phi: InvGamma(a + N/2, b + misfit / 2).
double gibbs_registration_variance(double misfit, std::size_t n, const InvGammaPrior& prior, Rng& rng);

/// min(1, exp(log_target_new - log_target_old)) for a symmetric proposal.
double mh_accept_prob(double log_target_old, double log_target_new);

/// Everything the f and l updates need besides the state.
struct ModelContext {
  std::shared_ptr<const Basis> basis;
  PriorConfig priors;
  Interpolation interp = Interpolation::cubic_hermite;
};

/// log p(y_k | f_k) + log p(f_k | s_k^2, l_k) - Phi, the f_k full conditional
/// up to a constant. k is 1 or 2.
double log_f_conditional(int k, const ModelState& state, const SampledFunction& f_k, const SampledFunction& y_k,
                         const SeCorrelation& corr, const ModelContext& ctx);

/// Random-walk MH on f_k with proposal N(f_k, rho^2 R(l_k)). Updates state on
/// acceptance and returns the flag. rho = 0 proposes f_k itself.
bool mh_update_f(int k, ModelState& state, const SampledFunction& y_k, const SeCorrelation& corr,
                 const ModelContext& ctx, double rho, Rng& rng);

/// Gaussian random walk on l_k targeting p(f_k | s_k^2, l_k) pi(l_k). Proposals
/// outside the prior support are rejected without drawing the uniform. On
/// acceptance both the state and `corr` move to the new length scale.
bool mh_update_lengthscale(int k, ModelState& state, SeCorrelation& corr, const UniformPrior& prior,
                           double proposal_sd, Rng& rng);

}  // namespace bayeswarp
