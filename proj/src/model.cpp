#include "bayeswarp/model.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/geom.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bayeswarp {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidInput(std::string(what) + " must be positive and finite");
}

void validate(const InvGammaPrior& p, const char* what) {
  require_positive(p.shape, what);
  require_positive(p.scale, what);
}

void validate(const UniformPrior& p, const char* what) {
  if (!(p.lower > 0.0) || !(p.upper > p.lower) || !std::isfinite(p.upper))
    throw InvalidInput(std::string(what) + ": need 0 < lower < upper");
}

double sample_variance(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

void require_k(int k) {
  if (k != 1 && k != 2) throw InvalidInput("function index must be 1 or 2");
}

}  // namespace

void validate(const PriorConfig& priors) {
  validate(priors.sigma2, "sigma2 prior");
  if (!priors.sigma1_2 || !priors.sigma2_2) throw InvalidInput("observation variance priors are unresolved");
  validate(*priors.sigma1_2, "sigma1_2 prior");
  validate(*priors.sigma2_2, "sigma2_2 prior");
  validate(priors.s1_2, "s1_2 prior");
  validate(priors.s2_2, "s2_2 prior");
  validate(priors.l1, "l1 prior");
  validate(priors.l2, "l2 prior");
  require_positive(priors.sigma_g, "sigma_g");
  if (!(priors.beta >= 0.0) || !std::isfinite(priors.beta)) throw InvalidInput("beta must be nonnegative");
}

PriorConfig resolve_priors(PriorConfig priors, const SampledFunction& y1, const SampledFunction& y2) {
  if (!priors.sigma1_2) priors.sigma1_2 = InvGammaPrior{3.0, 0.02 * sample_variance(y1.values())};
  if (!priors.sigma2_2) priors.sigma2_2 = InvGammaPrior{3.0, 0.02 * sample_variance(y2.values())};
  validate(priors);
  return priors;
}

// ---------------------------------------------------------------------------
// GP prior

Eigen::MatrixXd se_kernel(const Grid& grid, double s2, double l) {
  require_positive(s2, "kernel scale");
  require_positive(l, "length scale");
  const Eigen::VectorXd& t = grid.points();
  const Eigen::Index n = t.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = (t[i] - t[j]) / (2.0 * l);
      k(i, j) = s2 * std::exp(-u * u);
    }
    k(i, i) += 1e-8 * s2;
  }
  return k;
}

SeCorrelation::SeCorrelation(const Grid& grid, double l) : l_(l) {
  Eigen::LLT<Eigen::MatrixXd> llt(se_kernel(grid, 1.0, l));
  if (llt.info() != Eigen::Success) throw NumericalError("SE correlation is not positive definite");
  lower_ = llt.matrixL();
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

double SeCorrelation::quad(const Eigen::VectorXd& f) const {
  const Eigen::VectorXd z = lower_.triangularView<Eigen::Lower>().solve(f);
  return z.squaredNorm();
}

double SeCorrelation::log_density(const Eigen::VectorXd& f, double s2) const {
  const auto n = static_cast<double>(f.size());
  return -0.5 * quad(f) / s2 - 0.5 * (log_det_ + n * std::log(s2)) - 0.5 * n * std::log(2.0 * M_PI);
}

GpFit fit_gp(const SampledFunction& y) {
  const Grid& grid = y.grid();
  const Eigen::VectorXd& v = y.values();
  const auto n = static_cast<double>(v.size());
  if (!(v.squaredNorm() > 0.0)) throw InvalidInput("cannot fit a GP to an all-zero signal");
  const Eigen::Index count = v.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(count, count);

  double best = -std::numeric_limits<double>::infinity();
  double best_l = 0.0, best_ratio = 0.0;
  constexpr int kLengths = 16, kRatios = 19;
  // Below a few grid spacings the SE kernel is indistinguishable from white
  // noise and the likelihood happily fits the noise.
  const double l_min = 3.0 * (grid[grid.size() - 1] - grid[0]) / static_cast<double>(grid.size() - 1);
  const double l_max = 0.5;
  for (int i = 0; i < kLengths; ++i) {
    const double l = l_min * std::pow(l_max / l_min, static_cast<double>(i) / (kLengths - 1));
    const Eigen::MatrixXd r = se_kernel(grid, 1.0, l);
    for (int j = 0; j < kRatios; ++j) {
      const double ratio = 1e-5 * std::pow(1e9, static_cast<double>(j) / (kRatios - 1));
      Eigen::LLT<Eigen::MatrixXd> llt(r + ratio * eye);
      if (llt.info() != Eigen::Success) continue;
      const Eigen::MatrixXd lower = llt.matrixL();
      const double quad = lower.triangularView<Eigen::Lower>().solve(v).squaredNorm();
      const double log_det = 2.0 * lower.diagonal().array().log().sum();
      const double s2 = quad / n;
      const double score = -0.5 * n * std::log(s2) - 0.5 * log_det;
      if (score > best) {
        best = score;
        best_l = l;
        best_ratio = ratio;
      }
    }
  }
  if (!std::isfinite(best)) throw NumericalError("GP fit failed on every grid point");

  const Eigen::MatrixXd r = se_kernel(grid, 1.0, best_l);
  Eigen::LLT<Eigen::MatrixXd> llt(r + best_ratio * eye);
  const Eigen::VectorXd alpha = llt.solve(v);
  const double s2 = v.dot(alpha) / n;
  return {s2, best_l, best_ratio * s2, SampledFunction(grid, r * alpha)};
}

// ---------------------------------------------------------------------------
// Registration potential

struct RegistrationPotential::Forward {
  Eigen::VectorXd gamma;
  Eigen::VectorXd warped;
  // Row k: directional derivative of warped along basis element k.
  Eigen::MatrixXd dwarped;
};

RegistrationPotential::RegistrationPotential(std::shared_ptr<const Basis> basis, Srvf q1, Srvf q2, double sigma2,
                                             Interpolation interp)
    : basis_(std::move(basis)),
      q1_(std::move(q1)),
      q2_(std::move(q2)),
      sigma2_(sigma2),
      q2_interp_(q2_.grid(), q2_.values(), interp),
      weights_(numeric::trapz_weights(q1_.grid())) {
  if (!basis_) throw InvalidInput("potential needs a basis");
  if (q1_.grid() != q2_.grid() || q1_.grid() != basis_->grid()) throw InvalidInput("grid mismatch");
  require_positive(sigma2_, "sigma2");
}

RegistrationPotential::Forward RegistrationPotential::forward(const Eigen::VectorXd& c, bool tangents) const {
  if (static_cast<std::size_t>(c.size()) != basis_->dimension())
    throw InvalidInput("coefficient count does not match basis dimension");
  const Grid& grid = basis_->grid();
  const Eigen::MatrixXd& table = basis_->table();
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());

  const Eigen::VectorXd g = table.transpose() * c;
  const double r2 = weights_.dot(g.cwiseAbs2());
  const double r = std::sqrt(r2);
  if (r >= kInjectivityRadius) throw InjectivityError("tangent vector norm beyond the injectivity radius");
  // psi = cos(r) + a g with a = sin(r)/r; b = a'(r)/r.
  double a, b;
  if (r < 1e-4) {
    a = 1.0 - r2 / 6.0 + r2 * r2 / 120.0;
    b = -1.0 / 3.0 + r2 / 30.0;
  } else {
    a = std::sin(r) / r;
    b = (r * std::cos(r) - std::sin(r)) / (r2 * r);
  }
  const Eigen::VectorXd psi = (a * g).array() + std::cos(r);
  const Eigen::VectorXd cum = numeric::cumtrapz(grid, psi.cwiseAbs2());
  const double total = cum[n - 1];
  if (!(total > 0.0)) throw NumericalError("psi has zero mass");

  Forward out;
  out.gamma = cum / total;
  out.gamma[n - 1] = 1.0;
  const Eigen::VectorXd rate = numeric::derivative(grid, out.gamma);
  Eigen::VectorXd root(n), p(n), dp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    root[i] = std::sqrt(std::max(rate[i], 0.0));
    q2_interp_.evaluate(out.gamma[i], p[i], dp[i]);
  }
  out.warped = p.cwiseProduct(root);
  if (!tangents) return out;

  const Eigen::VectorXd ip = table * weights_.cwiseProduct(g);
  const Eigen::VectorXd two_psi = 2.0 * psi;
  out.dwarped.resize(table.rows(), n);
  for (Eigen::Index k = 0; k < table.rows(); ++k) {
    const Eigen::VectorXd dpsi = ((b * ip[k]) * g + a * table.row(k).transpose()).array() - a * ip[k];
    const Eigen::VectorXd dcum = numeric::cumtrapz(grid, two_psi.cwiseProduct(dpsi));
    const Eigen::VectorXd dgamma = (dcum - out.gamma * dcum[n - 1]) / total;
    const Eigen::VectorXd drate = numeric::derivative(grid, dgamma);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double droot = root[i] > 0.0 ? drate[i] / (2.0 * root[i]) : 0.0;
      out.dwarped(k, i) = dp[i] * dgamma[i] * root[i] + p[i] * droot;
    }
  }
  return out;
}

double RegistrationPotential::misfit(const Eigen::VectorXd& c) const {
  const Forward fw = forward(c, false);
  return weights_.dot((q1_.values() - fw.warped).cwiseAbs2());
}

double RegistrationPotential::value(const Eigen::VectorXd& c) const {
  const auto n = static_cast<double>(weights_.size());
  return 0.5 * n * std::log(sigma2_) + misfit(c) / (2.0 * sigma2_);
}

PotentialEval RegistrationPotential::evaluate(const Eigen::VectorXd& c, bool with_gnh) const {
  const Forward fw = forward(c, true);
  const auto n = static_cast<double>(weights_.size());
  const Eigen::VectorXd residual = q1_.values() - fw.warped;
  const Eigen::VectorXd weighted = weights_.cwiseProduct(residual);
  PotentialEval eval;
  eval.value = 0.5 * n * std::log(sigma2_) + residual.dot(weighted) / (2.0 * sigma2_);
  eval.gradient = -(fw.dwarped * weighted) / sigma2_;
  if (with_gnh) {
    eval.gnh = fw.dwarped * weights_.asDiagonal() * fw.dwarped.transpose() / sigma2_;
    eval.gnh = 0.5 * (eval.gnh + eval.gnh.transpose()).eval();
  }
  return eval;
}

Srvf RegistrationPotential::warped(const Eigen::VectorXd& c) const {
  return Srvf(basis_->grid(), forward(c, false).warped);
}

Warping RegistrationPotential::warping(const Eigen::VectorXd& c) const {
  return Warping(basis_->grid(), forward(c, false).gamma);
}

Eigen::VectorXd natural_gradient(const PotentialEval& eval, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& prior_variances, double beta) {
  if (beta == 0.0) return -prior_variances.cwiseProduct(eval.gradient);
  if (eval.gnh.rows() != c.size()) throw InvalidInput("natural gradient with beta > 0 needs the GNH");
  Eigen::MatrixXd system = beta * eval.gnh;
  system.diagonal() += prior_variances.cwiseInverse();
  const Eigen::VectorXd rhs = eval.gradient - beta * (eval.gnh * c);
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("preconditioner is not positive definite");
  return -llt.solve(rhs);
}

namespace {

RegistrationPotential make_potential(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
                                     Interpolation interp) {
  return RegistrationPotential(std::make_shared<const Basis>(c.descriptor), q1, q2, sigma2, interp);
}

}  // namespace

double phi(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2, Interpolation interp) {
  return make_potential(c, q1, q2, sigma2, interp).value(c.v);
}

Eigen::VectorXd grad_phi(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
                         Interpolation interp) {
  return make_potential(c, q1, q2, sigma2, interp).evaluate(c.v, false).gradient;
}

Eigen::MatrixXd gnh(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2, Interpolation interp) {
  return make_potential(c, q1, q2, sigma2, interp).evaluate(c.v, true).gnh;
}

Eigen::VectorXd natural_gradient(const TangentCoeffs& c, const Srvf& q1, const Srvf& q2, double sigma2,
                                 const PriorSpectrum& spectrum, double beta, Interpolation interp) {
  if (!(beta >= 0.0)) throw InvalidInput("beta must be nonnegative");
  const PotentialEval eval = make_potential(c, q1, q2, sigma2, interp).evaluate(c.v, beta > 0.0);
  return natural_gradient(eval, c.v, spectrum.variances(), beta);
}

// ---------------------------------------------------------------------------
// Conditionals

double loglik_level1(const SampledFunction& y, const SampledFunction& f, double sig2) {
  if (y.grid() != f.grid()) throw InvalidInput("grid mismatch");
  require_positive(sig2, "observation variance");
  const auto n = static_cast<double>(y.size());
  const double rss = (y.values() - f.values()).squaredNorm();
  return -0.5 * n * std::log(2.0 * M_PI * sig2) - rss / (2.0 * sig2);
}

InvGammaPrior obs_variance_posterior(const SampledFunction& y, const SampledFunction& f, const InvGammaPrior& prior) {
  if (y.grid() != f.grid()) throw InvalidInput("grid mismatch");
  const double rss = (y.values() - f.values()).squaredNorm();
  return {prior.shape + 0.5 * static_cast<double>(y.size()), prior.scale + 0.5 * rss};
}

double gibbs_obs_variance(const SampledFunction& y, const SampledFunction& f, const InvGammaPrior& prior, Rng& rng) {
  const InvGammaPrior post = obs_variance_posterior(y, f, prior);
  return sample_inv_gamma(post.shape, post.scale, rng);
}

double gibbs_kernel_scale(const SampledFunction& f, const SeCorrelation& corr, const InvGammaPrior& prior, Rng& rng) {
  const double shape = prior.shape + 0.5 * static_cast<double>(f.size());
  return sample_inv_gamma(shape, prior.scale + 0.5 * corr.quad(f.values()), rng);
}

double gibbs_registration_variance(double misfit, std::size_t n, const InvGammaPrior& prior, Rng& rng) {
  return sample_inv_gamma(prior.shape + 0.5 * static_cast<double>(n), prior.scale + 0.5 * misfit, rng);
}

double mh_accept_prob(double log_target_old, double log_target_new) {
  const double d = log_target_new - log_target_old;
  if (!(d == d)) return 0.0;
  return d >= 0.0 ? 1.0 : std::exp(d);
}

double log_f_conditional(int k, const ModelState& state, const SampledFunction& f_k, const SampledFunction& y_k,
                         const SeCorrelation& corr, const ModelContext& ctx) {
  require_k(k);
  const double obs = k == 1 ? state.sigma1_2 : state.sigma2_2;
  const double scale = k == 1 ? state.s1_2 : state.s2_2;
  const RegistrationPotential potential(ctx.basis, to_srvf(k == 1 ? f_k : state.f1), to_srvf(k == 2 ? f_k : state.f2),
                                        state.sigma2, ctx.interp);
  return loglik_level1(y_k, f_k, obs) + corr.log_density(f_k.values(), scale) - potential.value(state.c.v);
}

bool mh_update_f(int k, ModelState& state, const SampledFunction& y_k, const SeCorrelation& corr,
                 const ModelContext& ctx, double rho, Rng& rng) {
  require_k(k);
  if (!(rho >= 0.0)) throw InvalidInput("proposal scale must be nonnegative");
  SampledFunction& current = k == 1 ? state.f1 : state.f2;
  const Eigen::VectorXd z = standard_normal_vector(static_cast<Eigen::Index>(current.size()), rng);
  SampledFunction proposal(current.grid(), current.values() + rho * (corr.lower() * z));
  const double old_target = log_f_conditional(k, state, current, y_k, corr, ctx);
  const double new_target = log_f_conditional(k, state, proposal, y_k, corr, ctx);
  if (!metropolis_accept(new_target - old_target, rng)) return false;
  current = std::move(proposal);
  return true;
}

bool mh_update_lengthscale(int k, ModelState& state, SeCorrelation& corr, const UniformPrior& prior,
                           double proposal_sd, Rng& rng) {
  require_k(k);
  double& l = k == 1 ? state.l1 : state.l2;
  const double s2 = k == 1 ? state.s1_2 : state.s2_2;
  const SampledFunction& f = k == 1 ? state.f1 : state.f2;
  const double candidate = l + proposal_sd * standard_normal(rng);
  if (!prior.contains(candidate)) return false;
  if (corr.lengthscale() != l) corr = SeCorrelation(f.grid(), l);
  SeCorrelation proposed(f.grid(), candidate);
  // Uniform prior: pi(l') / pi(l) = 1 inside the support.
  const double log_ratio = proposed.log_density(f.values(), s2) - corr.log_density(f.values(), s2);
  if (!metropolis_accept(log_ratio, rng)) return false;
  l = candidate;
  corr = std::move(proposed);
  return true;
}

}  // namespace bayeswarp
