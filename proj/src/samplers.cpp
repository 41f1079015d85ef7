#include "bayeswarp/samplers.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/geom.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace bayeswarp {

std::size_t HmcConfig::steps() const {
  // Absorb roundoff so that T = 0.1, h = 0.01 gives 10 rather than 9.
  return static_cast<std::size_t>(std::floor(T / h + 1e-9));
}

void HmcConfig::validate() const {
  if (!(h > 0.0) || !(T > 0.0) || !std::isfinite(h) || !std::isfinite(T))
    throw InvalidInput("hmc h and T must be positive");
  if (h > T * (1.0 + 1e-12)) throw InvalidInput("hmc h must not exceed T");
  if (!(beta >= 0.0)) throw InvalidInput("beta must be nonnegative");
  if (steps() < 1) throw InvalidInput("hmc needs at least one leapfrog step");
}

HmcContext::HmcContext(const Potential& potential, Eigen::VectorXd prior_variances, double beta)
    : potential_(&potential), variances_(std::move(prior_variances)), beta_(beta) {
  if (static_cast<std::size_t>(variances_.size()) != potential.dimension())
    throw InvalidInput("prior variances do not match potential dimension");
  if ((variances_.array() <= 0.0).any()) throw InvalidInput("prior variances must be positive");
}

Eigen::VectorXd HmcContext::eta(const Eigen::VectorXd& g) const {
  return natural_gradient(potential_->evaluate(g, beta_ > 0.0), g, variances_, beta_);
}

double HmcContext::hamiltonian(const Eigen::VectorXd& g, const Eigen::VectorXd& v) const {
  const Eigen::ArrayXd inv = variances_.array().inverse();
  return potential_->value(g) + 0.5 * (g.array().square() * inv).sum() + 0.5 * (v.array().square() * inv).sum();
}

void flow_xi1(const Eigen::VectorXd& g, Eigen::VectorXd& v, double t, const HmcContext& ctx) {
  if (t == 0.0) return;
  v += (0.5 * t) * ctx.eta(g);
}

void flow_xi2(Eigen::VectorXd& g, Eigen::VectorXd& v, double t) {
  const double c = std::cos(t), s = std::sin(t);
  const Eigen::VectorXd g0 = g;
  g = c * g0 + s * v;
  v = -s * g0 + c * v;
}

void leapfrog(Eigen::VectorXd& g, Eigen::VectorXd& v, const HmcConfig& cfg, const HmcContext& ctx) {
  const std::size_t steps = cfg.steps();
  // The closing kick of one step and the opening kick of the next share eta(g).
  Eigen::VectorXd drift = ctx.eta(g);
  for (std::size_t i = 0; i < steps; ++i) {
    v += (0.5 * cfg.h) * drift;
    flow_xi2(g, v, cfg.h);
    drift = ctx.eta(g);
    v += (0.5 * cfg.h) * drift;
  }
}

bool inf_hmc_update(Eigen::VectorXd& c, const HmcContext& ctx, const HmcConfig& cfg, Rng& rng,
                    double* accept_prob) {
  if (accept_prob) *accept_prob = 0.0;
  const Eigen::VectorXd z = standard_normal_vector(c.size(), rng);
  Eigen::VectorXd v = ctx.prior_variances().cwiseSqrt().cwiseProduct(z);
  Eigen::VectorXd g = c;
  double delta;
  try {
    const double h0 = ctx.hamiltonian(g, v);
    leapfrog(g, v, cfg, ctx);
    delta = ctx.hamiltonian(g, v) - h0;
  } catch (const InjectivityError&) {
    return false;
  }
  if (accept_prob) *accept_prob = std::isnan(delta) ? 0.0 : std::min(1.0, std::exp(-delta));
  if (!metropolis_accept(-delta, rng)) return false;
  c = std::move(g);
  return true;
}

void ZpcnMixture::validate() const {
  if (betas.empty() || betas.size() != weights.size()) throw InvalidInput("zpcn mixture needs matching betas/weights");
  for (double b : betas)
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidInput("zpcn betas must lie in [0, 1]");
  for (double w : weights)
    if (!(w >= 0.0)) throw InvalidInput("zpcn weights must be nonnegative");
  if (!(std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0)) throw InvalidInput("zpcn weights sum to zero");
}

bool zpcn_update(Eigen::VectorXd& c, const Potential& potential, const Eigen::VectorXd& prior_variances,
                 const ZpcnMixture& mixture, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(mixture.weights.begin(), mixture.weights.end());
  const double b = mixture.betas[pick(rng)];
  const Eigen::VectorXd xi = prior_variances.cwiseSqrt().cwiseProduct(standard_normal_vector(c.size(), rng));
  Eigen::VectorXd proposal = std::sqrt(1.0 - b * b) * c + b * xi;
  double log_ratio;
  try {
    log_ratio = potential.value(c) - potential.value(proposal);
  } catch (const InjectivityError&) {
    return false;
  }
  if (!metropolis_accept(log_ratio, rng)) return false;
  c = std::move(proposal);
  return true;
}

GSampler parse_g_sampler(const std::string& name) {
  if (name == "infhmc") return GSampler::infhmc;
  if (name == "zpcn") return GSampler::zpcn;
  throw InvalidInput("unknown g sampler '" + name + "'");
}

std::string to_string(GSampler sampler) { return sampler == GSampler::infhmc ? "infhmc" : "zpcn"; }

void ChainConfig::validate() const {
  if (iterations == 0) throw InvalidInput("iterations must be positive");
  if (burn_in >= iterations) throw InvalidInput("burn_in must be smaller than iterations");
  if (thin < 1) throw InvalidInput("thin must be at least 1");
  hmc.validate();
  zpcn.validate();
  for (double s : {proposals.f1, proposals.f2, proposals.l1, proposals.l2})
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("proposal scales must be nonnegative");
}

namespace {

double clamp_to(const UniformPrior& p, double x) { return std::clamp(x, p.lower, p.upper); }

constexpr double kInitialRadius = 0.5 * 3.14159265358979323846;

}  // namespace

ModelState initial_state(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg,
                         const PriorConfig& resolved, Rng& rng) {
  const GpFit fit1 = fit_gp(y1);
  const GpFit fit2 = fit_gp(y2);
  const double floor = 1e-10 * std::max(1.0, y1.values().squaredNorm());

  BasisDescriptor descriptor{cfg.family, cfg.n_v, y1.grid()};
  Eigen::VectorXd c;
  // Standard-normal start, redrawn until ||g|| = ||c|| < pi/2 (orthonormal
  // basis). Beyond pi/2, psi is mostly negative: the same warps reappear
  // near the cut locus at pi, where the exponential map is so stiff that
  // chains started there never leave.
  do {
    c = standard_normal_vector(static_cast<Eigen::Index>(cfg.n_v), rng);
  } while (c.norm() >= kInitialRadius);

  ModelState state{TangentCoeffs{descriptor, c}, fit1.mean, fit2.mean};
  state.sigma1_2 = std::max(fit1.noise, floor);
  state.sigma2_2 = std::max(fit2.noise, floor);
  state.s1_2 = fit1.s2;
  state.s2_2 = fit2.s2;
  state.l1 = clamp_to(resolved.l1, fit1.l);
  state.l2 = clamp_to(resolved.l2, fit2.l);
  const RegistrationPotential potential(std::make_shared<const Basis>(descriptor), to_srvf(state.f1),
                                        to_srvf(state.f2), 1.0, cfg.interp);
  state.sigma2 = std::max(potential.misfit(c) / static_cast<double>(y1.size()), 1e-8);
  return state;
}

ChainSamples run_chain(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (y1.grid() != y2.grid()) throw InvalidInput("y1 and y2 must share a grid");
  const PriorConfig priors = resolve_priors(cfg.priors, y1, y2);
  const Grid& grid = y1.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());

  ModelContext ctx{std::make_shared<const Basis>(BasisDescriptor{cfg.family, cfg.n_v, grid}), priors, cfg.interp};
  const Eigen::VectorXd variances = prior_spectrum(priors.sigma_g, ctx.basis->descriptor()).variances();
  HmcConfig hmc = cfg.hmc;
  hmc.beta = priors.beta;

  ModelState state = initial_state(y1, y2, cfg, priors, rng);
  SeCorrelation corr1(grid, state.l1);
  SeCorrelation corr2(grid, state.l2);

  const auto kept = static_cast<Eigen::Index>(cfg.retained());
  ChainSamples out;
  out.descriptor = ctx.basis->descriptor();
  out.seed = cfg.seed;
  out.coeffs.resize(kept, static_cast<Eigen::Index>(cfg.n_v));
  out.gamma.resize(kept, n);
  out.f1.resize(kept, n);
  out.f2.resize(kept, n);
  for (Eigen::VectorXd* v : {&out.sigma2, &out.sigma1_2, &out.sigma2_2, &out.s1_2, &out.s2_2, &out.l1, &out.l2, &out.phi})
    v->resize(kept);
  out.accepted.reserve(static_cast<std::size_t>(kept));

  Eigen::Index row = 0;
  try {
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
      std::array<bool, accept_columns> flags{};
      {
        const RegistrationPotential potential(ctx.basis, to_srvf(state.f1), to_srvf(state.f2), state.sigma2,
                                              cfg.interp);
        if (cfg.g_sampler == GSampler::infhmc) {
          const HmcContext hctx(potential, variances, hmc.beta);
          flags[accept_g] = inf_hmc_update(state.c.v, hctx, hmc, rng);
        } else {
          flags[accept_g] = zpcn_update(state.c.v, potential, variances, cfg.zpcn, rng);
        }
      }
      flags[accept_f1] = mh_update_f(1, state, y1, corr1, ctx, cfg.proposals.f1, rng);
      flags[accept_f2] = mh_update_f(2, state, y2, corr2, ctx, cfg.proposals.f2, rng);

      const RegistrationPotential potential(ctx.basis, to_srvf(state.f1), to_srvf(state.f2), 1.0, cfg.interp);
      const double misfit = potential.misfit(state.c.v);
      state.sigma2 = gibbs_registration_variance(misfit, grid.size(), priors.sigma2, rng);
      state.sigma1_2 = gibbs_obs_variance(y1, state.f1, *priors.sigma1_2, rng);
      state.sigma2_2 = gibbs_obs_variance(y2, state.f2, *priors.sigma2_2, rng);
      state.s1_2 = gibbs_kernel_scale(state.f1, corr1, priors.s1_2, rng);
      state.s2_2 = gibbs_kernel_scale(state.f2, corr2, priors.s2_2, rng);

      flags[accept_l1] = mh_update_lengthscale(1, state, corr1, priors.l1, cfg.proposals.l1, rng);
      flags[accept_l2] = mh_update_lengthscale(2, state, corr2, priors.l2, cfg.proposals.l2, rng);

      out.completed_iterations = it + 1;
      if (it < cfg.burn_in) continue;
      for (std::size_t j = 0; j < accept_columns; ++j) out.counters[j].record(flags[j]);
      if ((it - cfg.burn_in + 1) % cfg.thin != 0 || row >= kept) continue;

      out.coeffs.row(row) = state.c.v.transpose();
      out.gamma.row(row) = potential.warping(state.c.v).values().transpose();
      out.f1.row(row) = state.f1.values().transpose();
      out.f2.row(row) = state.f2.values().transpose();
      out.sigma2[row] = state.sigma2;
      out.sigma1_2[row] = state.sigma1_2;
      out.sigma2_2[row] = state.sigma2_2;
      out.s1_2[row] = state.s1_2;
      out.s2_2[row] = state.s2_2;
      out.l1[row] = state.l1;
      out.l2[row] = state.l2;
      out.phi[row] = 0.5 * static_cast<double>(n) * std::log(state.sigma2) + misfit / (2.0 * state.sigma2);
      out.accepted.push_back(flags);
      ++row;
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  if (row < kept) {
    out.coeffs.conservativeResize(row, Eigen::NoChange);
    out.gamma.conservativeResize(row, Eigen::NoChange);
    out.f1.conservativeResize(row, Eigen::NoChange);
    out.f2.conservativeResize(row, Eigen::NoChange);
    for (Eigen::VectorXd* v :
         {&out.sigma2, &out.sigma1_2, &out.sigma2_2, &out.s1_2, &out.s2_2, &out.l1, &out.l2, &out.phi})
      v->conservativeResize(row);
  }
  return out;
}

ChainSamples run_chain(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg) {
  Rng rng(cfg.seed);
  return run_chain(y1, y2, cfg, rng);
}

}  // namespace bayeswarp
