#pragma once

#include "bayeswarp/basis.hpp"
#include "bayeswarp/fdcore.hpp"
#include "bayeswarp/model.hpp"
#include "bayeswarp/potential.hpp"
#include "bayeswarp/random.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayeswarp {

struct HmcConfig {
  double h = 0.01;
  double T = 0.1;
  double beta = 0.0;

  /// floor(T / h), robust to T being a float multiple of h.
  std::size_t steps() const;
  void validate() const;
};

/// Prior-preconditioned drift eta(c) plus the Hamiltonian
/// H(g, v) = Phi(g) + <g, C^{-1} g>/2 + <v, C^{-1} v>/2.
class HmcContext {
 public:
  HmcContext(const Potential& potential, Eigen::VectorXd prior_variances, double beta = 0.0);

  Eigen::VectorXd eta(const Eigen::VectorXd& g) const;
  double hamiltonian(const Eigen::VectorXd& g, const Eigen::VectorXd& v) const;
  const Eigen::VectorXd& prior_variances() const { return variances_; }
  const Potential& potential() const { return *potential_; }

 private:
  const Potential* potential_;
  Eigen::VectorXd variances_;
  double beta_;
};

/// v <- v + (t/2) eta(g).
void flow_xi1(const Eigen::VectorXd& g, Eigen::VectorXd& v, double t, const HmcContext& ctx);
/// (g, v) <- (g cos t + v sin t, -g sin t + v cos t).
void flow_xi2(Eigen::VectorXd& g, Eigen::VectorXd& v, double t);
/// floor(T/h) steps of xi1(h) o xi2(h) o xi1(h), i.e. velocity half-kicks of
/// (h/2) eta around an exact rotation by h.
void leapfrog(Eigen::VectorXd& g, Eigen::VectorXd& v, const HmcConfig& cfg, const HmcContext& ctx);

/// One infinite-dimensional HMC transition on the coefficients, v ~ N(0, C).
/// Injectivity failures along the trajectory reject. Returns the accept flag;
/// `accept_prob` receives min(1, exp(-dH)) (0 on injectivity failure).
bool inf_hmc_update(Eigen::VectorXd& c, const HmcContext& ctx, const HmcConfig& cfg, Rng& rng,
                    double* accept_prob = nullptr);

struct ZpcnMixture {
  std::vector<double> betas{0.02, 0.1, 0.3};
  std::vector<double> weights{1.0, 1.0, 1.0};

  void validate() const;
};

/// Z-mixture pCN: c' = sqrt(1 - b^2) c + b xi, xi ~ N(0, C), b from the mixture.
bool zpcn_update(Eigen::VectorXd& c, const Potential& potential, const Eigen::VectorXd& prior_variances,
                 const ZpcnMixture& mixture, Rng& rng);

enum class GSampler { infhmc, zpcn };

GSampler parse_g_sampler(const std::string& name);
std::string to_string(GSampler sampler);

struct ProposalScales {
  /// f_k proposals are N(f_k, rho^2 R(l_k)).
  double f1 = 0.007;
  double f2 = 0.007;
  /// Random-walk sd for the length scales.
  double l1 = 0.005;
  double l2 = 0.005;
};

struct ChainConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  BasisFamily family = BasisFamily::fourier;
  std::size_t n_v = 10;
  PriorConfig priors;
  HmcConfig hmc;
  GSampler g_sampler = GSampler::infhmc;
  ZpcnMixture zpcn;
  ProposalScales proposals;
  Interpolation interp = Interpolation::cubic_hermite;

  std::size_t retained() const { return iterations > burn_in ? (iterations - burn_in) / thin : 0; }
  void validate() const;
};

struct AcceptCounter {
  std::size_t accepted = 0;
  std::size_t attempted = 0;

  void record(bool ok) {
    ++attempted;
    if (ok) ++accepted;
  }
  double rate() const { return attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted); }
};

enum AcceptColumn : std::size_t { accept_g, accept_f1, accept_f2, accept_l1, accept_l2, accept_columns };

/// Retained draws, one row per kept iteration. Counters cover post-burn-in
/// iterations only.
struct ChainSamples {
  BasisDescriptor descriptor;
  std::uint64_t seed = 0;
  Eigen::MatrixXd coeffs;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd f1;
  Eigen::MatrixXd f2;
  Eigen::VectorXd sigma2, sigma1_2, sigma2_2, s1_2, s2_2, l1, l2;
  /// Phi at the retained state.
  Eigen::VectorXd phi;
  std::vector<std::array<bool, accept_columns>> accepted;
  std::array<AcceptCounter, accept_columns> counters{};
  std::size_t completed_iterations = 0;
  /// Set when the chain stopped early; the rows above are what it kept.
  std::optional<std::string> failure;

  std::size_t retained() const { return static_cast<std::size_t>(coeffs.rows()); }
};

/// GP-smoothed starting functions, hyperparameters within the prior support.
ModelState initial_state(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg,
                         const PriorConfig& resolved, Rng& rng);

/// Metropolis-within-Gibbs sweep: g, f1, f2, Gibbs variances, l1, l2. Errors
/// after initialisation are caught and reported in `failure`.
ChainSamples run_chain(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg, Rng& rng);
ChainSamples run_chain(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg);

}  // namespace bayeswarp
