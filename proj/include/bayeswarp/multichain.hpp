#pragma once

#include "bayeswarp/fdcore.hpp"
#include "bayeswarp/geom.hpp"
#include "bayeswarp/grid.hpp"
#include "bayeswarp/samplers.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace bayeswarp {

struct MultichainConfig {
  std::size_t chains = 8;
  /// 0 picks default_thread_count().
  unsigned threads = 0;
  ClusterOptions cluster;
  CenterStatistic statistic = CenterStatistic::median;
  /// Pooled draws entering the O(n^2) linkage; the rest join the cluster of
  /// their nearest clustered draw.
  std::size_t cluster_cap = 1500;
  /// Members used for the Karcher descent of each mode. Bands use all members.
  std::size_t center_cap = 2000;

  void validate() const;
};

struct ModeSummary {
  Warping center;
  Warping lower;
  Warping upper;
  Psi center_psi;
  /// ||q1 - (q2, center)||^2; NaN when no SRVFs were supplied.
  double amplitude_distance;
  std::size_t count;
  bool converged;
};

/// Karcher center of `members` and pointwise 2.5%/97.5% quantile bands of
/// their warps (widened to contain the center).
ModeSummary summarize_mode(const std::vector<Psi>& members, CenterStatistic statistic,
                           const KarcherOptions& options = {});
ModeSummary summarize_mode(const std::vector<Psi>& members, CenterStatistic statistic, const Srvf& q1,
                           const Srvf& q2, Interpolation interp = Interpolation::cubic_hermite,
                           const KarcherOptions& options = {});

/// Argmin of amplitude distance; ties go to the larger mode, then the lower index.
std::size_t select_best_mode(const std::vector<ModeSummary>& summaries);

struct ChainFailure {
  std::size_t chain;
  std::string message;
};

struct PooledPosterior {
  /// Sorted by seed, so the pooled order does not depend on input order.
  std::vector<ChainSamples> chains;
  /// One entry per retained draw, chain-major. psi = |exp_map(g)|, the
  /// nonnegative representative of the sampled warp.
  std::vector<Psi> psi;
  std::vector<int> labels;
  std::vector<ModeSummary> modes;
  std::size_t best_mode = 0;
  /// Pointwise posterior medians of f1 and f2 over all pooled draws.
  SampledFunction f1_median;
  SampledFunction f2_median;
  std::vector<ChainFailure> failures;

  std::size_t size() const { return psi.size(); }
};

/// Pools finished chains: clustering, per-mode summaries, best mode.
/// Throws NumericalError when no chain retained a draw.
PooledPosterior pool_chains(std::vector<ChainSamples> chains, const MultichainConfig& mc,
                            Interpolation interp = Interpolation::cubic_hermite);

/// K chains with seeds cfg.seed + k, run concurrently and pooled.
PooledPosterior run_parallel(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg,
                             const MultichainConfig& mc);

/// Pointwise quantile, linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace bayeswarp
