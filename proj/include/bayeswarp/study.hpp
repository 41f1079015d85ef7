#pragma once

#include "bayeswarp/config.hpp"
#include "bayeswarp/dpalign.hpp"
#include "bayeswarp/io.hpp"
#include "bayeswarp/multichain.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bayeswarp {

/// The warp the methods are scored against: DP on the noise-free pair.
Warping reference_warp(const SimulatedPair& pair, const DpConfig& dp = {});

/// Smallest SSE between any mode center and `reference`.
double best_cluster_sse(const PooledPosterior& posterior, const Warping& reference);

struct ReplicateResult {
  std::uint64_t seed = 0;
  double bayes = 0.0;
  double dp_y = 0.0;
  double dp_f = 0.0;
  std::size_t modes = 0;
  std::size_t failed_chains = 0;
};

/// Chain seeds for replicate r start here; simulation seeds are seed + r.
std::uint64_t replicate_chain_seed(std::uint64_t seed, std::size_t r);

/// One simulated replicate scored by the Bayesian pipeline, DP on the noisy
/// data and DP on GP-smoothed data.
ReplicateResult run_replicate(const RunConfig& cfg, std::size_t r);

std::vector<ReplicateResult> replicate_study(const RunConfig& cfg,
                                             const std::function<void(const ReplicateResult&)>& progress = {});

/// CSV with columns replicate,seed,bayes,dp_y,dp_f,modes.
void write_study(const std::string& path, const std::vector<ReplicateResult>& results);

}  // namespace bayeswarp
