#include "bayeswarp/study.hpp"

#include "bayeswarp/error.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace bayeswarp {

Warping reference_warp(const SimulatedPair& pair, const DpConfig& dp) {
  return dp_align(to_srvf(pair.f1), to_srvf(pair.f2), dp).gamma;
}

double best_cluster_sse(const PooledPosterior& posterior, const Warping& reference) {
  double best = std::numeric_limits<double>::infinity();
  for (const ModeSummary& m : posterior.modes) best = std::min(best, sse(m.center, reference));
  return best;
}

std::uint64_t replicate_chain_seed(std::uint64_t seed, std::size_t r) { return seed + 100000 + 100 * r; }

ReplicateResult run_replicate(const RunConfig& cfg, std::size_t r) {
  const std::uint64_t sim_seed = cfg.chain.seed + r;
  const SimulatedPair pair = simulate_pair(cfg.sim, sim_seed);
  const Warping reference = reference_warp(pair, cfg.dp);

  ChainConfig chain = cfg.chain;
  chain.iterations = cfg.study.iterations;
  chain.burn_in = cfg.study.burn_in;
  chain.seed = replicate_chain_seed(cfg.chain.seed, r);
  MultichainConfig multi = cfg.multi;
  multi.chains = cfg.study.chains;
  const PooledPosterior posterior = run_parallel(pair.y1, pair.y2, chain, multi);

  ReplicateResult out;
  out.seed = sim_seed;
  out.bayes = best_cluster_sse(posterior, reference);
  out.dp_y = sse(dp_align(to_srvf(pair.y1), to_srvf(pair.y2), cfg.dp).gamma, reference);
  out.dp_f = sse(dp_align(to_srvf(smooth_for_dp(pair.y1)), to_srvf(smooth_for_dp(pair.y2)), cfg.dp).gamma, reference);
  out.modes = posterior.modes.size();
  out.failed_chains = posterior.failures.size();
  return out;
}

std::vector<ReplicateResult> replicate_study(const RunConfig& cfg,
                                             const std::function<void(const ReplicateResult&)>& progress) {
  cfg.validate();
  std::vector<ReplicateResult> out;
  for (std::size_t r = 0; r < cfg.study.replicates; ++r) {
    out.push_back(run_replicate(cfg, r));
    if (progress) progress(out.back());
  }
  return out;
}

void write_study(const std::string& path, const std::vector<ReplicateResult>& results) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  std::fprintf(f, "replicate,seed,bayes,dp_y,dp_f,modes\n");
  for (std::size_t r = 0; r < results.size(); ++r) {
    const ReplicateResult& x = results[r];
    std::fprintf(f, "%zu,%llu,%.17g,%.17g,%.17g,%zu\n", r, static_cast<unsigned long long>(x.seed), x.bayes, x.dp_y,
                 x.dp_f, x.modes);
  }
  if (std::fclose(f) != 0) throw InvalidInput("failed writing '" + path + "'");
}

}  // namespace bayeswarp
