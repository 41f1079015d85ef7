#include "bayeswarp/multichain.hpp"

#include "bayeswarp/basis.hpp"
#include "bayeswarp/error.hpp"
#include "bayeswarp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace bayeswarp {

void MultichainConfig::validate() const {
  if (chains < 1) throw InvalidInput("need at least one chain");
  if (cluster.k_max < 1) throw InvalidInput("k_max must be at least 1");
  if (!(cluster.tau >= 0.0)) throw InvalidInput("tau must be nonnegative");
  if (cluster_cap < 2) throw InvalidInput("cluster_cap must be at least 2");
  if (center_cap < 1) throw InvalidInput("center_cap must be at least 1");
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidInput("quantile of an empty set");
  const double h = static_cast<double>(values.size() - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

namespace {

// Center from `center_members`, bands from `gammas` (one warp per row).
ModeSummary summarize(const std::vector<Psi>& center_members, const Eigen::MatrixXd& gammas, std::size_t count,
                      CenterStatistic statistic, const Srvf* q1, const Srvf* q2, Interpolation interp,
                      const KarcherOptions& options) {
  const KarcherResult karcher = karcher_center(center_members, statistic, options);
  const Grid& grid = karcher.center.grid();
  Warping center = psi_to_gamma(karcher.center);
  const Eigen::Index n = gammas.cols();

  Eigen::VectorXd lower(n), upper(n);
  std::vector<double> column(static_cast<std::size_t>(gammas.rows()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index r = 0; r < gammas.rows(); ++r) column[static_cast<std::size_t>(r)] = gammas(r, i);
    lower[i] = std::min(quantile(column, 0.025), center.values()[i]);
    upper[i] = std::max(quantile(column, 0.975), center.values()[i]);
  }
  lower[0] = upper[0] = 0.0;
  lower[n - 1] = upper[n - 1] = 1.0;

  double amplitude = std::numeric_limits<double>::quiet_NaN();
  if (q1 && q2) {
    const double d = l2_dist(*q1, warp_srvf(*q2, center, interp));
    amplitude = d * d;
  }
  return ModeSummary{std::move(center),
                     Warping(grid, std::move(lower)),
                     Warping(grid, std::move(upper)),
                     karcher.center,
                     amplitude,
                     count,
                     karcher.converged};
}

Eigen::MatrixXd gammas_of(const std::vector<Psi>& members) {
  if (members.empty()) throw InvalidInput("summarize_mode needs a nonempty cluster");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(members.size()), members.front().values().size());
  for (std::size_t r = 0; r < members.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = psi_to_gamma(members[r]).values().transpose();
  return out;
}

std::vector<std::size_t> stride_pick(std::size_t n, std::size_t cap) {
  const std::size_t stride = n <= cap ? 1 : (n + cap - 1) / cap;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; i += stride) out.push_back(i);
  return out;
}

Eigen::VectorXd pointwise_median(const std::vector<const ChainSamples*>& chains, Eigen::MatrixXd ChainSamples::*field,
                                 Eigen::Index n) {
  Eigen::VectorXd out(n);
  std::vector<double> column;
  for (Eigen::Index i = 0; i < n; ++i) {
    column.clear();
    for (const ChainSamples* c : chains) {
      const Eigen::MatrixXd& m = c->*field;
      for (Eigen::Index r = 0; r < m.rows(); ++r) column.push_back(m(r, i));
    }
    out[i] = quantile(column, 0.5);
  }
  return out;
}

}  // namespace

ModeSummary summarize_mode(const std::vector<Psi>& members, CenterStatistic statistic,
                           const KarcherOptions& options) {
  return summarize(members, gammas_of(members), members.size(), statistic, nullptr, nullptr,
                   Interpolation::cubic_hermite, options);
}

ModeSummary summarize_mode(const std::vector<Psi>& members, CenterStatistic statistic, const Srvf& q1,
                           const Srvf& q2, Interpolation interp, const KarcherOptions& options) {
  return summarize(members, gammas_of(members), members.size(), statistic, &q1, &q2, interp, options);
}

std::size_t select_best_mode(const std::vector<ModeSummary>& summaries) {
  if (summaries.empty()) throw InvalidInput("select_best_mode needs at least one mode");
  std::size_t best = 0;
  for (std::size_t i = 1; i < summaries.size(); ++i) {
    const ModeSummary& a = summaries[i];
    const ModeSummary& b = summaries[best];
    if (a.amplitude_distance < b.amplitude_distance ||
        (a.amplitude_distance == b.amplitude_distance && a.count > b.count))
      best = i;
  }
  return best;
}

PooledPosterior pool_chains(std::vector<ChainSamples> chains, const MultichainConfig& mc, Interpolation interp) {
  mc.validate();
  std::stable_sort(chains.begin(), chains.end(),
                   [](const ChainSamples& a, const ChainSamples& b) { return a.seed < b.seed; });

  std::vector<ChainFailure> failures;
  std::vector<const ChainSamples*> live;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    if (chains[k].failure) failures.push_back({k, *chains[k].failure});
    if (chains[k].retained() > 0) live.push_back(&chains[k]);
  }
  if (live.empty()) {
    std::string msg = "no chain produced samples";
    if (!failures.empty()) msg += ": " + failures.front().message;
    throw NumericalError(msg);
  }

  const Basis basis(live.front()->descriptor);
  const Grid& grid = basis.grid();
  const Eigen::Index n_grid = static_cast<Eigen::Index>(grid.size());

  // Pooled draws, chain-major, plus a chain-local stride subsample for linkage.
  std::vector<Psi> psi;
  std::vector<std::size_t> subset;
  std::size_t total = 0;
  for (const ChainSamples* c : live) total += c->retained();
  const std::size_t stride = total <= mc.cluster_cap ? 1 : (total + mc.cluster_cap - 1) / mc.cluster_cap;
  psi.reserve(total);
  Eigen::MatrixXd all_gammas(static_cast<Eigen::Index>(total), n_grid);
  for (const ChainSamples* c : live) {
    for (Eigen::Index r = 0; r < c->coeffs.rows(); ++r) {
      const TangentFunction g = coeffs_to_function(basis, c->coeffs.row(r).transpose());
      if (static_cast<std::size_t>(r) % stride == 0) subset.push_back(psi.size());
      all_gammas.row(static_cast<Eigen::Index>(psi.size())) = c->gamma.row(r);
      psi.emplace_back(grid, exp_map(g).values().cwiseAbs());
    }
  }

  std::vector<Psi> subset_psi;
  subset_psi.reserve(subset.size());
  for (std::size_t i : subset) subset_psi.push_back(psi[i]);
  ClusterOptions cluster = mc.cluster;
  const std::vector<int> subset_labels = cluster_modes(subset_psi, cluster);

  // Remaining draws join their nearest clustered draw (largest inner product).
  std::vector<int> labels(total, -1);
  for (std::size_t j = 0; j < subset.size(); ++j) labels[subset[j]] = subset_labels[j];
  const Eigen::VectorXd w = numeric::trapz_weights(grid);
  Eigen::MatrixXd anchors(static_cast<Eigen::Index>(subset.size()), n_grid);
  for (std::size_t j = 0; j < subset.size(); ++j)
    anchors.row(static_cast<Eigen::Index>(j)) = subset_psi[j].values().cwiseProduct(w).transpose();
  constexpr std::size_t kBlock = 2048;
  for (std::size_t start = 0; start < total; start += kBlock) {
    const std::size_t end = std::min(total, start + kBlock);
    Eigen::MatrixXd block(static_cast<Eigen::Index>(end - start), n_grid);
    for (std::size_t i = start; i < end; ++i) block.row(static_cast<Eigen::Index>(i - start)) = psi[i].values().transpose();
    const Eigen::MatrixXd sims = block * anchors.transpose();
    for (std::size_t i = start; i < end; ++i) {
      if (labels[i] >= 0) continue;
      Eigen::Index arg = 0;
      sims.row(static_cast<Eigen::Index>(i - start)).maxCoeff(&arg);
      labels[i] = subset_labels[static_cast<std::size_t>(arg)];
    }
  }

  SampledFunction f1_median(grid, pointwise_median(live, &ChainSamples::f1, n_grid));
  SampledFunction f2_median(grid, pointwise_median(live, &ChainSamples::f2, n_grid));
  const Srvf q1 = to_srvf(f1_median);
  const Srvf q2 = to_srvf(f2_median);

  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<ModeSummary> modes;
  for (int label = 0; label < k; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < total; ++i)
      if (labels[i] == label) members.push_back(i);
    std::vector<Psi> center_members;
    for (std::size_t j : stride_pick(members.size(), mc.center_cap)) center_members.push_back(psi[members[j]]);
    Eigen::MatrixXd gammas(static_cast<Eigen::Index>(members.size()), n_grid);
    for (std::size_t j = 0; j < members.size(); ++j)
      gammas.row(static_cast<Eigen::Index>(j)) = all_gammas.row(static_cast<Eigen::Index>(members[j]));
    modes.push_back(summarize(center_members, gammas, members.size(), mc.statistic, &q1, &q2, interp, {}));
  }
  const std::size_t best = select_best_mode(modes);

  return PooledPosterior{std::move(chains),   std::move(psi),        std::move(labels),
                         std::move(modes),    best,                  std::move(f1_median),
                         std::move(f2_median), std::move(failures)};
}

PooledPosterior run_parallel(const SampledFunction& y1, const SampledFunction& y2, const ChainConfig& cfg,
                             const MultichainConfig& mc) {
  mc.validate();
  cfg.validate();
  if (y1.grid() != y2.grid()) throw InvalidInput("y1 and y2 must share a grid");
  resolve_priors(cfg.priors, y1, y2);
  BasisDescriptor descriptor{cfg.family, cfg.n_v, y1.grid()};
  eval_basis(descriptor);

  std::vector<std::optional<ChainSamples>> results(mc.chains);
  parallel_for(mc.chains, mc.threads, [&](std::size_t k) {
    ChainConfig local = cfg;
    local.seed = cfg.seed + k;
    try {
      results[k] = run_chain(y1, y2, local);
    } catch (const std::exception& e) {
      ChainSamples failed;
      failed.descriptor = descriptor;
      failed.seed = local.seed;
      failed.failure = e.what();
      results[k] = std::move(failed);
    }
  });
  std::vector<ChainSamples> chains;
  chains.reserve(results.size());
  for (auto& r : results) chains.push_back(std::move(*r));
  return pool_chains(std::move(chains), mc, cfg.interp);
}

}  // namespace bayeswarp
