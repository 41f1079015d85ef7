// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include "bayeswarp/cli.hpp"
#include "bayeswarp/dpalign.hpp"
#include "bayeswarp/geom.hpp"
#include "bayeswarp/io.hpp"
#include "bayeswarp/model.hpp"
#include "bayeswarp/multichain.hpp"
#include "bayeswarp/samplers.hpp"
#include "bayeswarp/study.hpp"

#include "oracles.hpp"
#include "potentials.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace bayeswarp;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr std::uint64_t kSimSeed = 7;
constexpr std::uint64_t kChainSeed = 11;
constexpr double kBandCoverage = 0.90;
constexpr std::size_t kMinClusters = 2;
constexpr double kGradTol = 1e-4;
constexpr int kGradStates = 100;
constexpr double kRoundtripTol = 1e-9;
constexpr double kHalving = 0.5;
constexpr int kIsometryTrials = 100;
constexpr int kDpTrials = 20;
constexpr double kKsTol = 0.02;
constexpr int kDraws = 100000;
constexpr double kVarianceTol = 0.05;
constexpr double kAcceptLow = 0.2, kAcceptHigh = 0.4;
constexpr double kDpfFactor = 2.0;
constexpr std::size_t kCompareChains = 8, kCompareIterations = 5000, kCompareBurnIn = 1250;

struct Outcome {
  bool pass;
  std::vector<std::string> details;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double band_coverage(const ModeSummary& m, const Warping& path) {
  const Eigen::VectorXd& p = path.values();
  int inside = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    inside += p[i] >= m.lower.values()[i] - 1e-12 && p[i] <= m.upper.values()[i] + 1e-12;
  return static_cast<double>(inside) / static_cast<double>(p.size());
}

double best_coverage(const PooledPosterior& post, const Warping& path) {
  double best = 0.0;
  for (const ModeSummary& m : post.modes) best = std::max(best, band_coverage(m, path));
  return best;
}

// Criteria 1 and 7c share the full-length run.
struct FullRun {
  SimulatedPair pair;
  PooledPosterior posterior;
};

FullRun full_run() {
  SimulatedPair pair = simulate_pair({}, kSimSeed);
  ChainConfig cfg;
  cfg.seed = kChainSeed;
  MultichainConfig mc;
  PooledPosterior posterior = run_parallel(pair.y1, pair.y2, cfg, mc);
  return {std::move(pair), std::move(posterior)};
}

Outcome criterion1(const FullRun& run) {
  const PooledPosterior& post = run.posterior;
  const DpResult dp_y = dp_align(to_srvf(run.pair.y1), to_srvf(run.pair.y2));
  const double cover = best_coverage(post, dp_y.gamma);
  Outcome o{post.modes.size() >= kMinClusters && cover >= kBandCoverage, {}};
  o.details.push_back(fmt("clusters %zu (need >= %zu), pooled draws %zu, failed chains %zu", post.modes.size(),
                          kMinClusters, post.size(), post.failures.size()));
  for (std::size_t m = 0; m < post.modes.size(); ++m)
    o.details.push_back(fmt("mode %zu: count %zu, amplitude %.4g, DP(y) band coverage %.3f", m, post.modes[m].count,
                            post.modes[m].amplitude_distance, band_coverage(post.modes[m], dp_y.gamma)));
  o.details.push_back(fmt("best DP(y) coverage %.3f (need >= %.2f)", cover, kBandCoverage));
  const DpResult dp_s = dp_align(to_srvf(smooth_for_dp(run.pair.y1)), to_srvf(smooth_for_dp(run.pair.y2)));
  const DpResult dp_f = dp_align(to_srvf(run.pair.f1), to_srvf(run.pair.f2));
  o.details.push_back(fmt("info: coverage of DP(smoothed) %.3f, of DP(noise-free) %.3f", best_coverage(post, dp_s.gamma),
                          best_coverage(post, dp_f.gamma)));
  return o;
}

Outcome criterion2() {
  RunConfig cfg;
  cfg.chain.seed = 1;
  std::vector<double> bayes, dp_y, dp_f;
  for (std::size_t r = 0; r < cfg.study.replicates; ++r) {
    const ReplicateResult res = run_replicate(cfg, r);
    bayes.push_back(res.bayes);
    dp_y.push_back(res.dp_y);
    dp_f.push_back(res.dp_f);
  }
  const double mb = median(bayes), my = median(dp_y), mf = median(dp_f);
  Outcome o{mb <= my && mb <= kDpfFactor * mf, {}};
  o.details.push_back(fmt("%zu replicates, %zu chains x %zu iterations (%zu burn-in)", cfg.study.replicates,
                          cfg.study.chains, cfg.study.iterations, cfg.study.burn_in));
  o.details.push_back(fmt("median SSE: bayes %.4g, DP(y) %.4g, DP(f) %.4g", mb, my, mf));
  o.details.push_back(fmt("need bayes <= DP(y) and bayes <= %.1f x DP(f)", kDpfFactor));
  return o;
}

Outcome criterion3() {
  Outcome o{true, {}};
  const Grid grid = Grid::uniform(101);
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> radius(0.05, 1.0);
  for (BasisFamily family : {BasisFamily::fourier, BasisFamily::legendre}) {
    const auto basis = std::make_shared<const Basis>(BasisDescriptor{family, 10, grid});
    double worst = 0.0;
    for (int s = 0; s < kGradStates; ++s) {
      const Srvf q1(grid, oracle::random_smooth(grid.points(), rng));
      const Srvf q2(grid, oracle::random_smooth(grid.points(), rng));
      const RegistrationPotential pot(basis, q1, q2, 0.05);
      std::normal_distribution<double> z;
      Eigen::VectorXd c(10);
      for (Eigen::Index k = 0; k < 10; ++k) c[k] = z(rng);
      c *= radius(rng) / c.norm();
      const Eigen::VectorXd grad = pot.evaluate(c, false).gradient;
      Eigen::VectorXd fd(10);
      constexpr double step = 1e-6;
      for (Eigen::Index k = 0; k < 10; ++k) {
        Eigen::VectorXd up = c, down = c;
        up[k] += step;
        down[k] -= step;
        fd[k] = (pot.value(up) - pot.value(down)) / (2.0 * step);
      }
      worst = std::max(worst, (fd - grad).norm() / std::max(grad.norm(), 1e-300));
    }
    o.pass = o.pass && worst < kGradTol;
    o.details.push_back(fmt("%s: worst relative error %.3g over %d states (need < %.0e)", to_string(family).c_str(),
                            worst, kGradStates, kGradTol));
  }
  return o;
}

Outcome criterion4() {
  Outcome o{true, {}};
  const Grid grid = Grid::uniform(101);
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd g = oracle::random_smooth(grid.points(), rng);
    g.array() -= oracle::trapz(grid.points(), g);
    const double norm = std::sqrt(oracle::trapz(grid.points(), g.cwiseAbs2()));
    g *= std::uniform_real_distribution<double>(0.01, 2.5)(rng) / norm;
    const TangentFunction tg(grid, g);
    const Psi psi = exp_map(tg);
    worst = std::max(worst, (inv_exp_map(psi).values() - g).cwiseAbs().maxCoeff());
    worst = std::max(worst, (exp_map(inv_exp_map(psi)).values() - psi.values()).cwiseAbs().maxCoeff());
  }
  o.pass = worst < kRoundtripTol;
  o.details.push_back(fmt("exp/inv_exp worst roundtrip error %.3g over 100 tangent vectors (need < %.0e)", worst,
                          kRoundtripTol));

  // C1 warps: gamma -> psi -> gamma error at N and 2N-1. Quadratic warps are
  // reproduced to roundoff at every N, so they carry no rate and are left out.
  const std::vector<std::function<double(double)>> warps{
      [](double t) { return 0.5 * (t + t * t * t); },
      [](double t) { return (std::exp(3.0 * t) - 1.0) / (std::exp(3.0) - 1.0); },
      [](double t) { return t + 0.1 * std::sin(2.0 * oracle::pi * t); },
      [](double t) { return (std::exp(2.0 * t) - 1.0) / (std::exp(2.0) - 1.0); }};
  for (std::size_t w = 0; w < warps.size(); ++w) {
    std::vector<double> errors;
    for (std::size_t n : {51, 101, 201, 401}) {
      const Grid gr = Grid::uniform(n);
      Eigen::VectorXd v(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = warps[w](gr[i]);
      const Warping gam(gr, v);
      errors.push_back((psi_to_gamma(gamma_to_psi(gam)).values() - v).cwiseAbs().maxCoeff());
    }
    bool halves = true;
    std::string ratios;
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double ratio = errors[i] / errors[i - 1];
      halves = halves && ratio <= kHalving;
      ratios += fmt(" %.3f", ratio);
    }
    o.pass = o.pass && halves;
    o.details.push_back(fmt("warp %zu: gamma/psi errors %.3g .. %.3g, refinement ratios%s (need <= %.1f)", w,
                            errors.front(), errors.back(), ratios.c_str(), kHalving));
  }
  return o;
}

Outcome criterion5() {
  const Grid grid = Grid::uniform(101);
  const double bound = 5.0 / 101.0;
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < kIsometryTrials; ++trial) {
    const Srvf q1(grid, oracle::random_smooth(grid.points(), rng));
    const Srvf q2(grid, oracle::random_smooth(grid.points(), rng));
    const Warping gam(grid, oracle::random_warp(grid.points(), rng));
    const double gap = std::abs(l2_dist(warp_srvf(q1, gam), warp_srvf(q2, gam)) - l2_dist(q1, q2));
    worst = std::max(worst, gap);
  }
  return {worst <= bound, {fmt("worst |d(q1 gamma, q2 gamma) - d(q1, q2)| = %.4g over %d trials (bound 5/N = %.4g)",
                               worst, kIsometryTrials, bound)}};
}

Outcome criterion6() {
  const Grid grid = Grid::uniform(101);
  std::mt19937_64 rng(606);
  int equal = 0;
  DpConfig cfg;
  cfg.lattice = 5;
  for (int trial = 0; trial < kDpTrials; ++trial) {
    const Srvf q1(grid, oracle::random_smooth(grid.points(), rng));
    const Srvf q2(grid, oracle::random_smooth(grid.points(), rng));
    equal += dp_align(q1, q2, cfg).cost == exhaustive_align(q1, q2, 5).cost;
  }
  return {equal == kDpTrials, {fmt("dp cost == exhaustive cost on %d of %d trials at M = 5", equal, kDpTrials)}};
}

Outcome criterion7(const FullRun& run) {
  Outcome o{true, {}};
  const BasisDescriptor desc{BasisFamily::fourier, 10, Grid::uniform(101)};
  const Eigen::VectorXd variances = prior_spectrum(1.0, desc).variances();

  // (a) Data term off: the flow is an exact rotation, so a quarter turn per
  // transition gives independent prior draws.
  {
    const testing::Constant flat(10);
    const HmcContext ctx(flat, variances);
    const HmcConfig cfg{oracle::pi / 20.0, oracle::pi / 2.0, 0.0};
    Rng rng(701);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(10);
    std::vector<std::vector<double>> cols(10);
    for (int i = 0; i < kDraws; ++i) {
      inf_hmc_update(c, ctx, cfg, rng);
      for (int k = 0; k < 10; ++k) cols[static_cast<std::size_t>(k)].push_back(c[k]);
    }
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double sd = std::sqrt(variances[k]);
      worst = std::max(worst, oracle::ks_statistic(cols[static_cast<std::size_t>(k)],
                                                   [sd](double x) { return oracle::normal_cdf(x, sd); }));
    }
    const bool pass = worst < kKsTol;
    o.pass = o.pass && pass;
    o.details.push_back(fmt("(a) %s prior marginals: worst KS %.4f over 10 coefficients, %d draws (need < %.2f)",
                            pass ? "PASS" : "FAIL", worst, kDraws, kKsTol));
  }

  // (b) Gaussian likelihood on every coefficient: analytic posterior variance
  // 1 / (1/lambda^2 + p).
  {
    Eigen::VectorXd precision(10), mean(10);
    for (int k = 0; k < 10; ++k) {
      precision[k] = 0.5 + k;
      mean[k] = 0.3 * std::sin(1.0 + k);
    }
    const testing::Quadratic quad(mean, precision);
    const Eigen::VectorXd post_var = (variances.cwiseInverse() + precision).cwiseInverse();
    const HmcContext ctx(quad, variances);
    const HmcConfig cfg{0.1, 1.5, 0.0};
    Rng rng(702);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(10);
    std::vector<std::vector<double>> cols(10);
    for (int i = 0; i < kDraws; ++i) {
      inf_hmc_update(c, ctx, cfg, rng);
      for (int k = 0; k < 10; ++k) cols[static_cast<std::size_t>(k)].push_back(c[k]);
    }
    double worst = 0.0;
    for (int k = 0; k < 10; ++k)
      worst = std::max(worst, std::abs(oracle::variance(cols[static_cast<std::size_t>(k)]) / post_var[k] - 1.0));
    const bool pass = worst < kVarianceTol;
    o.pass = o.pass && pass;
    o.details.push_back(fmt("(b) %s conjugate gaussian: worst relative variance error %.4f over 10 coefficients (need < %.2f)",
                            pass ? "PASS" : "FAIL", worst, kVarianceTol));
  }

  // (c) Per-chain g acceptance on the full-length run.
  {
    bool pass = !run.posterior.chains.empty();
    std::string rates;
    double pooled_acc = 0.0, pooled_att = 0.0;
    for (const ChainSamples& c : run.posterior.chains) {
      const double rate = c.counters[accept_g].rate();
      pass = pass && rate > kAcceptLow && rate < kAcceptHigh;
      rates += fmt(" %.3f", rate);
      pooled_acc += static_cast<double>(c.counters[accept_g].accepted);
      pooled_att += static_cast<double>(c.counters[accept_g].attempted);
    }
    o.pass = o.pass && pass;
    o.details.push_back(fmt("(c) %s g acceptance per chain:%s; pooled %.3f (need every chain in (%.1f, %.1f))",
                            pass ? "PASS" : "FAIL", rates.c_str(), pooled_acc / std::max(pooled_att, 1.0), kAcceptLow,
                            kAcceptHigh));
  }
  return o;
}

Outcome criterion8() {
  const SimulatedPair pair = simulate_pair({}, kSimSeed);
  const Warping reference = reference_warp(pair);
  MultichainConfig mc;
  mc.chains = kCompareChains;
  struct Arm {
    std::size_t modes;
    double sse;
  };
  auto arm = [&](GSampler sampler) {
    ChainConfig cfg;
    cfg.iterations = kCompareIterations;
    cfg.burn_in = kCompareBurnIn;
    cfg.seed = kChainSeed;
    cfg.g_sampler = sampler;
    const PooledPosterior post = run_parallel(pair.y1, pair.y2, cfg, mc);
    return Arm{post.modes.size(), sse(post.modes[post.best_mode].center, reference)};
  };
  const Arm hmc = arm(GSampler::infhmc);
  const Arm pcn = arm(GSampler::zpcn);
  return {hmc.modes >= pcn.modes && hmc.sse <= pcn.sse,
          {fmt("%zu chains x %zu iterations (%zu burn-in) each", kCompareChains, kCompareIterations, kCompareBurnIn),
           fmt("inf-hmc: %zu clusters, best-mode SSE %.4g", hmc.modes, hmc.sse),
           fmt("zpcn:    %zu clusters, best-mode SSE %.4g", pcn.modes, pcn.sse),
           "need inf-hmc clusters >= zpcn clusters and inf-hmc SSE <= zpcn SSE"}};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion9() {
  const fs::path dir = fs::temp_directory_path() / "bayeswarp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "bayeswarp");
    return cli_main(args, sink, sink);
  };
  if (cli({"simulate", "--seed", std::to_string(kSimSeed), "--outdir", dir.string()}) != 0)
    return {false, {"simulate failed"}};
  for (const char* name : {"a", "b"}) {
    const int rc = cli({"align-bayes", "--input", (dir / "pair.csv").string(), "--outdir", (dir / name).string(),
                        "--seed", std::to_string(kChainSeed), "--iterations", "1000", "--burn-in", "250"});
    if (rc != 0) return {false, {fmt("align-bayes exited with %d", rc)}};
  }
  std::size_t files = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const std::string name = entry.path().filename().string();
    if (name == "timings.json") continue;
    ++files;
    identical += fs::exists(dir / "b" / name) && slurp(entry.path()) == slurp(dir / "b" / name);
  }
  return {files > 0 && identical == files,
          {fmt("%zu of %zu report files byte-identical across two runs (8 chains x 1000 iterations; timings.json excluded)",
               identical, files)}};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failures = 0;
  auto report = [&](int id, const std::string& title, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << "\n";
    for (const std::string& d : o.details) std::cout << "    " << d << "\n";
    std::cout.flush();
    failures += !o.pass;
  };

  const FullRun run = full_run();
  report(1, "multimodal recovery", criterion1(run));
  report(2, "SSE ordering over replicates", criterion2());
  report(3, "gradient correctness", criterion3());
  report(4, "geometry roundtrips", criterion4());
  report(5, "discrete isometry", criterion5());
  report(6, "DP optimality", criterion6());
  report(7, "sampler validity", criterion7(run));
  report(8, "inf-hmc vs zpcn mode coverage", criterion8());
  report(9, "determinism", criterion9());

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (9 - failures) << " of 9 criteria passed in " << fmt("%.0f", secs) << " s\n";
  return failures == 0 ? 0 : 1;
}
