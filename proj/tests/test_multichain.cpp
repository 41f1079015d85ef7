#include "bayeswarp/error.hpp"
#include "bayeswarp/multichain.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace bayeswarp;

namespace {

ModeSummary fake_mode(double amplitude, std::size_t count) {
  const Grid grid = Grid::uniform(5);
  const Warping id = identity_warping(grid);
  return ModeSummary{id, id, id, gamma_to_psi(id), amplitude, count, true};
}

std::vector<ModeSummary> fake_modes(const std::vector<double>& amplitudes, const std::vector<std::size_t>& counts) {
  std::vector<ModeSummary> out;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) out.push_back(fake_mode(amplitudes[i], counts[i]));
  return out;
}

std::pair<SampledFunction, SampledFunction> shifted_bumps(const Grid& grid) {
  const Eigen::ArrayXd t = grid.points().array();
  const Eigen::VectorXd a = (-(t - 0.4).square() / 0.02).exp().matrix();
  const Eigen::VectorXd b = (-(t - 0.55).square() / 0.02).exp().matrix();
  return {SampledFunction(grid, a), SampledFunction(grid, b)};
}

std::vector<ChainSamples> small_chains(std::size_t k) {
  const Grid grid = Grid::uniform(51);
  const auto [y1, y2] = shifted_bumps(grid);
  std::vector<ChainSamples> out;
  for (std::size_t i = 0; i < k; ++i) {
    ChainConfig cfg;
    cfg.iterations = 200;
    cfg.burn_in = 50;
    cfg.seed = 10 + i;
    out.push_back(run_chain(y1, y2, cfg));
  }
  return out;
}

std::set<std::vector<std::size_t>> membership(const PooledPosterior& p) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < p.labels.size(); ++i) groups[p.labels[i]].push_back(i);
  std::set<std::vector<std::size_t>> out;
  for (auto& [label, members] : groups) out.insert(members);
  return out;
}

}  // namespace

TEST_SUITE("multichain") {
  TEST_CASE("quantile") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile({1.0, 2.0}, 1.0) == 2.0);
    CHECK(quantile({0.0, 10.0}, 0.25) == 2.5);
    CHECK(quantile({7.0}, 0.3) == 7.0);
  }

  TEST_CASE("single-member mode") {
    const Grid grid = Grid::uniform(101);
    const Warping w(grid, oracle::sine_warp(grid.points(), 0.3));
    const Psi member = gamma_to_psi(w);
    const ModeSummary m = summarize_mode({member}, CenterStatistic::median);
    CHECK(m.count == 1);
    CHECK((m.center_psi.values() - member.values()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sse(m.center, psi_to_gamma(member)) < 1e-26);
    CHECK((m.lower.values() - m.center.values()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((m.upper.values() - m.center.values()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::isnan(m.amplitude_distance));
  }

  TEST_CASE("synthetic cluster: center and band coverage") {
    const Grid grid = Grid::uniform(101);
    const Eigen::ArrayXd t = grid.points().array();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<Psi> members;
    std::vector<Eigen::VectorXd> gammas;
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd g = (t + z(rng) * 0.05 * (oracle::pi * t).sin()).matrix();
      gammas.push_back(g);
      members.push_back(gamma_to_psi(Warping(grid, g)));
    }
    for (CenterStatistic stat : {CenterStatistic::mean, CenterStatistic::median}) {
      const ModeSummary m = summarize_mode(members, stat);
      CHECK(sse(m.center, identity_warping(grid)) < 1e-3);
      CHECK(m.lower[0] == 0.0);
      CHECK(m.upper[0] == 0.0);
      CHECK(m.lower[100] == 1.0);
      CHECK(m.upper[100] == 1.0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(m.lower[i] <= m.center[i]);
        CHECK(m.center[i] <= m.upper[i]);
      }
      double covered = 0.0;
      for (const auto& g : gammas)
        for (Eigen::Index i = 1; i < 100; ++i) covered += (g[i] >= m.lower.values()[i] && g[i] <= m.upper.values()[i]);
      CHECK(covered / (500.0 * 99.0) == doctest::Approx(0.95).epsilon(0.01));
    }
  }

  TEST_CASE("amplitude distance of the center") {
    const Grid grid = Grid::uniform(101);
    const auto [f1, f2] = shifted_bumps(grid);
    const Srvf q = to_srvf(f1);
    const ModeSummary m = summarize_mode({gamma_to_psi(identity_warping(grid))}, CenterStatistic::mean, q, q);
    CHECK(m.amplitude_distance < 1e-20);
    const Srvf q2 = to_srvf(f2);
    const ModeSummary m2 = summarize_mode({gamma_to_psi(identity_warping(grid))}, CenterStatistic::mean, q, q2);
    const double d = l2_dist(q, q2);
    CHECK(m2.amplitude_distance == doctest::Approx(d * d).epsilon(1e-6));
  }

  TEST_CASE("best mode selection") {
    CHECK(select_best_mode(fake_modes({0.4}, {3})) == 0);
    CHECK(select_best_mode(fake_modes({0.8, 0.3, 0.5}, {1, 1, 1})) == 1);
    CHECK(select_best_mode(fake_modes({0.3, 0.3}, {10, 90})) == 1);
    CHECK(select_best_mode(fake_modes({0.3, 0.3, 0.3}, {50, 50, 20})) == 0);
    CHECK_THROWS_AS(select_best_mode({}), InvalidInput);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(6);
      for (double& x : a) x = u(rng);
      std::vector<double> scaled = a;
      for (double& x : scaled) x *= 37.5;
      const std::vector<std::size_t> counts(6, 1);
      CHECK(select_best_mode(fake_modes(a, counts)) == select_best_mode(fake_modes(scaled, counts)));
    }
  }

  TEST_CASE("pooling") {
    const std::vector<ChainSamples> chains = small_chains(3);
    MultichainConfig mc;
    mc.chains = 3;
    const PooledPosterior p = pool_chains(chains, mc);
    std::size_t total = 0;
    for (const auto& c : chains) total += c.retained();
    CHECK(p.size() == total);
    CHECK(p.labels.size() == total);
    CHECK(*std::min_element(p.labels.begin(), p.labels.end()) == 0);
    CHECK(static_cast<std::size_t>(*std::max_element(p.labels.begin(), p.labels.end()) + 1) == p.modes.size());
    std::size_t counted = 0;
    for (const ModeSummary& m : p.modes) {
      counted += m.count;
      CHECK_NOTHROW(Warping(m.center.grid(), m.center.values()));
    }
    CHECK(counted == total);
    CHECK(p.best_mode == select_best_mode(p.modes));

    // Chain order does not matter.
    std::vector<ChainSamples> reversed(chains.rbegin(), chains.rend());
    const PooledPosterior r = pool_chains(reversed, mc);
    CHECK(membership(r) == membership(p));
    REQUIRE(r.modes.size() == p.modes.size());
    for (std::size_t i = 0; i < p.modes.size(); ++i) {
      CHECK(r.modes[i].center.values() == p.modes[i].center.values());
      CHECK(r.modes[i].count == p.modes[i].count);
    }
  }

  TEST_CASE("a single chain pools to its own draws") {
    const std::vector<ChainSamples> chains = small_chains(1);
    MultichainConfig mc;
    mc.chains = 1;
    const PooledPosterior p = pool_chains(chains, mc);
    REQUIRE(p.size() == chains[0].retained());
    const Basis basis(chains[0].descriptor);
    for (std::size_t r = 0; r < p.size(); r += 17) {
      const Psi expect = exp_map(coeffs_to_function(basis, chains[0].coeffs.row(static_cast<Eigen::Index>(r)).transpose()));
      CHECK((p.psi[r].values() - expect.values().cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("failed chains") {
    std::vector<ChainSamples> chains = small_chains(2);
    chains[1] = ChainSamples{};
    chains[1].descriptor = chains[0].descriptor;
    chains[1].seed = 99;
    chains[1].failure = "injectivity";
    MultichainConfig mc;
    const PooledPosterior p = pool_chains(chains, mc);
    CHECK(p.size() == chains[0].retained());
    REQUIRE(p.failures.size() == 1);
    CHECK(p.failures[0].message == "injectivity");

    chains[0] = chains[1];
    CHECK_THROWS_AS(pool_chains(chains, mc), NumericalError);
  }

  TEST_CASE("run_parallel seeds chains consecutively") {
    const Grid grid = Grid::uniform(51);
    const auto [y1, y2] = shifted_bumps(grid);
    ChainConfig cfg;
    cfg.iterations = 120;
    cfg.burn_in = 20;
    cfg.seed = 10;
    MultichainConfig mc;
    mc.chains = 2;
    const PooledPosterior p = run_parallel(y1, y2, cfg, mc);
    REQUIRE(p.chains.size() == 2);
    CHECK(p.chains[0].seed == 10);
    CHECK(p.chains[1].seed == 11);
    CHECK(p.size() == 200);
    ChainConfig second = cfg;
    second.seed = 11;
    CHECK(p.chains[1].coeffs == run_chain(y1, y2, second).coeffs);
    mc.chains = 0;
    CHECK_THROWS_AS(run_parallel(y1, y2, cfg, mc), InvalidInput);
  }
}
