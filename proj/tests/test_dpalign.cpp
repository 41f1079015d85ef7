#include "bayeswarp/dpalign.hpp"
#include "bayeswarp/error.hpp"
#include "bayeswarp/fdcore.hpp"
#include "bayeswarp/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>

using namespace bayeswarp;

namespace {

Srvf random_srvf(const Grid& grid, std::mt19937_64& rng) { return Srvf(grid, oracle::random_smooth(grid.points(), rng)); }

}  // namespace

TEST_SUITE("dpalign") {
  TEST_CASE("identical srvfs align by the identity") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
      const Srvf q = random_srvf(grid, rng);
      const DpResult r = dp_align(q, q);
      CHECK(sse(r.gamma, identity_warping(grid)) < 1e-6);
      CHECK(r.cost < 1e-12);
      CHECK(r.path.front() == std::make_pair(0, 0));
      CHECK(r.path.back() == std::make_pair(100, 100));
    }
  }

  TEST_CASE("recovers a known warp") {
    const Grid grid = Grid::uniform(101);
    const Eigen::ArrayXd t = grid.points().array();
    const SampledFunction f(grid, ((-(t - 0.3).square() / 0.01).exp() + 0.6 * (-(t - 0.7).square() / 0.008).exp()).matrix());
    const Srvf q1 = to_srvf(f);
    const Warping g0(grid, (0.5 * (t + t.square())).matrix());
    const Srvf q2 = warp_srvf(q1, g0);
    const DpResult r = dp_align(q1, q2);
    const double q1_norm = l2_dist(q1, Srvf(grid, Eigen::VectorXd::Zero(101)));
    // Amplitude distance is the squared norm, as everywhere else.
    const double amplitude = std::pow(l2_dist(q1, warp_srvf(q2, r.gamma)), 2);
    CHECK(amplitude < 0.05 * q1_norm);
    CHECK(l2_dist(q1, q2) > 0.2 * q1_norm);
  }

  TEST_CASE("output is a valid warp") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      const DpResult r = dp_align(random_srvf(grid, rng), random_srvf(grid, rng));
      CHECK(r.gamma[0] == 0.0);
      CHECK(r.gamma[100] == 1.0);
      for (std::size_t i = 1; i < grid.size(); ++i) CHECK(r.gamma[i] >= r.gamma[i - 1]);
    }
  }

  TEST_CASE("simulated pair runs well under a second") {
    SimulationConfig sim;
    const SimulatedPair pair = simulate_pair(sim, 7);
    const auto start = std::chrono::steady_clock::now();
    dp_align(to_srvf(pair.y1), to_srvf(pair.y2));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 1.0);
  }

  TEST_CASE("two-point lattice admits only the diagonal") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(6);
    const Srvf q1 = random_srvf(grid, rng);
    const Srvf q2 = random_srvf(grid, rng);
    const DpResult r = exhaustive_align(q1, q2, 2);
    REQUIRE(r.path.size() == 2);
    CHECK(r.path[1] == std::make_pair(1, 1));
    CHECK(sse(r.gamma, identity_warping(grid)) < 1e-28);
    // The diagonal cost is ||q1 - q2||^2 under the segment quadrature.
    const double d = l2_dist(q1, q2);
    CHECK(r.cost == doctest::Approx(d * d).epsilon(0.02));
  }

  TEST_CASE("dynamic program matches enumeration") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const Srvf q1 = random_srvf(grid, rng);
      const Srvf q2 = random_srvf(grid, rng);
      DpConfig cfg;
      cfg.lattice = 5;
      const DpResult dp = dp_align(q1, q2, cfg);
      const DpResult ex = exhaustive_align(q1, q2, 5);
      CHECK(dp.cost == ex.cost);
      CHECK(dp.path == ex.path);
    }
    CHECK_THROWS_AS(exhaustive_align(Srvf(grid, Eigen::VectorXd::Ones(101)), Srvf(grid, Eigen::VectorXd::Ones(101)), 9),
                    InvalidInput);
  }

  TEST_CASE("optimal cost is symmetric") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      const Srvf q1 = random_srvf(grid, rng);
      const Srvf q2 = random_srvf(grid, rng);
      DpConfig cfg;
      cfg.lattice = 41;
      CHECK(std::abs(dp_align(q1, q2, cfg).cost - dp_align(q2, q1, cfg).cost) < 1e-6);
    }
  }

  TEST_CASE("finer nested lattices never cost more") {
    const Grid grid = Grid::uniform(101);
    std::mt19937_64 rng(9);
    const Srvf q1 = random_srvf(grid, rng);
    const Srvf q2 = random_srvf(grid, rng);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t m : {6, 11, 21, 41, 81}) {
      DpConfig cfg;
      cfg.lattice = m;
      const double cost = dp_align(q1, q2, cfg).cost;
      CHECK(cost <= previous + 1e-12);
      previous = cost;
    }
  }

  TEST_CASE("config validation and path interpolation") {
    const Grid grid = Grid::uniform(11);
    const Srvf q(grid, Eigen::VectorXd::Ones(11));
    DpConfig cfg;
    cfg.lattice = 1;
    CHECK_THROWS_AS(dp_align(q, q, cfg), InvalidInput);
    cfg = {};
    cfg.slopes = {{0, 1}};
    CHECK_THROWS_AS(dp_align(q, q, cfg), InvalidInput);
    CHECK_THROWS_AS(dp_align(q, Srvf(Grid::uniform(12), Eigen::VectorXd::Ones(12))), InvalidInput);

    const Warping w = path_to_warping(grid, {{0, 0}, {1, 2}, {2, 2}}, 3);
    CHECK(w[0] == 0.0);
    CHECK(w[5] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(0.4));
    CHECK(w[10] == 1.0);
  }
}
