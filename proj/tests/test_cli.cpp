#include "bayeswarp/cli.hpp"
#include "bayeswarp/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bayeswarp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bayeswarp");
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bayeswarp_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n - 1;
}

std::vector<std::string> small_bayes(const fs::path& input, const fs::path& outdir) {
  return {"align-bayes", "--input", input.string(), "--outdir", outdir.string(), "--chains", "2",
          "--iterations", "120", "--burn-in", "40", "--seed", "3", "--threads", "2"};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"simulate", "--bogus"}).code == 2);
    CHECK(run({"simulate", "--set", "no_such_key=1"}).code == 2);
    CHECK(run({"simulate", "--set", "missing-equals"}).code == 2);
    CHECK(run({"simulate", "--seed", "-4"}).code == 2);
    CHECK(run({"align-dp"}).code == 2);
    CHECK(run({"align-dp", "--input", "/nonexistent/pair.csv"}).code == 2);
    CHECK(run({"simulate", "--help"}).code == 0);

    const fs::path dir = scratch("badconfig");
    std::ofstream(dir / "bad.cfg") << "seed = 1\nchains = lots\n";
    const Result r = run({"simulate", "--config", (dir / "bad.cfg").string(), "--outdir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
  }

  TEST_CASE("simulate is deterministic") {
    const fs::path dir = scratch("simulate");
    REQUIRE(run({"simulate", "--seed", "7", "--out", (dir / "a.csv").string(), "--truth", (dir / "ta.csv").string()}).code == 0);
    REQUIRE(run({"simulate", "--seed", "7", "--out", (dir / "b.csv").string(), "--truth", (dir / "tb.csv").string()}).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "ta.csv") == slurp(dir / "tb.csv"));
    CHECK(data_rows(dir / "a.csv") == 101);
    REQUIRE(run({"simulate", "--seed", "8", "--out", (dir / "c.csv").string(), "--truth", (dir / "tc.csv").string()}).code == 0);
    CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
  }

  TEST_CASE("config file overrides flags") {
    const fs::path dir = scratch("precedence");
    std::ofstream(dir / "run.cfg") << "# settings\nseed = 9\n";
    const Result r = run({"simulate", "--seed", "3", "--config", (dir / "run.cfg").string(), "--outdir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("seed 9") != std::string::npos);
  }

  TEST_CASE("align-dp on identical columns") {
    const fs::path dir = scratch("dp");
    const SimulatedPair sim = simulate_pair({}, 2);
    write_pair((dir / "same.csv").string(), sim.y1, sim.y1);
    const Result r = run({"align-dp", "--input", (dir / "same.csv").string(), "--outdir", dir.string()});
    REQUIRE(r.code == 0);
    const auto pos = r.out.find("sse_identity ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 13)) < 1e-6);
    CHECK(fs::exists(dir / "dp.json"));
    CHECK(data_rows(dir / "dp_warp.csv") == 101);

    const fs::path sdir = scratch("dp_smooth");
    CHECK(run({"align-dp", "--input", (dir / "same.csv").string(), "--outdir", sdir.string(), "--smooth"}).code == 0);
  }

  TEST_CASE("align-bayes reports are reproducible and feed diagnostics") {
    const fs::path dir = scratch("bayes");
    REQUIRE(run({"simulate", "--seed", "7", "--outdir", dir.string()}).code == 0);
    const Result a = run(small_bayes(dir / "pair.csv", dir / "a"));
    REQUIRE(a.code == 0);
    CHECK(a.out.find("modes: ") != std::string::npos);
    REQUIRE(run(small_bayes(dir / "pair.csv", dir / "b")).code == 0);
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      const std::string name = entry.path().filename().string();
      if (name == "timings.json") continue;
      INFO(name);
      CHECK(slurp(entry.path()) == slurp(dir / "b" / name));
    }
    CHECK(data_rows(dir / "a" / "gamma_samples.csv") == 2 * 80);

    const Result d = run({"diagnostics", "--dir", (dir / "a").string()});
    REQUIRE(d.code == 0);
    CHECK(d.out.find("chain ") != std::string::npos);
    CHECK(fs::exists(dir / "a" / "diagnostics.json"));
    CHECK(run({"diagnostics", "--dir", (dir / "missing").string()}).code == 2);
  }

  TEST_CASE("replicate-study writes one row per replicate") {
    const fs::path dir = scratch("study");
    const Result r = run({"replicate-study", "--replicates", "25", "--chains", "1", "--iterations", "40", "--burn-in",
                          "10", "--seed", "1", "--outdir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(data_rows(dir / "sse_table.csv") == 25);
    std::ifstream in(dir / "sse_table.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("bayes,dp_y,dp_f") != std::string::npos);
  }
}
