#pragma once

#include "bayeswarp/config.hpp"
#include "bayeswarp/dpalign.hpp"
#include "bayeswarp/multichain.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bayeswarp {

struct ChainReport {
  std::uint64_t seed = 0;
  std::size_t retained = 0;
  std::size_t completed_iterations = 0;
  std::array<double, accept_columns> acceptance{};
  double ess_sigma2 = 0.0;
  double ess_sigma1_2 = 0.0;
  double ess_sigma2_2 = 0.0;
  std::vector<double> ess_coeffs;
  std::optional<std::string> failure;
};

struct RunReport {
  /// Settings that influence results (paths and thread counts excluded).
  Settings config;
  std::uint64_t seed = 0;
  std::vector<ChainReport> chains;
  /// SSE between each mode center and the DP baseline on the raw data.
  std::vector<double> sse_vs_dp;
  std::optional<DpResult> dp;
  /// Wall-clock seconds; written to timings.json, never to the summary.
  std::vector<std::pair<std::string, double>> timings;
};

ChainReport summarize_chain(const ChainSamples& chain);
RunReport make_report(const RunConfig& cfg, const PooledPosterior& posterior, std::optional<DpResult> dp);

/// Writes summary.json, modes.csv, gamma_samples.csv, f1_posterior.csv,
/// f2_posterior.csv, warped_f2.csv, traces.csv and timings.json into outdir
/// (created if needed). Everything except timings.json is a pure function of
/// (config, seed, data).
void write_report(const RunReport& report, const PooledPosterior& posterior, const std::string& outdir,
                  Interpolation interp = Interpolation::cubic_hermite);

/// Names of the columns in traces.csv after the (chain, draw) prefix.
std::vector<std::string> trace_columns(std::size_t n_v);

}  // namespace bayeswarp
