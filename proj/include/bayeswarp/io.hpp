#pragma once

#include "bayeswarp/grid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayeswarp {

struct SignalPair {
  SampledFunction y1;
  SampledFunction y2;
};

struct LoadOptions {
  /// Working grid size; unset keeps the (decimated) input length.
  std::optional<std::size_t> grid_size;
  /// Keep every round(1/fraction)-th row, in (0, 1].
  double subsample = 1.0;
};

/// CSV with header "t,y1,y2" ("t,f1,f2" is accepted for simulated truth).
/// t is rescaled affinely to [0, 1] and the values linearly resampled onto a
/// uniform grid.
SignalPair load_pair(const std::string& path, const LoadOptions& options = {});
/// Two files with header "t,y" on the same time points.
SignalPair load_pair(const std::string& path1, const std::string& path2, const LoadOptions& options = {});

/// Columns parsed from CSV text; `path` only labels errors.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  /// Source line of each data row.
  std::vector<std::size_t> lines;
};
CsvTable parse_csv(const std::string& text, const std::string& path = "<input>");
CsvTable read_csv(const std::string& path);

void write_pair(const std::string& path, const SampledFunction& a, const SampledFunction& b,
                const std::string& header = "t,y1,y2");

struct SimulationConfig {
  std::vector<double> centers1{0.35, 0.65};
  std::vector<double> centers2{0.5};
  double width = 0.07;
  double height = 1.0;
  double noise_variance = 0.001;
  std::size_t n = 101;

  void validate() const;
};

struct SimulatedPair {
  SampledFunction y1;
  SampledFunction y2;
  SampledFunction f1;
  SampledFunction f2;
};

/// Gaussian bumps height * exp(-(t - c)^2 / (2 width^2)) plus iid noise.
SimulatedPair simulate_pair(const SimulationConfig& cfg, std::uint64_t seed);

/// GP posterior mean, hyperparameters by marginal likelihood on a log grid.
SampledFunction smooth_for_dp(const SampledFunction& y);

}  // namespace bayeswarp
