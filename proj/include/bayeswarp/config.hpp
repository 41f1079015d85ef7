#pragma once

#include "bayeswarp/dpalign.hpp"
#include "bayeswarp/io.hpp"
#include "bayeswarp/multichain.hpp"
#include "bayeswarp/samplers.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bayeswarp {

/// Per-replicate budget for the replicate study; much smaller than a full run.
struct StudyBudget {
  std::size_t replicates = 25;
  std::size_t chains = 4;
  std::size_t iterations = 4000;
  std::size_t burn_in = 1000;
};

struct RunConfig {
  ChainConfig chain;
  MultichainConfig multi;
  DpConfig dp;
  SimulationConfig sim;
  StudyBudget study;
  std::string input;
  std::string input2;
  std::string outdir = "bayeswarp-out";
  LoadOptions load;
  bool smooth = false;

  void validate() const;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

/// Sets one flat key. Unknown keys and malformed values throw InvalidInput.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_settings(RunConfig& cfg, const Settings& settings);

/// Every key with its current value, in a fixed order.
Settings describe(const RunConfig& cfg);
std::vector<std::string> setting_keys();

/// "key = value" lines; '#' starts a comment. Errors carry the line number.
Settings parse_config_text(const std::string& text);
Settings read_config_file(const std::string& path);
/// Applies a settings file in order; value errors carry the file line.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// BAYESWARP_OUTDIR and BAYESWARP_THREADS, when set.
Settings environment_settings();

}  // namespace bayeswarp
