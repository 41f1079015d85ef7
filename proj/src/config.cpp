#include "bayeswarp/config.hpp"

#include "bayeswarp/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bayeswarp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw InvalidInput(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidInput(key + ": expected a nonnegative integer, got '" + v + "'");
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw InvalidInput(key + ": integer out of range");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidInput(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ';')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw InvalidInput(key + ": expected a ';'-separated list");
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ";") + fmt(x);
  return out;
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BW_SIZE(KEY, FIELD)                                                                      \
  Entry {                                                                                        \
    KEY, [](RunConfig& c, const std::string& v) { c.FIELD = static_cast<std::size_t>(to_uint(KEY, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                               \
  }
#define BW_REAL(KEY, FIELD)                                                            \
  Entry {                                                                              \
    KEY, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(KEY, v); },      \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                \
  }
#define BW_TEXT(KEY, FIELD)                                                  \
  Entry {                                                                    \
    KEY, [](RunConfig& c, const std::string& v) { c.FIELD = v; },            \
        [](const RunConfig& c) { return c.FIELD; }                           \
  }

Entry obs_prior(const char* key, std::optional<InvGammaPrior> PriorConfig::*field, bool shape) {
  return Entry{key,
               [=](RunConfig& c, const std::string& v) {
                 auto& slot = c.chain.priors.*field;
                 if (v == "auto") {
                   slot.reset();
                   return;
                 }
                 InvGammaPrior p = slot.value_or(InvGammaPrior{3.0, 0.0});
                 (shape ? p.shape : p.scale) = to_double(key, v);
                 slot = p;
               },
               [=](const RunConfig& c) -> std::string {
                 const auto& slot = c.chain.priors.*field;
                 if (!slot) return shape ? "3" : "auto";
                 return fmt(shape ? slot->shape : slot->scale);
               }};
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      Entry{"seed", [](RunConfig& c, const std::string& v) { c.chain.seed = to_uint("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.chain.seed); }},
      BW_SIZE("chains", multi.chains),
      BW_SIZE("iterations", chain.iterations),
      BW_SIZE("burn_in", chain.burn_in),
      BW_SIZE("thin", chain.thin),
      Entry{"basis", [](RunConfig& c, const std::string& v) { c.chain.family = parse_basis_family(v); },
            [](const RunConfig& c) { return to_string(c.chain.family); }},
      BW_SIZE("n_v", chain.n_v),
      BW_REAL("h", chain.hmc.h),
      BW_REAL("T", chain.hmc.T),
      BW_REAL("beta", chain.priors.beta),
      Entry{"sampler", [](RunConfig& c, const std::string& v) { c.chain.g_sampler = parse_g_sampler(v); },
            [](const RunConfig& c) { return to_string(c.chain.g_sampler); }},
      Entry{"zpcn_betas", [](RunConfig& c, const std::string& v) { c.chain.zpcn.betas = to_list("zpcn_betas", v); },
            [](const RunConfig& c) { return list(c.chain.zpcn.betas); }},
      Entry{"zpcn_weights",
            [](RunConfig& c, const std::string& v) { c.chain.zpcn.weights = to_list("zpcn_weights", v); },
            [](const RunConfig& c) { return list(c.chain.zpcn.weights); }},
      BW_REAL("proposal_f1", chain.proposals.f1),
      BW_REAL("proposal_f2", chain.proposals.f2),
      BW_REAL("proposal_l1", chain.proposals.l1),
      BW_REAL("proposal_l2", chain.proposals.l2),
      Entry{"interp",
            [](RunConfig& c, const std::string& v) {
              if (v == "linear")
                c.chain.interp = Interpolation::linear;
              else if (v == "cubic")
                c.chain.interp = Interpolation::cubic_hermite;
              else
                throw InvalidInput("interp: expected linear or cubic");
            },
            [](const RunConfig& c) { return c.chain.interp == Interpolation::linear ? "linear" : "cubic"; }},
      BW_REAL("sigma_g", chain.priors.sigma_g),
      BW_REAL("sigma2_shape", chain.priors.sigma2.shape),
      BW_REAL("sigma2_scale", chain.priors.sigma2.scale),
      obs_prior("sigma1_2_shape", &PriorConfig::sigma1_2, true),
      obs_prior("sigma1_2_scale", &PriorConfig::sigma1_2, false),
      obs_prior("sigma2_2_shape", &PriorConfig::sigma2_2, true),
      obs_prior("sigma2_2_scale", &PriorConfig::sigma2_2, false),
      BW_REAL("s1_2_shape", chain.priors.s1_2.shape),
      BW_REAL("s1_2_scale", chain.priors.s1_2.scale),
      BW_REAL("s2_2_shape", chain.priors.s2_2.shape),
      BW_REAL("s2_2_scale", chain.priors.s2_2.scale),
      BW_REAL("l1_lower", chain.priors.l1.lower),
      BW_REAL("l1_upper", chain.priors.l1.upper),
      BW_REAL("l2_lower", chain.priors.l2.lower),
      BW_REAL("l2_upper", chain.priors.l2.upper),
      Entry{"statistic",
            [](RunConfig& c, const std::string& v) {
              if (v == "median")
                c.multi.statistic = CenterStatistic::median;
              else if (v == "mean")
                c.multi.statistic = CenterStatistic::mean;
              else
                throw InvalidInput("statistic: expected mean or median");
            },
            [](const RunConfig& c) { return c.multi.statistic == CenterStatistic::median ? "median" : "mean"; }},
      BW_SIZE("k_max", multi.cluster.k_max),
      BW_REAL("tau", multi.cluster.tau),
      Entry{"threads",
            [](RunConfig& c, const std::string& v) {
              c.multi.threads = static_cast<unsigned>(to_uint("threads", v));
              c.multi.cluster.threads = c.multi.threads;
            },
            [](const RunConfig& c) { return std::to_string(c.multi.threads); }},
      BW_SIZE("cluster_cap", multi.cluster_cap),
      BW_SIZE("center_cap", multi.center_cap),
      BW_SIZE("dp_lattice", dp.lattice),
      BW_TEXT("input", input),
      BW_TEXT("input2", input2),
      BW_TEXT("outdir", outdir),
      BW_REAL("subsample", load.subsample),
      Entry{"grid_size",
            [](RunConfig& c, const std::string& v) {
              if (v == "auto")
                c.load.grid_size.reset();
              else
                c.load.grid_size = static_cast<std::size_t>(to_uint("grid_size", v));
            },
            [](const RunConfig& c) { return c.load.grid_size ? std::to_string(*c.load.grid_size) : "auto"; }},
      Entry{"smooth", [](RunConfig& c, const std::string& v) { c.smooth = to_bool("smooth", v); },
            [](const RunConfig& c) { return c.smooth ? "true" : "false"; }},
      Entry{"sim_centers1", [](RunConfig& c, const std::string& v) { c.sim.centers1 = to_list("sim_centers1", v); },
            [](const RunConfig& c) { return list(c.sim.centers1); }},
      Entry{"sim_centers2", [](RunConfig& c, const std::string& v) { c.sim.centers2 = to_list("sim_centers2", v); },
            [](const RunConfig& c) { return list(c.sim.centers2); }},
      BW_REAL("sim_width", sim.width),
      BW_REAL("sim_height", sim.height),
      BW_REAL("sim_noise", sim.noise_variance),
      BW_SIZE("sim_n", sim.n),
      BW_SIZE("replicates", study.replicates),
      BW_SIZE("study_chains", study.chains),
      BW_SIZE("study_iterations", study.iterations),
      BW_SIZE("study_burn_in", study.burn_in),
  };
  return entries;
}

#undef BW_SIZE
#undef BW_REAL
#undef BW_TEXT

}  // namespace

void RunConfig::validate() const {
  chain.validate();
  multi.validate();
  dp.validate();
  sim.validate();
  if (!(load.subsample > 0.0 && load.subsample <= 1.0)) throw InvalidInput("subsample must lie in (0, 1]");
  if (load.grid_size && *load.grid_size < 3) throw InvalidInput("grid_size must be at least 3");
  if (outdir.empty()) throw InvalidInput("outdir must not be empty");
  if (study.replicates < 1 || study.chains < 1) throw InvalidInput("study needs replicates and chains");
  if (study.burn_in >= study.iterations) throw InvalidInput("study_burn_in must be smaller than study_iterations");
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : registry()) {
    if (key == e.key) {
      e.set(cfg, trim(value));
      return;
    }
  }
  throw InvalidInput("unknown setting '" + key + "'");
}

void apply_settings(RunConfig& cfg, const Settings& settings) {
  for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
}

Settings describe(const RunConfig& cfg) {
  Settings out;
  for (const Entry& e : registry()) out.emplace_back(e.key, e.get(cfg));
  return out;
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> out;
  for (const Entry& e : registry()) out.emplace_back(e.key);
  return out;
}

namespace {

struct ConfigLine {
  std::string key;
  std::string value;
  std::size_t line;
};

std::vector<ConfigLine> parse_lines(const std::string& text) {
  std::vector<ConfigLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", n);
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", n);
    out.push_back({std::move(key), trim(line.substr(eq + 1)), n});
  }
  return out;
}

std::vector<ConfigLine> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_lines(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

}  // namespace

Settings parse_config_text(const std::string& text) {
  Settings out;
  for (ConfigLine& l : parse_lines(text)) out.emplace_back(std::move(l.key), std::move(l.value));
  return out;
}

Settings read_config_file(const std::string& path) {
  Settings out;
  for (ConfigLine& l : read_lines(path)) out.emplace_back(std::move(l.key), std::move(l.value));
  return out;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  for (const ConfigLine& l : read_lines(path)) {
    try {
      apply_setting(cfg, l.key, l.value);
    } catch (const InvalidInput& e) {
      throw ParseError(path + ": " + e.what(), l.line);
    }
  }
}

Settings environment_settings() {
  Settings out;
  if (const char* dir = std::getenv("BAYESWARP_OUTDIR"); dir && *dir) out.emplace_back("outdir", dir);
  if (const char* t = std::getenv("BAYESWARP_THREADS"); t && *t) out.emplace_back("threads", t);
  return out;
}

}  // namespace bayeswarp
