#include "bayeswarp/cli.hpp"

#include "bayeswarp/config.hpp"
#include "bayeswarp/diagnostics.hpp"
#include "bayeswarp/error.hpp"
#include "bayeswarp/io.hpp"
#include "bayeswarp/report.hpp"
#include "bayeswarp/study.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace bayeswarp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Invocation {
  Settings flags;
  std::vector<std::string> sets;
  std::string config_path;
};

void flag(CLI::App* sub, Invocation& inv, const std::string& name, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      name, [&inv, key](const std::string& v) { inv.flags.emplace_back(key, v); }, help);
}

void common(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_path, "key = value settings file; overrides flags");
  sub->add_option("--set", inv.sets, "extra KEY=VALUE setting (repeatable)");
  flag(sub, inv, "--outdir", "outdir", "output directory");
}

RunConfig resolve(const Invocation& inv) {
  RunConfig cfg;
  apply_settings(cfg, environment_settings());
  apply_settings(cfg, inv.flags);
  for (const std::string& s : inv.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects KEY=VALUE, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!inv.config_path.empty()) apply_config_file(cfg, inv.config_path);
  cfg.validate();
  return cfg;
}

void log_config(std::ostream& err, const std::string& command, const RunConfig& cfg) {
  err << "bayeswarp " << command << ": seed " << cfg.chain.seed << "\n";
  for (const auto& [k, v] : describe(cfg)) err << "  " << k << " = " << v << "\n";
}

SignalPair load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw InvalidInput("an input file is required (--input)");
  return cfg.input2.empty() ? load_pair(cfg.input, cfg.load) : load_pair(cfg.input, cfg.input2, cfg.load);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir + "': " + ec.message());
}

int run_simulate(const RunConfig& cfg, const std::string& pair_path, const std::string& truth_path, std::ostream& out) {
  const SimulatedPair sim = simulate_pair(cfg.sim, cfg.chain.seed);
  const std::string p = pair_path.empty() ? (std::filesystem::path(cfg.outdir) / "pair.csv").string() : pair_path;
  const std::string t = truth_path.empty() ? (std::filesystem::path(cfg.outdir) / "truth.csv").string() : truth_path;
  for (const std::string& f : {p, t})
    if (const auto parent = std::filesystem::path(f).parent_path(); !parent.empty()) ensure_dir(parent.string());
  write_pair(p, sim.y1, sim.y2, "t,y1,y2");
  write_pair(t, sim.f1, sim.f2, "t,f1,f2");
  out << "wrote " << p << " and " << t << "\n";
  return exit_ok;
}

int run_align_bayes(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const SignalPair data = load_input(cfg);
  const double t_load = seconds_since(start);

  const auto chains_start = Clock::now();
  const PooledPosterior posterior = run_parallel(data.y1, data.y2, cfg.chain, cfg.multi);
  const double t_chains = seconds_since(chains_start);

  const auto dp_start = Clock::now();
  DpResult dp = dp_align(to_srvf(data.y1), to_srvf(data.y2), cfg.dp);
  const double t_dp = seconds_since(dp_start);

  RunReport report = make_report(cfg, posterior, std::move(dp));
  report.timings = {{"load", t_load}, {"chains_and_pooling", t_chains}, {"dp", t_dp}, {"total", seconds_since(start)}};
  write_report(report, posterior, cfg.outdir, cfg.chain.interp);

  for (const ChainFailure& f : posterior.failures) err << "warning: chain " << f.chain << " failed: " << f.message << "\n";
  out << "pooled draws: " << posterior.size() << "\n";
  out << "modes: " << posterior.modes.size() << " (best " << posterior.best_mode << ")\n";
  for (std::size_t m = 0; m < posterior.modes.size(); ++m) {
    const ModeSummary& s = posterior.modes[m];
    out << "  mode " << m << ": count " << s.count << ", amplitude distance " << fmt(s.amplitude_distance)
        << ", sse vs dp " << fmt(report.sse_vs_dp[m]) << "\n";
  }
  for (const ChainReport& c : report.chains) {
    out << "  chain seed " << c.seed << ": accept g " << fmt(c.acceptance[accept_g]) << ", f1 "
        << fmt(c.acceptance[accept_f1]) << ", f2 " << fmt(c.acceptance[accept_f2]) << "\n";
  }
  out << "report written to " << cfg.outdir << "\n";
  return exit_ok;
}

int run_align_dp(const RunConfig& cfg, std::ostream& out) {
  const SignalPair data = load_input(cfg);
  const SampledFunction f1 = cfg.smooth ? smooth_for_dp(data.y1) : data.y1;
  const SampledFunction f2 = cfg.smooth ? smooth_for_dp(data.y2) : data.y2;
  const DpResult dp = dp_align(to_srvf(f1), to_srvf(f2), cfg.dp);
  const double sse_identity = sse(dp.gamma, identity_warping(dp.gamma.grid()));

  ensure_dir(cfg.outdir);
  const std::filesystem::path dir(cfg.outdir);
  write_pair((dir / "dp_warp.csv").string(), SampledFunction(dp.gamma.grid(), dp.gamma.values()), warp_function(data.y2, dp.gamma), "t,gamma,warped_y2");
  nlohmann::ordered_json j;
  j["smooth"] = cfg.smooth;
  j["lattice"] = dp.lattice;
  j["cost"] = dp.cost;
  j["sse_identity"] = sse_identity;
  std::ofstream(dir / "dp.json") << j.dump(2) << "\n";
  out << "cost " << fmt(dp.cost) << "\n";
  out << "sse_identity " << fmt(sse_identity) << "\n";
  return exit_ok;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

int run_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ensure_dir(cfg.outdir);
  std::size_t done = 0;
  const std::vector<ReplicateResult> results = replicate_study(cfg, [&](const ReplicateResult& r) {
    err << "replicate " << done++ << ": bayes " << fmt(r.bayes) << ", dp(y) " << fmt(r.dp_y) << ", dp(f) "
        << fmt(r.dp_f) << ", modes " << r.modes << "\n";
  });
  const std::string path = (std::filesystem::path(cfg.outdir) / "sse_table.csv").string();
  write_study(path, results);
  std::vector<double> b, y, f;
  for (const ReplicateResult& r : results) {
    b.push_back(r.bayes);
    y.push_back(r.dp_y);
    f.push_back(r.dp_f);
  }
  out << "median sse: bayes " << fmt(median(b)) << ", dp(y) " << fmt(median(y)) << ", dp(f) " << fmt(median(f))
      << "\n";
  out << "table written to " << path << "\n";
  return exit_ok;
}

int run_diagnostics(const std::string& dir, std::ostream& out) {
  const std::filesystem::path base(dir);
  const CsvTable table = read_csv((base / "traces.csv").string());
  if (table.header.size() < 3 || table.header[0] != "chain") throw InvalidInput("traces.csv has an unexpected layout");

  std::map<long long, std::vector<std::size_t>> rows;
  for (std::size_t r = 0; r < table.columns[0].size(); ++r)
    rows[static_cast<long long>(table.columns[0][r])].push_back(r);

  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  for (const auto& [chain, idx] : rows) {
    nlohmann::ordered_json j;
    j["chain"] = chain;
    j["draws"] = idx.size();
    nlohmann::ordered_json ess, acc;
    out << "chain " << chain << " (" << idx.size() << " draws)\n";
    for (std::size_t c = 2; c < table.header.size(); ++c) {
      const std::string& name = table.header[c];
      Eigen::VectorXd series(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) series[static_cast<Eigen::Index>(i)] = table.columns[c][idx[i]];
      if (name.rfind("accept_", 0) == 0) {
        acc[name.substr(7)] = series.mean();
        out << "  acceptance " << name.substr(7) << " " << fmt(series.mean()) << "\n";
      } else {
        ess[name] = effective_sample_size(series);
        out << "  ess " << name << " " << fmt(effective_sample_size(series)) << "\n";
      }
    }
    j["acceptance"] = acc;
    j["ess"] = ess;
    report.push_back(j);
  }
  std::ofstream(base / "diagnostics.json") << report.dump(2) << "\n";
  return exit_ok;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian registration of noisy function pairs", "bayeswarp"};
  app.require_subcommand(1, 1);
  Invocation inv;

  CLI::App* simulate = app.add_subcommand("simulate", "write a simulated two-peak/one-peak pair");
  std::string pair_path, truth_path;
  common(simulate, inv);
  flag(simulate, inv, "--seed", "seed", "simulation seed");
  flag(simulate, inv, "--noise", "sim_noise", "noise variance");
  flag(simulate, inv, "--n", "sim_n", "grid size");
  simulate->add_option("--out", pair_path, "pair CSV (default <outdir>/pair.csv)");
  simulate->add_option("--truth", truth_path, "noise-free CSV (default <outdir>/truth.csv)");

  CLI::App* bayes = app.add_subcommand("align-bayes", "full posterior registration");
  common(bayes, inv);
  for (const auto& [name, key] : std::vector<std::pair<std::string, std::string>>{
           {"--input", "input"},       {"--input2", "input2"},     {"--seed", "seed"},
           {"--chains", "chains"},     {"--iterations", "iterations"}, {"--burn-in", "burn_in"},
           {"--thin", "thin"},         {"--basis", "basis"},       {"--nv", "n_v"},
           {"--hmc-h", "h"},           {"--hmc-T", "T"},               {"--beta", "beta"},
           {"--sampler", "sampler"},   {"--statistic", "statistic"}, {"--threads", "threads"},
           {"--subsample", "subsample"}, {"--grid-size", "grid_size"}})
    flag(bayes, inv, name, key, "sets " + key);

  CLI::App* dp = app.add_subcommand("align-dp", "dynamic-programming baseline");
  common(dp, inv);
  for (const auto& [name, key] : std::vector<std::pair<std::string, std::string>>{
           {"--input", "input"}, {"--input2", "input2"}, {"--lattice", "dp_lattice"},
           {"--subsample", "subsample"}, {"--grid-size", "grid_size"}})
    flag(dp, inv, name, key, "sets " + key);
  dp->add_flag_callback("--smooth", [&inv] { inv.flags.emplace_back("smooth", "true"); },
                        "GP-smooth both inputs first");

  CLI::App* study = app.add_subcommand("replicate-study", "SSE comparison over simulated replicates");
  common(study, inv);
  for (const auto& [name, key] : std::vector<std::pair<std::string, std::string>>{
           {"--replicates", "replicates"}, {"--seed", "seed"}, {"--chains", "study_chains"},
           {"--iterations", "study_iterations"}, {"--burn-in", "study_burn_in"}, {"--threads", "threads"}})
    flag(study, inv, name, key, "sets " + key);

  CLI::App* diag = app.add_subcommand("diagnostics", "ESS and acceptance from a saved traces.csv");
  std::string diag_dir;
  diag->add_option("--dir", diag_dir, "output directory of an align-bayes run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (diag->parsed()) return run_diagnostics(diag_dir, out);
    const RunConfig cfg = resolve(inv);
    CLI::App* sub = app.get_subcommands().front();
    log_config(err, sub->get_name(), cfg);
    if (simulate->parsed()) return run_simulate(cfg, pair_path, truth_path, out);
    if (bayes->parsed()) return run_align_bayes(cfg, out, err);
    if (dp->parsed()) return run_align_dp(cfg, out);
    return run_study(cfg, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return exit_runtime;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace bayeswarp
