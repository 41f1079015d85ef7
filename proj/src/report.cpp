#include "bayeswarp/report.hpp"

#include "bayeswarp/diagnostics.hpp"
#include "bayeswarp/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace bayeswarp {

namespace {

using Json = nlohmann::ordered_json;

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path.string()), file_(std::fopen(path_.c_str(), "w")) {
    if (!file_) throw InvalidInput("cannot write '" + path_ + "'");
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) std::fprintf(file_, i ? ",%s" : "%s", names[i].c_str());
    std::fputc('\n', file_);
  }
  CsvWriter& integer(long long v) {
    sep();
    std::fprintf(file_, "%lld", v);
    return *this;
  }
  CsvWriter& real(double v) {
    sep();
    std::fprintf(file_, "%.17g", v);
    return *this;
  }
  void end() {
    std::fputc('\n', file_);
    first_ = true;
  }
  void close() {
    const int rc = std::fclose(file_);
    file_ = nullptr;
    if (rc != 0) throw InvalidInput("failed writing '" + path_ + "'");
  }

 private:
  void sep() {
    if (!first_) std::fputc(',', file_);
    first_ = false;
  }

  std::string path_;
  std::FILE* file_;
  bool first_ = true;
};

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

const char* kAcceptNames[accept_columns] = {"g", "f1", "f2", "l1", "l2"};

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

void write_band(const std::filesystem::path& path, const Grid& grid,
                const std::vector<const ChainSamples*>& chains, Eigen::MatrixXd ChainSamples::*field) {
  CsvWriter csv(path);
  csv.header({"t", "median", "lower", "upper"});
  std::vector<double> column;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    column.clear();
    for (const ChainSamples* c : chains) {
      const Eigen::MatrixXd& m = c->*field;
      for (Eigen::Index r = 0; r < m.rows(); ++r) column.push_back(m(r, static_cast<Eigen::Index>(i)));
    }
    csv.real(grid[i]).real(quantile(column, 0.5)).real(quantile(column, 0.025)).real(quantile(column, 0.975));
    csv.end();
  }
  csv.close();
}

}  // namespace

std::vector<std::string> trace_columns(std::size_t n_v) {
  std::vector<std::string> out{"sigma2", "sigma1_2", "sigma2_2", "s1_2", "s2_2", "l1", "l2", "phi"};
  for (const std::string& c : indexed("c_", n_v)) out.push_back(c);
  for (const char* a : kAcceptNames) out.push_back(std::string("accept_") + a);
  return out;
}

ChainReport summarize_chain(const ChainSamples& chain) {
  ChainReport r;
  r.seed = chain.seed;
  r.retained = chain.retained();
  r.completed_iterations = chain.completed_iterations;
  for (std::size_t j = 0; j < accept_columns; ++j) r.acceptance[j] = chain.counters[j].rate();
  if (r.retained > 0) {
    r.ess_sigma2 = effective_sample_size(chain.sigma2);
    r.ess_sigma1_2 = effective_sample_size(chain.sigma1_2);
    r.ess_sigma2_2 = effective_sample_size(chain.sigma2_2);
    for (Eigen::Index k = 0; k < chain.coeffs.cols(); ++k)
      r.ess_coeffs.push_back(effective_sample_size(chain.coeffs.col(k)));
  }
  r.failure = chain.failure;
  return r;
}

RunReport make_report(const RunConfig& cfg, const PooledPosterior& posterior, std::optional<DpResult> dp) {
  RunReport report;
  for (auto& [k, v] : describe(cfg)) {
    if (k == "outdir" || k == "threads" || k == "input" || k == "input2") continue;
    report.config.emplace_back(k, v);
  }
  report.seed = cfg.chain.seed;
  for (const ChainSamples& c : posterior.chains) report.chains.push_back(summarize_chain(c));
  if (dp) {
    for (const ModeSummary& m : posterior.modes) report.sse_vs_dp.push_back(sse(m.center, dp->gamma));
  }
  report.dp = std::move(dp);
  return report;
}

void write_report(const RunReport& report, const PooledPosterior& posterior, const std::string& outdir,
                  Interpolation interp) {
  if (posterior.modes.empty()) throw InvalidInput("report needs at least one mode");
  namespace fs = std::filesystem;
  const fs::path dir(outdir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + outdir + "': " + ec.message());

  const Grid& grid = posterior.modes.front().center.grid();
  const std::size_t n = grid.size();
  std::vector<const ChainSamples*> live;
  for (const ChainSamples& c : posterior.chains)
    if (c.retained() > 0) live.push_back(&c);
  const std::size_t n_v = live.front()->descriptor.n_v;

  // summary.json
  Json summary;
  Json config = Json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  summary["config"] = config;
  summary["seed"] = report.seed;
  summary["pooled_draws"] = posterior.size();
  summary["best_mode"] = posterior.best_mode;
  Json modes = Json::array();
  for (std::size_t m = 0; m < posterior.modes.size(); ++m) {
    const ModeSummary& s = posterior.modes[m];
    Json j;
    j["index"] = m;
    j["count"] = s.count;
    j["amplitude_distance"] = number(s.amplitude_distance);
    j["karcher_converged"] = s.converged;
    if (m < report.sse_vs_dp.size()) j["sse_vs_dp"] = number(report.sse_vs_dp[m]);
    j["center"] = vec(s.center.values());
    j["lower"] = vec(s.lower.values());
    j["upper"] = vec(s.upper.values());
    modes.push_back(j);
  }
  summary["modes"] = modes;
  if (report.dp) {
    summary["dp"] = {{"cost", number(report.dp->cost)},
                     {"lattice", report.dp->lattice},
                     {"gamma", vec(report.dp->gamma.values())}};
  }
  Json chains = Json::array();
  for (const ChainReport& c : report.chains) {
    Json j;
    j["seed"] = c.seed;
    j["retained"] = c.retained;
    j["completed_iterations"] = c.completed_iterations;
    Json acc;
    for (std::size_t a = 0; a < accept_columns; ++a) acc[kAcceptNames[a]] = number(c.acceptance[a]);
    j["acceptance"] = acc;
    j["ess"] = {{"sigma2", number(c.ess_sigma2)},
                {"sigma1_2", number(c.ess_sigma1_2)},
                {"sigma2_2", number(c.ess_sigma2_2)},
                {"coeffs", c.ess_coeffs}};
    j["failure"] = c.failure ? Json(*c.failure) : Json(nullptr);
    chains.push_back(j);
  }
  summary["chains"] = chains;
  write_json(dir / "summary.json", summary);

  // modes.csv
  {
    CsvWriter csv(dir / "modes.csv");
    std::vector<std::string> header{"t"};
    for (std::size_t m = 0; m < posterior.modes.size(); ++m)
      for (const char* part : {"center_", "lower_", "upper_"}) header.push_back(part + std::to_string(m));
    csv.header(header);
    for (std::size_t i = 0; i < n; ++i) {
      csv.real(grid[i]);
      for (const ModeSummary& s : posterior.modes) csv.real(s.center[i]).real(s.lower[i]).real(s.upper[i]);
      csv.end();
    }
    csv.close();
  }

  // gamma_samples.csv; every row is re-validated as a warping before writing.
  {
    CsvWriter csv(dir / "gamma_samples.csv");
    std::vector<std::string> header{"chain", "draw", "label"};
    for (const std::string& h : indexed("gamma_", n)) header.push_back(h);
    csv.header(header);
    std::size_t pooled = 0;
    for (std::size_t k = 0; k < posterior.chains.size(); ++k) {
      const ChainSamples& c = posterior.chains[k];
      for (Eigen::Index r = 0; r < c.gamma.rows(); ++r, ++pooled) {
        const Warping row(grid, c.gamma.row(r).transpose());
        csv.integer(static_cast<long long>(k)).integer(r).integer(posterior.labels[pooled]);
        for (std::size_t i = 0; i < n; ++i) csv.real(row[i]);
        csv.end();
      }
    }
    csv.close();
  }

  write_band(dir / "f1_posterior.csv", grid, live, &ChainSamples::f1);
  write_band(dir / "f2_posterior.csv", grid, live, &ChainSamples::f2);

  // warped_f2.csv: posterior-median f2 composed with each mode center.
  {
    std::vector<SampledFunction> warped;
    for (const ModeSummary& s : posterior.modes) warped.push_back(warp_function(posterior.f2_median, s.center, interp));
    CsvWriter csv(dir / "warped_f2.csv");
    std::vector<std::string> header{"t", "f1_median", "f2_median"};
    for (const std::string& h : indexed("mode_", warped.size())) header.push_back(h);
    csv.header(header);
    for (std::size_t i = 0; i < n; ++i) {
      csv.real(grid[i]).real(posterior.f1_median[i]).real(posterior.f2_median[i]);
      for (const SampledFunction& w : warped) csv.real(w[i]);
      csv.end();
    }
    csv.close();
  }

  // traces.csv
  {
    CsvWriter csv(dir / "traces.csv");
    std::vector<std::string> header{"chain", "draw"};
    for (const std::string& h : trace_columns(n_v)) header.push_back(h);
    csv.header(header);
    for (std::size_t k = 0; k < posterior.chains.size(); ++k) {
      const ChainSamples& c = posterior.chains[k];
      for (Eigen::Index r = 0; r < c.coeffs.rows(); ++r) {
        csv.integer(static_cast<long long>(k)).integer(r);
        for (const Eigen::VectorXd* v : {&c.sigma2, &c.sigma1_2, &c.sigma2_2, &c.s1_2, &c.s2_2, &c.l1, &c.l2, &c.phi})
          csv.real((*v)[r]);
        for (Eigen::Index j = 0; j < c.coeffs.cols(); ++j) csv.real(c.coeffs(r, j));
        for (bool a : c.accepted[static_cast<std::size_t>(r)]) csv.integer(a ? 1 : 0);
        csv.end();
      }
    }
    csv.close();
  }

  Json timings = Json::object();
  for (const auto& [k, v] : report.timings) timings[k] = v;
  write_json(dir / "timings.json", timings);
}

}  // namespace bayeswarp
