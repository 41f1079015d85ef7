#include "bayeswarp/io.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/model.hpp"
#include "bayeswarp/random.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bayeswarp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& token, std::size_t line) {
  if (token.empty()) throw ParseError("empty field", line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE) throw ParseError("not a number: '" + token + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + token + "'", line);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Series {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
};

// `expected` lists acceptable headers; the first one is named in errors.
Series read_series(const std::string& path, const std::vector<std::vector<std::string>>& expected) {
  const CsvTable table = parse_csv(slurp(path), path);
  if (std::find(expected.begin(), expected.end(), table.header) == expected.end()) {
    std::string want;
    for (const auto& h : expected.front()) want += (want.empty() ? "" : ",") + h;
    throw ParseError(path + ": expected header '" + want + "'", 1);
  }
  Series s;
  if (table.columns.empty()) throw ParseError(path + ": no columns", 1);
  s.t = table.columns[0];
  for (std::size_t c = 1; c < table.columns.size(); ++c) s.y.push_back(table.columns[c]);
  for (std::size_t i = 1; i < s.t.size(); ++i)
    if (!(s.t[i] > s.t[i - 1])) throw ParseError(path + ": time column must be strictly increasing", table.lines[i]);
  return s;
}

Series decimate(const Series& s, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("subsample fraction must lie in (0, 1]");
  const auto step = static_cast<std::size_t>(std::llround(1.0 / fraction));
  if (step <= 1) return s;
  Series out;
  out.y.resize(s.y.size());
  for (std::size_t i = 0; i < s.t.size(); i += step) {
    out.t.push_back(s.t[i]);
    for (std::size_t c = 0; c < s.y.size(); ++c) out.y[c].push_back(s.y[c][i]);
  }
  return out;
}

// Affine rescale of t to [0, 1], then linear resampling onto `grid`.
Eigen::VectorXd resample(const std::vector<double>& t, const std::vector<double>& y, const Grid& grid) {
  const double t0 = t.front(), span = t.back() - t.front();
  std::vector<double> u(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) u[i] = (t[i] - t0) / span;
  u.front() = 0.0;
  u.back() = 1.0;
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  std::size_t j = 0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double x = grid[n];
    while (j + 2 < u.size() && u[j + 1] < x) ++j;
    const double w = (x - u[j]) / (u[j + 1] - u[j]);
    out[static_cast<Eigen::Index>(n)] = y[j] + w * (y[j + 1] - y[j]);
  }
  return out;
}

Grid working_grid(std::size_t rows, const LoadOptions& options) {
  const std::size_t n = options.grid_size.value_or(rows);
  if (rows < 3) throw InvalidInput("need at least 3 samples after subsampling");
  return Grid::uniform(n);
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& path) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const std::vector<std::string> fields = split(line);
      if (table.header.empty()) {
        table.header = fields;
        table.columns.resize(fields.size());
        continue;
      }
      if (fields.size() != table.header.size())
        throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                             std::to_string(fields.size()),
                         line_no);
      for (std::size_t c = 0; c < fields.size(); ++c) table.columns[c].push_back(parse_number(fields[c], line_no));
      table.lines.push_back(line_no);
    }
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
  if (table.header.empty()) throw ParseError(path + ": missing header", 1);
  return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(slurp(path), path); }

SignalPair load_pair(const std::string& path, const LoadOptions& options) {
  const Series s = decimate(read_series(path, {{"t", "y1", "y2"}, {"t", "f1", "f2"}}), options.subsample);
  const Grid grid = working_grid(s.t.size(), options);
  return {SampledFunction(grid, resample(s.t, s.y[0], grid)), SampledFunction(grid, resample(s.t, s.y[1], grid))};
}

SignalPair load_pair(const std::string& path1, const std::string& path2, const LoadOptions& options) {
  const Series a = decimate(read_series(path1, {{"t", "y"}, {"t", "f"}}), options.subsample);
  const Series b = decimate(read_series(path2, {{"t", "y"}, {"t", "f"}}), options.subsample);
  if (a.t.size() != b.t.size()) throw InvalidInput("the two input files have different lengths");
  for (std::size_t i = 0; i < a.t.size(); ++i)
    if (std::abs(a.t[i] - b.t[i]) > 1e-9 * std::max(1.0, std::abs(a.t[i])))
      throw InvalidInput("the two input files use different time points");
  const Grid grid = working_grid(a.t.size(), options);
  return {SampledFunction(grid, resample(a.t, a.y[0], grid)), SampledFunction(grid, resample(b.t, b.y[0], grid))};
}

void write_pair(const std::string& path, const SampledFunction& a, const SampledFunction& b,
                const std::string& header) {
  if (a.grid() != b.grid()) throw InvalidInput("grid mismatch");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  std::fprintf(f, "%s\n", header.c_str());
  for (std::size_t i = 0; i < a.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", a.grid()[i], a[i], b[i]);
  if (std::fclose(f) != 0) throw InvalidInput("failed writing '" + path + "'");
}

void SimulationConfig::validate() const {
  if (centers1.empty() || centers2.empty()) throw InvalidInput("simulation needs at least one bump per function");
  if (!(width > 0.0)) throw InvalidInput("bump width must be positive");
  if (!(noise_variance >= 0.0)) throw InvalidInput("noise variance must be nonnegative");
  if (n < 3) throw InvalidInput("simulation grid needs at least 3 points");
}

SimulatedPair simulate_pair(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Grid grid = Grid::uniform(cfg.n);
  const Eigen::VectorXd& t = grid.points();
  auto bumps = [&](const std::vector<double>& centers) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(t.size());
    for (double c : centers)
      f += (cfg.height * (-(t.array() - c).square() / (2.0 * cfg.width * cfg.width)).exp()).matrix();
    return f;
  };
  const Eigen::VectorXd f1 = bumps(cfg.centers1), f2 = bumps(cfg.centers2);
  Rng rng(seed);
  const double sd = std::sqrt(cfg.noise_variance);
  const Eigen::VectorXd e1 = sd * standard_normal_vector(t.size(), rng);
  const Eigen::VectorXd e2 = sd * standard_normal_vector(t.size(), rng);
  return {SampledFunction(grid, f1 + e1), SampledFunction(grid, f2 + e2), SampledFunction(grid, f1),
          SampledFunction(grid, f2)};
}

SampledFunction smooth_for_dp(const SampledFunction& y) { return fit_gp(y).mean; }

}  // namespace bayeswarp
