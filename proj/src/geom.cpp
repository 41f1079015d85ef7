#include "bayeswarp/geom.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/fdcore.hpp"
#include "bayeswarp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bayeswarp {

namespace {

template <class A, class B>
void require_same_grid(const A& a, const B& b) {
  if (a.grid() != b.grid()) throw InvalidInput("grid mismatch");
}

Eigen::VectorXd normalized(const Grid& grid, Eigen::VectorXd v) {
  const double n = numeric::norm(grid, v);
  if (!(n > 0.0)) throw NumericalError("cannot normalize a zero function");
  return v / n;
}

}  // namespace

Psi gamma_to_psi(const Warping& gamma) {
  Eigen::VectorXd rate = numeric::derivative(gamma.grid(), gamma.values());
  for (Eigen::Index i = 0; i < rate.size(); ++i) rate[i] = std::sqrt(std::max(rate[i], 0.0));
  return Psi(gamma.grid(), normalized(gamma.grid(), std::move(rate)));
}

Warping psi_to_gamma(const Psi& psi) {
  Eigen::VectorXd s = numeric::cumtrapz(psi.grid(), psi.values().cwiseAbs2());
  const double total = s[s.size() - 1];
  if (!(total > 0.0)) throw NumericalError("psi has zero mass");
  s /= total;
  s[s.size() - 1] = 1.0;
  return Warping(psi.grid(), std::move(s));
}

namespace sphere {

Eigen::VectorXd exp(const Grid& grid, const Eigen::VectorXd& base, const Eigen::VectorXd& v) {
  const double r = numeric::norm(grid, v);
  if (r < 1e-15) return base;
  return std::cos(r) * base + (std::sin(r) / r) * v;
}

Eigen::VectorXd log(const Grid& grid, const Eigen::VectorXd& base, const Eigen::VectorXd& x) {
  const double theta = dist(grid, base, x);
  if (theta >= kInjectivityRadius) throw InjectivityError("log map at an antipodal point");
  const Eigen::VectorXd perp = x - std::clamp(numeric::inner(grid, base, x), -1.0, 1.0) * base;
  const double pn = numeric::norm(grid, perp);
  if (theta < 1e-15 || pn < 1e-300) return Eigen::VectorXd::Zero(base.size());
  return (theta / pn) * perp;
}

// Chord form 2 asin(|a - b| / 2): equal to acos<a, b> on the unit sphere but
// exact at a = b, where acos loses half the digits.
double dist(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 2.0 * std::asin(std::min(1.0, 0.5 * numeric::norm(grid, a - b)));
}

}  // namespace sphere

Psi exp_map(const TangentFunction& g) {
  const Grid& grid = g.grid();
  const double r = numeric::norm(grid, g.values());
  if (r >= kInjectivityRadius) throw InjectivityError("tangent vector norm beyond the injectivity radius");
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(g.values().size());
  if (r < 1e-15) return Psi(grid, one);
  return Psi(grid, normalized(grid, std::cos(r) * one + (std::sin(r) / r) * g.values()));
}

TangentFunction inv_exp_map(const Psi& psi) {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(psi.values().size());
  return TangentFunction(psi.grid(), sphere::log(psi.grid(), one, psi.values()));
}

double geodesic_dist(const Psi& a, const Psi& b) {
  require_same_grid(a, b);
  return sphere::dist(a.grid(), a.values(), b.values());
}

KarcherResult karcher_center(const std::vector<Psi>& samples, CenterStatistic statistic,
                             const KarcherOptions& options) {
  if (samples.empty()) throw InvalidInput("karcher_center needs at least one sample");
  const Grid& grid = samples.front().grid();
  for (const Psi& s : samples) require_same_grid(s, samples.front());

  Eigen::VectorXd chord = Eigen::VectorXd::Zero(samples.front().values().size());
  for (const Psi& s : samples) chord += s.values();
  Eigen::VectorXd mu = normalized(grid, chord);

  bool dispersed = false;
  for (const Psi& s : samples) {
    if (sphere::dist(grid, mu, s.values()) >= 0.5 * M_PI) dispersed = true;
  }

  auto objective = [&](const Eigen::VectorXd& p) {
    double acc = 0.0;
    for (const Psi& s : samples) {
      const double d = sphere::dist(grid, p, s.values());
      acc += statistic == CenterStatistic::mean ? d * d : d;
    }
    return acc;
  };

  KarcherResult result{Psi(grid, mu), false, 0, dispersed};
  double current = objective(mu);
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(mu.size());
    double weight = 0.0;
    for (const Psi& s : samples) {
      const Eigen::VectorXd v = sphere::log(grid, mu, s.values());
      if (statistic == CenterStatistic::mean) {
        direction += v;
        weight += 1.0;
      } else {
        // Weiszfeld weights; samples sitting on the iterate contribute nothing.
        const double d = numeric::norm(grid, v);
        if (d < 1e-12) continue;
        direction += v / d;
        weight += 1.0 / d;
      }
    }
    if (weight == 0.0) {
      result.converged = true;
      break;
    }
    direction /= weight;
    if (numeric::norm(grid, direction) < options.tolerance) {
      result.converged = true;
      break;
    }
    double step = options.initial_step;
    bool moved = false;
    while (step > 1e-10) {
      Eigen::VectorXd candidate = normalized(grid, sphere::exp(grid, mu, step * direction));
      const double value = objective(candidate);
      if (value < current) {
        mu = std::move(candidate);
        current = value;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  result.center = Psi(grid, mu);
  return result;
}

Eigen::MatrixXd pairwise_distances(const std::vector<Psi>& samples, unsigned threads) {
  const std::size_t n = samples.size();
  for (const Psi& s : samples) require_same_grid(s, samples.front());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      d(ii, static_cast<Eigen::Index>(j)) = geodesic_dist(samples[i], samples[j]);
    }
  });
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(j, i) = d(i, j);
  return d;
}

namespace {

struct Merge {
  Eigen::Index a;
  Eigen::Index b;
  double height;
};

// Nearest-neighbour chain algorithm; complete linkage is reducible, so the
// merges sorted by height reproduce the greedy agglomerative dendrogram.
std::vector<Merge> complete_linkage(Eigen::MatrixXd d) {
  const Eigen::Index n = d.rows();
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  std::vector<Eigen::Index> chain;
  Eigen::Index next_start = 0;
  while (static_cast<Eigen::Index>(merges.size()) < n - 1) {
    if (chain.empty()) {
      while (!active[static_cast<std::size_t>(next_start)]) ++next_start;
      chain.push_back(next_start);
    }
    const Eigen::Index a = chain.back();
    const Eigen::Index prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
    Eigen::Index best = -1;
    double best_d = 0.0;
    if (prev >= 0) {
      best = prev;
      best_d = d(a, prev);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == a || !active[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || d(a, j) < best_d) {
        best = j;
        best_d = d(a, j);
      }
    }
    if (best == prev) {
      chain.pop_back();
      chain.pop_back();
      const Eigen::Index keep = std::min(a, prev), drop = std::max(a, prev);
      merges.push_back({keep, drop, best_d});
      for (Eigen::Index k = 0; k < n; ++k) {
        if (!active[static_cast<std::size_t>(k)] || k == keep || k == drop) continue;
        const double m = std::max(d(k, keep), d(k, drop));
        d(k, keep) = m;
        d(keep, k) = m;
      }
      active[static_cast<std::size_t>(drop)] = 0;
    } else {
      chain.push_back(best);
    }
  }
  std::stable_sort(merges.begin(), merges.end(),
                   [](const Merge& x, const Merge& y) { return x.height < y.height; });
  return merges;
}

Eigen::Index find_root(std::vector<Eigen::Index>& parent, Eigen::Index x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

std::vector<int> cluster_distance_matrix(const Eigen::MatrixXd& distances, const ClusterOptions& options) {
  const Eigen::Index n = distances.rows();
  if (n == 0) throw InvalidInput("cluster_modes needs at least one sample");
  if (distances.cols() != n) throw InvalidInput("distance matrix must be square");
  if (n == 1) return {0};

  const std::vector<Merge> merges = complete_linkage(distances);
  const auto below = static_cast<Eigen::Index>(
      std::count_if(merges.begin(), merges.end(), [&](const Merge& m) { return m.height <= options.tau; }));
  const Eigen::Index k_threshold = n - below;
  const Eigen::Index k =
      std::clamp<Eigen::Index>(std::min<Eigen::Index>(static_cast<Eigen::Index>(options.k_max), k_threshold), 1, n);

  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  for (Eigen::Index m = 0; m < n - k; ++m) {
    const Eigen::Index ra = find_root(parent, merges[static_cast<std::size_t>(m)].a);
    const Eigen::Index rb = find_root(parent, merges[static_cast<std::size_t>(m)].b);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> root_label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(find_root(parent, i));
    if (root_label[r] < 0) root_label[r] = next++;
    labels[static_cast<std::size_t>(i)] = root_label[r];
  }
  return labels;
}

std::vector<int> cluster_modes(const std::vector<Psi>& samples, const ClusterOptions& options) {
  if (samples.empty()) throw InvalidInput("cluster_modes needs at least one sample");
  return cluster_distance_matrix(pairwise_distances(samples, options.threads), options);
}

}  // namespace bayeswarp
