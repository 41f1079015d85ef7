#include "bayeswarp/fdcore.hpp"

#include "bayeswarp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bayeswarp {

namespace {

bool nearly_uniform(const Eigen::VectorXd& p) {
  const Eigen::Index n = p.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(p[i] - static_cast<double>(i) * h) > 1e-12) return false;
  }
  return true;
}

void require_finite(const Eigen::VectorXd& values, const char* what) {
  if (!values.allFinite()) throw InvalidInput(std::string(what) + ": non-finite value");
}

void require_size(const Grid& grid, const Eigen::VectorXd& values, const char* what) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw InvalidInput(std::string(what) + ": value count does not match grid size");
}

template <class A, class B>
void require_same_grid(const A& a, const B& b) {
  if (a.grid() != b.grid()) throw InvalidInput("grid mismatch");
}

}  // namespace

Grid Grid::uniform(std::size_t n) {
  if (n < 3) throw InvalidInput("grid needs at least 3 points");
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 0.0, 1.0);
  p[0] = 0.0;
  p[p.size() - 1] = 1.0;
  return Grid(std::make_shared<const Eigen::VectorXd>(std::move(p)), true);
}

Grid::Grid(std::vector<double> points) {
  if (points.size() < 3) throw InvalidInput("grid needs at least 3 points");
  if (points.front() != 0.0 || points.back() != 1.0)
    throw InvalidInput("grid endpoints must be exactly 0 and 1");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] > points[i - 1])) throw InvalidInput("grid points must be strictly increasing");
  }
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(points.data(), static_cast<Eigen::Index>(points.size()));
  uniform_ = nearly_uniform(p);
  points_ = std::make_shared<const Eigen::VectorXd>(std::move(p));
}

Grid::Grid(std::shared_ptr<const Eigen::VectorXd> points, bool uniform)
    : points_(std::move(points)), uniform_(uniform) {}

bool Grid::operator==(const Grid& other) const {
  if (points_ == other.points_) return true;
  return points_->size() == other.points_->size() && *points_ == *other.points_;
}

namespace detail {

void SampledTag::check(const Grid& grid, Eigen::VectorXd& values) {
  require_size(grid, values, "sampled function");
  require_finite(values, "sampled function");
}

void SrvfTag::check(const Grid& grid, Eigen::VectorXd& values) {
  require_size(grid, values, "srvf");
  require_finite(values, "srvf");
}

void WarpingTag::check(const Grid& grid, Eigen::VectorXd& values) {
  require_size(grid, values, "warping");
  require_finite(values, "warping");
  const Eigen::Index n = values.size();
  if (std::abs(values[0]) > 1e-12 || std::abs(values[n - 1] - 1.0) > 1e-12)
    throw InvalidInput("warping must satisfy gamma(0)=0 and gamma(1)=1");
  values[0] = 0.0;
  values[n - 1] = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (values[i] < values[i - 1] - 1e-12) throw InvalidInput("warping must be nondecreasing");
  }
}

void PsiTag::check(const Grid& grid, Eigen::VectorXd& values) {
  require_size(grid, values, "psi");
  require_finite(values, "psi");
  if (std::abs(numeric::norm(grid, values) - 1.0) > 1e-8) throw InvalidInput("psi must have unit L2 norm");
}

void TangentTag::check(const Grid& grid, Eigen::VectorXd& values) {
  require_size(grid, values, "tangent function");
  require_finite(values, "tangent function");
  const double scale = std::max(1.0, numeric::norm(grid, values));
  if (std::abs(numeric::trapz(grid, values)) > 1e-8 * scale)
    throw InvalidInput("tangent function must integrate to zero");
}

}  // namespace detail

Warping identity_warping(const Grid& grid) { return Warping(grid, grid.points()); }

namespace numeric {

double trapz(const Grid& grid, const Eigen::VectorXd& values) {
  const Eigen::VectorXd& t = grid.points();
  double acc = 0.0;
  for (Eigen::Index i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (values[i] + values[i - 1]);
  return acc;
}

Eigen::VectorXd trapz_weights(const Grid& grid) {
  const Eigen::VectorXd& t = grid.points();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(t.size());
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    const double h = 0.5 * (t[i] - t[i - 1]);
    w[i - 1] += h;
    w[i] += h;
  }
  return w;
}

Eigen::VectorXd cumtrapz(const Grid& grid, const Eigen::VectorXd& values) {
  const Eigen::VectorXd& t = grid.points();
  Eigen::VectorXd out(t.size());
  out[0] = 0.0;
  for (Eigen::Index i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (values[i] + values[i - 1]);
  return out;
}

Eigen::VectorXd derivative(const Grid& grid, const Eigen::VectorXd& f) {
  const Eigen::VectorXd& t = grid.points();
  const Eigen::Index n = t.size();
  Eigen::VectorXd d(n);
  if (grid.is_uniform()) {
    const double h = 1.0 / static_cast<double>(n - 1);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
  }
  // Derivative of the quadratic through three neighbouring points.
  auto three_point = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c, double x) {
    const double ta = t[a], tb = t[b], tc = t[c];
    return f[a] * (2.0 * x - tb - tc) / ((ta - tb) * (ta - tc)) +
           f[b] * (2.0 * x - ta - tc) / ((tb - ta) * (tb - tc)) +
           f[c] * (2.0 * x - ta - tb) / ((tc - ta) * (tc - tb));
  };
  d[0] = three_point(0, 1, 2, t[0]);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = three_point(i - 1, i, i + 1, t[i]);
  d[n - 1] = three_point(n - 3, n - 2, n - 1, t[n - 1]);
  return d;
}

double inner(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return trapz(grid, a.cwiseProduct(b));
}

double norm(const Grid& grid, const Eigen::VectorXd& a) { return std::sqrt(std::max(0.0, inner(grid, a, a))); }

Eigen::Index locate(const Grid& grid, double x) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  if (x <= 0.0) return 0;
  if (x >= 1.0) return n - 2;
  if (grid.is_uniform()) {
    const auto j = static_cast<Eigen::Index>(x * static_cast<double>(n - 1));
    return std::min(j, n - 2);
  }
  const Eigen::VectorXd& t = grid.points();
  const double* begin = t.data();
  const double* it = std::upper_bound(begin, begin + n, x);
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(it - begin) - 1, 0, n - 2);
}

Interpolant::Interpolant(const Grid& grid, const Eigen::VectorXd& values, Interpolation kind)
    : grid_(grid), values_(values), kind_(kind) {
  if (kind_ == Interpolation::cubic_hermite) slopes_ = derivative(grid, values);
}

double Interpolant::value(double x) const {
  double v = 0.0, s = 0.0;
  evaluate(x, v, s);
  return v;
}

void Interpolant::evaluate(double x, double& value, double& slope) const {
  x = std::clamp(x, 0.0, 1.0);
  const Eigen::Index j = locate(grid_, x);
  const double t0 = grid_[static_cast<std::size_t>(j)];
  const double t1 = grid_[static_cast<std::size_t>(j + 1)];
  const double h = t1 - t0;
  const double f0 = values_[j], f1 = values_[j + 1];
  if (kind_ == Interpolation::linear) {
    const double u = (x - t0) / h;
    value = f0 + u * (f1 - f0);
    slope = (f1 - f0) / h;
    return;
  }
  const double m0 = slopes_[j], m1 = slopes_[j + 1];
  const double u = (x - t0) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  value = h00 * f0 + h10 * h * m0 + h01 * f1 + h11 * h * m1;
  const double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
  const double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
  slope = (d00 * f0 + d01 * f1) / h + d10 * m0 + d11 * m1;
}

}  // namespace numeric

SampledFunction derivative(const SampledFunction& f) {
  return SampledFunction(f.grid(), numeric::derivative(f.grid(), f.values()));
}

Srvf to_srvf(const SampledFunction& f) {
  const Eigen::VectorXd d = numeric::derivative(f.grid(), f.values());
  Eigen::VectorXd q(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double s = d[i] > 0 ? 1.0 : (d[i] < 0 ? -1.0 : 0.0);
    q[i] = s * std::sqrt(std::abs(d[i]));
  }
  return Srvf(f.grid(), std::move(q));
}

SampledFunction from_srvf(const Srvf& q, double f0) {
  const Eigen::VectorXd integrand = q.values().cwiseProduct(q.values().cwiseAbs());
  Eigen::VectorXd f = numeric::cumtrapz(q.grid(), integrand);
  f.array() += f0;
  return SampledFunction(q.grid(), std::move(f));
}

namespace {

Eigen::VectorXd compose(const Grid& grid, const Eigen::VectorXd& values, const Warping& gamma,
                        Interpolation interp) {
  const numeric::Interpolant f(grid, values, interp);
  Eigen::VectorXd out(values.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double x = gamma.values()[i];
    if (x < -1e-9 || x > 1.0 + 1e-9) throw InvalidInput("warping range leaves [0,1]");
    out[i] = f.value(x);
  }
  return out;
}

}  // namespace

SampledFunction warp_function(const SampledFunction& f, const Warping& gamma, Interpolation interp) {
  require_same_grid(f, gamma);
  return SampledFunction(f.grid(), compose(f.grid(), f.values(), gamma, interp));
}

Srvf warp_srvf(const Srvf& q, const Warping& gamma, Interpolation interp) {
  require_same_grid(q, gamma);
  Eigen::VectorXd out = compose(q.grid(), q.values(), gamma, interp);
  const Eigen::VectorXd rate = numeric::derivative(gamma.grid(), gamma.values());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] *= std::sqrt(std::max(rate[i], 0.0));
  return Srvf(q.grid(), std::move(out));
}

double l2_dist(const Srvf& a, const Srvf& b) {
  require_same_grid(a, b);
  return numeric::norm(a.grid(), a.values() - b.values());
}

double l2_dist(const SampledFunction& a, const SampledFunction& b) {
  require_same_grid(a, b);
  return numeric::norm(a.grid(), a.values() - b.values());
}

double sse(const Warping& a, const Warping& b) {
  require_same_grid(a, b);
  return (a.values() - b.values()).squaredNorm();
}

}  // namespace bayeswarp
