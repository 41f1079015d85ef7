#include "bayeswarp/basis.hpp"

#include "bayeswarp/error.hpp"
#include "bayeswarp/fdcore.hpp"

#include <cmath>

namespace bayeswarp {

BasisFamily parse_basis_family(const std::string& name) {
  if (name == "fourier") return BasisFamily::fourier;
  if (name == "legendre") return BasisFamily::legendre;
  throw InvalidInput("unknown basis family '" + name + "'");
}

std::string to_string(BasisFamily family) { return family == BasisFamily::fourier ? "fourier" : "legendre"; }

namespace {

void validate(const BasisDescriptor& d) {
  if (d.n_v < 1) throw InvalidInput("basis needs at least one element");
  if (d.family == BasisFamily::fourier && d.n_v % 2 != 0)
    throw InvalidInput("fourier basis needs an even number of elements");
  if (d.n_v + 1 >= d.grid.size()) throw InvalidInput("basis larger than the grid can resolve");
}

Eigen::MatrixXd fourier_table(const BasisDescriptor& d) {
  const Eigen::VectorXd& t = d.grid.points();
  const auto n_v = static_cast<Eigen::Index>(d.n_v);
  Eigen::MatrixXd table(n_v, t.size());
  for (Eigen::Index pair = 0; pair < n_v / 2; ++pair) {
    const double w = 2.0 * M_PI * static_cast<double>(pair + 1);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      table(2 * pair, i) = std::sqrt(2.0) * std::sin(w * t[i]);
      table(2 * pair + 1, i) = std::sqrt(2.0) * std::cos(w * t[i]);
    }
  }
  return table;
}

Eigen::MatrixXd legendre_table(const BasisDescriptor& d) {
  const Grid& grid = d.grid;
  const Eigen::VectorXd x = 2.0 * grid.points().array() - 1.0;
  const auto n_v = static_cast<Eigen::Index>(d.n_v);
  // Rows 0..n_v hold P_0..P_{n_v}(2t-1).
  Eigen::MatrixXd raw(n_v + 1, x.size());
  raw.row(0).setOnes();
  raw.row(1) = x.transpose();
  for (Eigen::Index k = 1; k < n_v; ++k) {
    const double kk = static_cast<double>(k);
    raw.row(k + 1) =
        ((2.0 * kk + 1.0) * x.transpose().cwiseProduct(raw.row(k)) - kk * raw.row(k - 1)) / (kk + 1.0);
  }
  // Modified Gram-Schmidt (twice) in the trapezoid inner product; the constant
  // is kept only to orthogonalize against and then dropped.
  Eigen::MatrixXd ortho(n_v + 1, x.size());
  for (Eigen::Index k = 0; k <= n_v; ++k) {
    Eigen::VectorXd v = raw.row(k).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd e = ortho.row(j).transpose();
        v -= numeric::inner(grid, v, e) * e;
      }
    }
    ortho.row(k) = (v / numeric::norm(grid, v)).transpose();
  }
  return ortho.bottomRows(n_v);
}

}  // namespace

Eigen::MatrixXd eval_basis(const BasisDescriptor& descriptor) {
  validate(descriptor);
  return descriptor.family == BasisFamily::fourier ? fourier_table(descriptor) : legendre_table(descriptor);
}

Basis::Basis(BasisDescriptor descriptor) : descriptor_(std::move(descriptor)), table_(eval_basis(descriptor_)) {}

std::size_t Basis::ordinal(std::size_t k) const { return basis_ordinal(descriptor_.family, k); }

std::size_t basis_ordinal(BasisFamily family, std::size_t k) {
  return family == BasisFamily::fourier ? k / 2 + 1 : k + 1;
}

TangentFunction coeffs_to_function(const Basis& basis, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != basis.dimension())
    throw InvalidInput("coefficient count does not match basis dimension");
  return TangentFunction(basis.grid(), basis.table().transpose() * v);
}

TangentFunction coeffs_to_function(const TangentCoeffs& c) { return coeffs_to_function(Basis(c.descriptor), c.v); }

TangentCoeffs project_to_coeffs(const TangentFunction& g, const Basis& basis) {
  if (g.grid() != basis.grid()) throw InvalidInput("grid mismatch");
  Eigen::VectorXd v(static_cast<Eigen::Index>(basis.dimension()));
  for (Eigen::Index k = 0; k < v.size(); ++k)
    v[k] = numeric::inner(basis.grid(), g.values(), basis.table().row(k).transpose());
  return {basis.descriptor(), std::move(v)};
}

TangentCoeffs project_to_coeffs(const TangentFunction& g, const BasisDescriptor& descriptor) {
  return project_to_coeffs(g, Basis(descriptor));
}

PriorSpectrum prior_spectrum(double sigma_g, const BasisDescriptor& descriptor) {
  if (!(sigma_g > 0.0)) throw InvalidInput("sigma_g must be positive");
  validate(descriptor);
  PriorSpectrum s;
  s.sigma_g = sigma_g;
  s.lambdas.resize(static_cast<Eigen::Index>(descriptor.n_v));
  for (std::size_t k = 0; k < descriptor.n_v; ++k) {
    const auto ord = static_cast<double>(basis_ordinal(descriptor.family, k));
    s.lambdas[static_cast<Eigen::Index>(k)] = sigma_g * sigma_g / (ord * ord);
  }
  return s;
}

}  // namespace bayeswarp
