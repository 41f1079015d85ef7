#pragma once

#include "bayeswarp/grid.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>

namespace bayeswarp {

enum class BasisFamily { fourier, legendre };

BasisFamily parse_basis_family(const std::string& name);
std::string to_string(BasisFamily family);

struct BasisDescriptor {
  BasisFamily family = BasisFamily::fourier;
  /// Number of coefficients. Fourier elements come in (sin, cos) pairs, so
  /// n_v must be even there.
  std::size_t n_v = 10;
  Grid grid = Grid::uniform(101);
};

/// Evaluated basis: row k holds element b_k on the grid. Elements are
/// orthonormal and zero-mean under the trapezoid inner product.
///
/// Fourier: sqrt(2) sin(2 pi n t), sqrt(2) cos(2 pi n t) for n = 1..n_v/2.
/// Legendre: shifted Legendre polynomials of degree 1..n_v from the
/// three-term recurrence on 2t - 1, then Gram-Schmidt against the constant
/// and the lower degrees under the discrete inner product.
class Basis {
 public:
  explicit Basis(BasisDescriptor descriptor);

  const BasisDescriptor& descriptor() const { return descriptor_; }
  const Grid& grid() const { return descriptor_.grid; }
  std::size_t dimension() const { return descriptor_.n_v; }
  const Eigen::MatrixXd& table() const { return table_; }
  /// Eigenvalue index of coefficient k (1-based frequency; Fourier pairs share it).
  std::size_t ordinal(std::size_t k) const;

 private:
  BasisDescriptor descriptor_;
  Eigen::MatrixXd table_;
};

/// Eigenvalue index of coefficient k (0-based) for a family.
std::size_t basis_ordinal(BasisFamily family, std::size_t k);

Eigen::MatrixXd eval_basis(const BasisDescriptor& descriptor);

struct TangentCoeffs {
  BasisDescriptor descriptor;
  Eigen::VectorXd v;
};

TangentFunction coeffs_to_function(const Basis& basis, const Eigen::VectorXd& v);
TangentFunction coeffs_to_function(const TangentCoeffs& c);
TangentCoeffs project_to_coeffs(const TangentFunction& g, const Basis& basis);
TangentCoeffs project_to_coeffs(const TangentFunction& g, const BasisDescriptor& descriptor);

/// Karhunen-Loeve spectrum: lambda_k = sigma_g^2 / k^2, coefficient k drawn
/// as N(0, lambda_k^2).
struct PriorSpectrum {
  double sigma_g = 1.0;
  Eigen::VectorXd lambdas;

  /// Per-coefficient prior variances lambda_k^2 (the diagonal of C).
  Eigen::VectorXd variances() const { return lambdas.cwiseAbs2(); }
};

PriorSpectrum prior_spectrum(double sigma_g, const BasisDescriptor& descriptor);

}  // namespace bayeswarp
