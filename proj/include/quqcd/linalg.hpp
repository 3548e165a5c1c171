#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "quqcd/errors.hpp"

namespace quqcd {

using ComplexMatrix = Eigen::MatrixXcd;

/// Default tensor-space cap: b^ell may not exceed this anywhere in the
/// library unless a caller raises it explicitly.
inline constexpr std::int64_t kDefaultDimCap = 4096;

/// max-abs entry of (a - a^dagger).
double hermiticity_defect(const ComplexMatrix& a);

double frobenius_norm(const ComplexMatrix& a);

/// Eigensystem of a Hermitian matrix, eigenvalues sorted descending.
/// zero_tol is the magnitude below which an eigenvalue counts as zero
/// (relative rule: 1e-10 times the largest eigenvalue magnitude).
struct Spectrum {
  Eigen::VectorXd eigenvalues;   // descending
  ComplexMatrix eigenvectors;    // column k pairs with eigenvalues[k]
  double zero_tol = 0.0;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  int rank() const;
  /// Smallest eigenvalue above zero_tol. Throws RankDeficient if none.
  double gamma_min() const;
  double gamma_max() const { return eigenvalues.size() ? eigenvalues[0] : 0.0; }
};

/// Validates Hermiticity (max-abs defect <= 1e-10) and diagonalizes.
Spectrum hermitian_eig(const ComplexMatrix& a);

/// Kronecker product, row-major index convention: (i*rows(b)+k, j*cols(b)+l).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// a^{tensor ell}; site 0 is the most significant digit of the row index.
/// Throws DimensionCapExceeded when rows(a)^ell > dim_cap.
ComplexMatrix tensor_power(const ComplexMatrix& a, int ell,
                           std::int64_t dim_cap = kDefaultDimCap);

}  // namespace quqcd
