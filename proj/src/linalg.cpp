#include "quqcd/linalg.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace quqcd {

namespace {
constexpr double kHermitianTol = 1e-10;
constexpr double kZeroEigRel = 1e-10;
}  // namespace

double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

int Spectrum::rank() const {
  int r = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (std::abs(eigenvalues[i]) > zero_tol) ++r;
  return r;
}

double Spectrum::gamma_min() const {
  double best = 0.0;
  bool found = false;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double v = eigenvalues[i];
    if (v > zero_tol && (!found || v < best)) {
      best = v;
      found = true;
    }
  }
  if (!found)
    throw Error(ErrorKind::RankDeficient, "spectrum has no positive part");
  return best;
}

Spectrum hermitian_eig(const ComplexMatrix& a) {
  const double defect = hermiticity_defect(a);
  if (defect > kHermitianTol)
    throw Error(ErrorKind::NonHermitian,
                "max-abs deviation from Hermiticity is " + std::to_string(defect));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalFailure, "eigendecomposition did not converge");

  const Eigen::Index n = a.rows();
  Spectrum spec;
  spec.eigenvalues.resize(n);
  spec.eigenvectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    spec.eigenvalues[i] = solver.eigenvalues()[n - 1 - i];
    spec.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    max_abs = std::max(max_abs, std::abs(spec.eigenvalues[i]));
  spec.zero_tol = kZeroEigRel * max_abs;
  return spec;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

ComplexMatrix tensor_power(const ComplexMatrix& a, int ell, std::int64_t dim_cap) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "tensor_power needs a square matrix");
  if (ell < 1) throw Error(ErrorKind::BadInput, "ell must be >= 1");
  const std::int64_t b = a.rows();
  std::int64_t dim = 1;
  for (int i = 0; i < ell; ++i) {
    if (dim > dim_cap / b)
      throw Error(ErrorKind::DimensionCapExceeded,
                  "b^ell exceeds cap " + std::to_string(dim_cap));
    dim *= b;
  }
  ComplexMatrix out = a;
  for (int i = 1; i < ell; ++i) out = kron(out, a);
  return out;
}

}  // namespace quqcd
