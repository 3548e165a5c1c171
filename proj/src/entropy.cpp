#include "quqcd/entropy.hpp"

#include <cmath>
#include <limits>

namespace quqcd {

namespace {
// Mass sigma may carry on rho's numerical null space before the divergence is
// declared infinite; larger leaks are genuine support violations.
constexpr double kSupportLeakTol = 1e-9;
}  // namespace

double quantum_relative_entropy(const DensityOperator& sigma,
                                const DensityOperator& rho) {
  if (sigma.dim() != rho.dim())
    throw Error(ErrorKind::DimensionMismatch,
                "operators live on different spaces");

  const Spectrum& ss = sigma.spectrum();
  double tr_s_log_s = 0.0;
  for (Eigen::Index i = 0; i < ss.eigenvalues.size(); ++i) {
    const double s = ss.eigenvalues[i];
    if (s > ss.zero_tol) tr_s_log_s += s * std::log(s);
  }

  const Spectrum& rs = rho.spectrum();
  double tr_s_log_r = 0.0;
  double leak = 0.0;
  for (Eigen::Index j = 0; j < rs.eigenvalues.size(); ++j) {
    const double weight =
        (rs.eigenvectors.col(j).adjoint() * sigma.matrix() *
         rs.eigenvectors.col(j))(0, 0).real();
    const double r = rs.eigenvalues[j];
    if (r > rs.zero_tol)
      tr_s_log_r += weight * std::log(r);
    else
      leak += std::max(weight, 0.0);
  }
  if (leak > kSupportLeakTol) return std::numeric_limits<double>::infinity();
  return tr_s_log_s - tr_s_log_r;
}

}  // namespace quqcd
