#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "quqcd/linalg.hpp"

namespace quqcd {

/// Validated density operator. Instances only exist after passing the
/// invariant checks (Hermitian within 1e-10, trace within 1e-10 of 1,
/// eigenvalues >= -1e-10), so downstream code never re-validates.
class DensityOperator {
 public:
  static DensityOperator validate(const ComplexMatrix& m);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  const Spectrum& spectrum() const { return spectrum_; }
  bool full_rank() const { return spectrum_.rank() == dim(); }

 private:
  DensityOperator(ComplexMatrix m, Spectrum s)
      : matrix_(std::move(m)), spectrum_(std::move(s)) {}

  ComplexMatrix matrix_;
  Spectrum spectrum_;
};

/// JSON wire format: {"dim": b, "entries": [[re, im], ...]} with b*b entries
/// in row-major order.
DensityOperator density_from_json(const nlohmann::json& j);
nlohmann::json density_to_json(const DensityOperator& rho);
DensityOperator load_density(const std::filesystem::path& path);

}  // namespace quqcd
