#include "quqcd/density.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace quqcd {

namespace {
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = -1e-10;
}  // namespace

DensityOperator DensityOperator::validate(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(ErrorKind::DimensionMismatch, "density matrix must be square");
  // hermitian_eig enforces the 1e-10 Hermiticity gate.
  Spectrum spec = hermitian_eig(m);
  const double trace_dev = std::abs(m.trace().real() - 1.0) + std::abs(m.trace().imag());
  if (trace_dev > kTraceTol)
    throw Error(ErrorKind::TraceNotOne,
                "trace deviates from 1 by " + std::to_string(trace_dev));
  const double min_eig = spec.eigenvalues[spec.eigenvalues.size() - 1];
  if (min_eig < kPsdTol)
    throw Error(ErrorKind::NotPsd,
                "most negative eigenvalue is " + std::to_string(min_eig));
  return DensityOperator(m, std::move(spec));
}

DensityOperator density_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    throw Error(ErrorKind::BadInput, "density JSON needs \"dim\" and \"entries\"");
  if (!j["dim"].is_number_integer())
    throw Error(ErrorKind::BadInput, "\"dim\" must be an integer");
  const std::int64_t dim = j["dim"].get<std::int64_t>();
  if (dim < 1 || dim > 64)
    throw Error(ErrorKind::BadInput, "\"dim\" out of range [1, 64]");
  const auto& entries = j["entries"];
  if (!entries.is_array() || static_cast<std::int64_t>(entries.size()) != dim * dim)
    throw Error(ErrorKind::BadInput,
                "\"entries\" must hold dim*dim [re, im] pairs in row-major order");
  ComplexMatrix m(dim, dim);
  for (std::int64_t k = 0; k < dim * dim; ++k) {
    const auto& e = entries[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw Error(ErrorKind::BadInput, "entry " + std::to_string(k) +
                                           " is not an [re, im] pair");
    m(k / dim, k % dim) =
        std::complex<double>(e[0].get<double>(), e[1].get<double>());
  }
  return DensityOperator::validate(m);
}

nlohmann::json density_to_json(const DensityOperator& rho) {
  nlohmann::json entries = nlohmann::json::array();
  const auto& m = rho.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"dim", rho.dim()}, {"entries", std::move(entries)}};
}

DensityOperator load_density(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::BadInput, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadInput,
                "malformed JSON in " + path.string() + ": " + e.what());
  }
  return density_from_json(j);
}

}  // namespace quqcd
