#include <doctest.h>

#include <complex>

#include "quqcd/linalg.hpp"
#include "quqcd/rng.hpp"

using quqcd::ComplexMatrix;

namespace {

ComplexMatrix random_complex(int rows, int cols, quqcd::CounterRng& rng) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = {rng.next_gaussian(), rng.next_gaussian()};
  return m;
}

// Independently coded Kronecker product with explicit index arithmetic.
ComplexMatrix naive_kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace

TEST_CASE("hermiticity defect") {
  ComplexMatrix h(2, 2);
  h << std::complex<double>(1.0, 0.0), std::complex<double>(0.2, 0.5),
      std::complex<double>(0.2, -0.5), std::complex<double>(-3.0, 0.0);
  CHECK(quqcd::hermiticity_defect(h) == doctest::Approx(0.0).epsilon(1e-15));

  h(1, 0) = {0.2, -0.4};
  CHECK(quqcd::hermiticity_defect(h) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("kron matches a naive quadruple loop") {
  quqcd::CounterRng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix a = random_complex(3, 2, rng);
    const ComplexMatrix b = random_complex(2, 4, rng);
    const ComplexMatrix got = quqcd::kron(a, b);
    const ComplexMatrix want = naive_kron(a, b);
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("tensor power dimensions and cap") {
  quqcd::CounterRng rng(42);
  const ComplexMatrix a = random_complex(3, 3, rng);
  const ComplexMatrix a3 = quqcd::tensor_power(a, 3);
  REQUIRE(a3.rows() == 27);
  CHECK((a3 - naive_kron(naive_kron(a, a), a)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(quqcd::tensor_power(a, 0), quqcd::Error);

  CHECK_THROWS_AS(quqcd::tensor_power(a, 6, 256), quqcd::Error);
  try {
    quqcd::tensor_power(a, 40);
    FAIL("cap not enforced");
  } catch (const quqcd::Error& e) {
    CHECK(e.kind() == quqcd::ErrorKind::DimensionCapExceeded);
  }
}

TEST_CASE("hermitian eigensystem against the 2x2 closed form") {
  const double a = 0.9, b = -0.4;
  const std::complex<double> c{0.3, -0.7};
  ComplexMatrix m(2, 2);
  m << a, c, std::conj(c), b;

  const quqcd::Spectrum s = quqcd::hermitian_eig(m);
  const double disc = std::sqrt((a - b) * (a - b) + 4.0 * std::norm(c));
  const double hi = 0.5 * (a + b + disc);
  const double lo = 0.5 * (a + b - disc);
  REQUIRE(s.eigenvalues.size() == 2);
  CHECK(s.eigenvalues[0] == doctest::Approx(hi).epsilon(1e-12));
  CHECK(s.eigenvalues[1] == doctest::Approx(lo).epsilon(1e-12));

  const ComplexMatrix rebuilt =
      s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint();
  CHECK((rebuilt - m).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("hermitian eig rejects non-hermitian input") {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.3, 0.1, 1.0;
  try {
    quqcd::hermitian_eig(m);
    FAIL("accepted non-hermitian matrix");
  } catch (const quqcd::Error& e) {
    CHECK(e.kind() == quqcd::ErrorKind::NonHermitian);
  }
}

TEST_CASE("spectrum rank and gamma_min") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  const quqcd::Spectrum s = quqcd::hermitian_eig(m);
  CHECK(s.rank() == 2);
  CHECK(s.gamma_min() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.gamma_max() == doctest::Approx(0.5).epsilon(1e-14));

  const quqcd::Spectrum zero = quqcd::hermitian_eig(ComplexMatrix::Zero(2, 2));
  CHECK(zero.rank() == 0);
  try {
    zero.gamma_min();
    FAIL("gamma_min of the zero matrix");
  } catch (const quqcd::Error& e) {
    CHECK(e.kind() == quqcd::ErrorKind::RankDeficient);
  }
}
