#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace simoml {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

/// Square matrix equal to its conjugate transpose.
///
/// The checked constructor accepts deviations up to 1e-12 (relative to the
/// largest entry magnitude, floored at 1) and then stores the exactly
/// mirrored upper triangle, so downstream code can rely on bitwise symmetry.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const ComplexMatrix& m);

  /// Mirrors the upper triangle of `m` into the lower triangle and drops the
  /// imaginary part of the diagonal. No tolerance check.
  static HermitianMatrix from_upper(ComplexMatrix m);

  Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct Trusted {};
  HermitianMatrix(ComplexMatrix m, Trusted) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Upper-triangular factor R with zeros strictly below the diagonal and a
/// real, non-negative diagonal.
class UpperTriangular {
 public:
  explicit UpperTriangular(const ComplexMatrix& m);

  Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index k) const { return m_(i, k); }

 private:
  ComplexMatrix m_;
};

/// G = X^H X / N computed from the upper half and mirrored.
HermitianMatrix gram(const ComplexMatrix& x);

/// Largest eigenvalue of a Hermitian matrix.
///
/// Backed by Eigen's self-adjoint tridiagonal QR solver (eigenvalues only),
/// which is accurate to a few ulps of the spectral radius.
double max_eigenvalue(const HermitianMatrix& g);

/// 1e-10 times the largest diagonal entry (or 1e-10 when the diagonal is all
/// zero or negative).
double default_psd_tolerance(const HermitianMatrix& a);

/// Upper Cholesky factor R with R^H R = A for positive-semidefinite A.
///
/// A pivot in [-tol, tol] is clamped to zero together with the rest of its
/// row. A pivot below -tol raises NotPositiveSemidefinite.
UpperTriangular cholesky_psd(const HermitianMatrix& a, std::optional<double> tol = std::nullopt);

}  // namespace simoml
