#include "simoml/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simoml/errors.hpp"

namespace simoml {

NotPositiveSemidefinite::NotPositiveSemidefinite(std::size_t pivot_index, double pivot_value,
                                                 double tolerance)
    : NumericalError([&] {
        std::ostringstream os;
        os << "matrix is not positive semidefinite: pivot " << pivot_index << " = " << pivot_value
           << " < -" << tolerance;
        return os.str();
      }()),
      pivot_index_(pivot_index),
      pivot_value_(pivot_value) {}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + " contains non-finite entries");
  }
}

namespace {

constexpr double kHermitianTol = 1e-12;

ComplexMatrix mirror_upper(ComplexMatrix m) {
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i) {
    m(i, i) = Complex(m(i, i).real(), 0.0);
    for (Index j = i + 1; j < n; ++j) {
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("Hermitian matrix must be square");
  }
  require_finite(m, "Hermitian matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double deviation = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (deviation > kHermitianTol * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |A - A^H| = " << deviation << ")";
    throw InvalidInput(os.str());
  }
  m_ = mirror_upper(m);
}

HermitianMatrix HermitianMatrix::from_upper(ComplexMatrix m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("Hermitian matrix must be square");
  }
  return HermitianMatrix(mirror_upper(std::move(m)), Trusted{});
}

UpperTriangular::UpperTriangular(const ComplexMatrix& m) : m_(m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("triangular factor must be square");
  }
  require_finite(m, "triangular factor");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < i; ++k) {
      if (m(i, k) != Complex(0.0)) {
        throw InvalidInput("triangular factor has nonzero entries below the diagonal");
      }
    }
    if (m(i, i).imag() != 0.0) {
      throw InvalidInput("triangular factor has a complex diagonal entry");
    }
  }
}

HermitianMatrix gram(const ComplexMatrix& x) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw InvalidInput("gram: observation matrix must have at least one row and one column");
  }
  require_finite(x, "observation matrix");
  ComplexMatrix g(x.cols(), x.cols());
  g.triangularView<Eigen::Upper>() = x.adjoint() * x;
  g /= static_cast<double>(x.rows());
  return HermitianMatrix::from_upper(std::move(g));
}

double max_eigenvalue(const HermitianMatrix& g) {
  if (g.dim() == 0) {
    throw InvalidInput("max_eigenvalue: empty matrix");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(g.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "max_eigenvalue: eigen solver did not converge for a " << g.dim() << "x" << g.dim()
       << " matrix (Frobenius norm " << g.matrix().norm() << ")";
    throw NumericalError(os.str());
  }
  return solver.eigenvalues().maxCoeff();
}

double default_psd_tolerance(const HermitianMatrix& a) {
  const double max_diag = a.matrix().diagonal().real().maxCoeff();
  return 1e-10 * (max_diag > 0.0 ? max_diag : 1.0);
}

UpperTriangular cholesky_psd(const HermitianMatrix& a, std::optional<double> tol) {
  const double tolerance = tol.value_or(default_psd_tolerance(a));
  const Index n = a.dim();
  const ComplexMatrix& m = a.matrix();
  ComplexMatrix r = ComplexMatrix::Zero(n, n);

  for (Index i = 0; i < n; ++i) {
    double pivot = m(i, i).real();
    for (Index k = 0; k < i; ++k) {
      pivot -= std::norm(r(k, i));
    }
    if (pivot < -tolerance) {
      throw NotPositiveSemidefinite(static_cast<std::size_t>(i), pivot, tolerance);
    }
    if (pivot <= tolerance) {
      // Semidefinite completion: the row stays zero.
      continue;
    }
    const double diag = std::sqrt(pivot);
    r(i, i) = diag;
    for (Index j = i + 1; j < n; ++j) {
      Complex acc = m(i, j);
      for (Index k = 0; k < i; ++k) {
        acc -= std::conj(r(k, i)) * r(k, j);
      }
      r(i, j) = acc / diag;
    }
  }
  return UpperTriangular(r);
}

}  // namespace simoml
