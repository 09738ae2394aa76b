#pragma once

#include <complex>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "isslyap/errors.hpp"

namespace isslyap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

namespace linalg {

inline double condition_number(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

inline double condition_number(const Matrix& m) {
  return condition_number(ComplexMatrix(m.cast<std::complex<double>>()));
}

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Solves the continuous Lyapunov equation A^T X + X A = -Q for symmetric Q.
///
/// Bartels-Stewart on the complex Schur form A = U T U^*: the transformed
/// equation T^* Y + Y T = -U^* Q U is solved column by column with forward
/// substitution, then X = U Y U^*. A must be Hurwitz (no pair of eigenvalues
/// with mu_i^* + mu_j = 0), otherwise SolverError.
inline Matrix solve_continuous_lyapunov(const Matrix& a, const Matrix& q) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw DimensionMismatch("solve_continuous_lyapunov: A and Q must be square and of equal size");
  }
  using C = std::complex<double>;
  Eigen::ComplexSchur<ComplexMatrix> schur(a.cast<C>());
  if (schur.info() != Eigen::Success) throw SolverError("solve_continuous_lyapunov: Schur decomposition failed");
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& u = schur.matrixU();
  const ComplexMatrix rhs = -(u.adjoint() * q.cast<C>() * u);

  const ComplexMatrix t_adj = t.adjoint();
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j) {
    ComplexVector col = rhs.col(j);
    for (Index k = 0; k < j; ++k) col -= t(k, j) * y.col(k);
    ComplexMatrix lower = t_adj;
    lower.diagonal().array() += t(j, j);
    const double pivot = lower.diagonal().cwiseAbs().minCoeff();
    if (pivot <= 1e3 * std::numeric_limits<double>::epsilon() * scale) {
      throw SolverError("solve_continuous_lyapunov: A has eigenvalues symmetric about the imaginary axis");
    }
    y.col(j) = lower.triangularView<Eigen::Lower>().solve(col);
  }
  Matrix x = (u * y * u.adjoint()).real();
  x = 0.5 * (x + x.transpose()).eval();

  const double residual = (a.transpose() * x + x * a + q).norm();
  const double ref = a.norm() * x.norm() + q.norm();
  if (!(residual <= 1e-8 * std::max(ref, std::numeric_limits<double>::min()))) {
    throw SolverError("solve_continuous_lyapunov: residual check failed");
  }
  return x;
}

inline Matrix expm(const Matrix& a) { return a.exp(); }

/// Returns h * phi1(h A) where phi1(z) = (e^z - 1)/z, via the block identity
/// exp([[hA, hI], [0, 0]]) = [[e^{hA}, h phi1(hA)], [0, I]].
inline Matrix scaled_phi1(const Matrix& a, double h) {
  const Index n = a.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = h * a;
  aug.topRightCorner(n, n) = h * Matrix::Identity(n, n);
  const Matrix e = aug.exp();
  return e.topRightCorner(n, n);
}

/// Principal power m^alpha for a matrix whose spectrum avoids (-inf, 0]
/// via the Schur-Pade algorithm (handles defective matrices).
inline Matrix schur_power(const Matrix& m, double alpha) {
  if (alpha == 0.0) return Matrix::Identity(m.rows(), m.cols());
  Eigen::MatrixPower<Matrix> mp(m);
  return mp(alpha);
}

/// Principal power m^alpha through the eigendecomposition m = V D V^{-1}.
/// Refuses when cond(V) exceeds max_condition.
inline Matrix spectral_power(const Matrix& m, double alpha, double max_condition = 1e8) {
  if (alpha == 0.0) return Matrix::Identity(m.rows(), m.cols());
  Eigen::EigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw SolverError("spectral_power: eigendecomposition failed");
  const ComplexMatrix v = es.eigenvectors();
  const double cond = condition_number(v);
  if (!(cond <= max_condition)) {
    throw ConditioningError("spectral_power: eigenvector basis condition number exceeds threshold", cond);
  }
  ComplexVector d = es.eigenvalues();
  for (Index i = 0; i < d.size(); ++i) d(i) = std::pow(d(i), alpha);
  const ComplexMatrix r = v * d.asDiagonal() * v.inverse();
  return r.real();
}

}  // namespace linalg
}  // namespace isslyap
