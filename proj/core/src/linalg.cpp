#include "qmeter/linalg.hpp"

namespace qmeter {

bool all_finite(const Matrix& m) {
  return m.allFinite();
}

bool is_hermitian(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= rel_tol * (1.0 + m.norm());
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  const Eigen::Index da = a.rows(), db = b.rows();
  if (a.cols() != da || b.cols() != db)
    throw DimensionError("tensor: inputs must be square");
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a(i, j) * b;
  return out;
}

Matrix partial_trace(const Matrix& x, Eigen::Index d_s, Eigen::Index d_p,
                     Subsystem keep) {
  if (x.rows() != x.cols() || x.rows() != d_s * d_p)
    throw DimensionError("partial_trace: operator dimension is not d_s*d_p");
  if (keep == Subsystem::System) {
    Matrix out = Matrix::Zero(d_s, d_s);
    for (Eigen::Index i = 0; i < d_s; ++i)
      for (Eigen::Index j = 0; j < d_s; ++j)
        for (Eigen::Index p = 0; p < d_p; ++p)
          out(i, j) += x(i * d_p + p, j * d_p + p);
    return out;
  }
  Matrix out = Matrix::Zero(d_p, d_p);
  for (Eigen::Index p = 0; p < d_p; ++p)
    for (Eigen::Index q = 0; q < d_p; ++q)
      for (Eigen::Index i = 0; i < d_s; ++i)
        out(p, q) += x(i * d_p + p, i * d_p + q);
  return out;
}

EigResult hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols())
    throw DimensionError("hermitian_eig: matrix must be square");
  if (!all_finite(h))
    throw ValidationError("hermitian_eig: matrix has non-finite entries");
  if (!is_hermitian(h))
    throw ValidationError("hermitian_eig: matrix is not Hermitian");
  // Symmetrize first so roundoff in the input cannot leak into the solver.
  Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("hermitian_eig: eigensolver failed to converge");
  return EigResult{solver.eigenvalues(), solver.eigenvectors()};
}

Matrix psd_inverse(const Matrix& h, double reg_tol) {
  EigResult eig = hermitian_eig(h);
  if (eig.eigenvalues.minCoeff() < reg_tol)
    throw SingularError("psd_inverse: smallest eigenvalue " +
                        std::to_string(eig.eigenvalues.minCoeff()) +
                        " is below reg_tol");
  RealVector inv = eig.eigenvalues.cwiseInverse();
  return eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.adjoint();
}

Matrix identity(Eigen::Index d) {
  return Matrix::Identity(d, d);
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace qmeter
