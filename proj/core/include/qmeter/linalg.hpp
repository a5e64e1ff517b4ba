#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmeter {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct SingularError : Error {
  using Error::Error;
};
struct DegenerateError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};

enum class Subsystem { System, Probe };

/// Kronecker product with row-major block ordering:
/// out(i*db + k, j*db + m) = a(i, j) * b(k, m).
Matrix tensor(const Matrix& a, const Matrix& b);

/// Reduced operator of a (d_s * d_p)-dimensional operator on the kept
/// subsystem. Preserves the trace.
Matrix partial_trace(const Matrix& x, Eigen::Index d_s, Eigen::Index d_p,
                     Subsystem keep);

struct EigResult {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // orthonormal columns, aligned with eigenvalues
};

/// Spectral decomposition of a Hermitian matrix. Throws ValidationError if
/// the input is not Hermitian within 1e-10 relative Frobenius distance.
EigResult hermitian_eig(const Matrix& h);

/// Inverse of a Hermitian positive definite matrix via its spectral
/// decomposition. Throws SingularError if the smallest eigenvalue is
/// below reg_tol.
Matrix psd_inverse(const Matrix& h, double reg_tol = 1e-8);

bool is_hermitian(const Matrix& m, double rel_tol = 1e-10);
bool all_finite(const Matrix& m);

Matrix identity(Eigen::Index d);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

}  // namespace qmeter
