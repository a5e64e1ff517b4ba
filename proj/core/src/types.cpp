#include "qmeter/types.hpp"

#include <cmath>
#include <limits>

namespace qmeter {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kUnitaryTol = 1e-10;
constexpr double kEigMergeTol = 1e-8;
constexpr double kCompletenessTol = 1e-9;

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw ValidationError(std::string(what) + ": matrix must be square");
  if (!all_finite(m))
    throw ValidationError(std::string(what) + ": non-finite entries");
}

}  // namespace

DensityOperator::DensityOperator(Matrix m) {
  require_square_finite(m, "DensityOperator");
  if (!is_hermitian(m, kHermTol))
    throw ValidationError("DensityOperator: matrix is not Hermitian");
  const double tr = m.trace().real();
  if (std::abs(m.trace() - Complex(1.0, 0.0)) > kTraceTol)
    throw ValidationError("DensityOperator: trace " + std::to_string(tr) +
                          " is not 1");
  EigResult eig = hermitian_eig(m);
  const double min_eig = eig.eigenvalues.minCoeff();
  if (min_eig < -kPsdTol)
    throw ValidationError("DensityOperator: negative eigenvalue " +
                          std::to_string(min_eig));
  if (min_eig < 0.0) {
    // Roundoff from upstream products; clamp and renormalize.
    RealVector clamped = eig.eigenvalues.cwiseMax(0.0);
    clamped /= clamped.sum();
    mat_ = eig.eigenvectors * clamped.asDiagonal() * eig.eigenvectors.adjoint();
  } else {
    mat_ = std::move(m);
  }
}

Observable::Observable(Matrix m) {
  require_square_finite(m, "Observable");
  if (!is_hermitian(m, kHermTol))
    throw ValidationError("Observable: matrix is not Hermitian");
  EigResult eig = hermitian_eig(m);
  const Eigen::Index d = m.rows();
  Eigen::Index i = 0;
  while (i < d) {
    Eigen::Index j = i;
    while (j + 1 < d && eig.eigenvalues(j + 1) - eig.eigenvalues(i) < kEigMergeTol)
      ++j;
    Matrix proj = Matrix::Zero(d, d);
    double sum = 0.0;
    for (Eigen::Index c = i; c <= j; ++c) {
      proj += eig.eigenvectors.col(c) * eig.eigenvectors.col(c).adjoint();
      sum += eig.eigenvalues(c);
    }
    eigenvalues_.push_back(sum / static_cast<double>(j - i + 1));
    projectors_.push_back(std::move(proj));
    i = j + 1;
  }
  mat_ = std::move(m);
}

UnitaryOperator::UnitaryOperator(Matrix m) {
  require_square_finite(m, "UnitaryOperator");
  const Eigen::Index d = m.rows();
  const double residual = (m.adjoint() * m - Matrix::Identity(d, d)).norm();
  if (residual > kUnitaryTol * (1.0 + std::sqrt(static_cast<double>(d))))
    throw ValidationError("UnitaryOperator: U^dag U deviates from I by " +
                          std::to_string(residual));
  mat_ = std::move(m);
}

KrausSet KrausSet::validated(Eigen::Index dim_s,
                             std::vector<KrausOutcome> outcomes) {
  KrausSet set{dim_s, std::move(outcomes)};
  set.validate();
  return set;
}

void KrausSet::validate() const {
  if (dim_s < 1) throw ValidationError("KrausSet: dim_s must be positive");
  if (outcomes.empty()) throw ValidationError("KrausSet: no outcomes");
  if (std::abs(outcomes.front().eigenvalue) > kHermTol)
    throw ValidationError("KrausSet: first outcome eigenvalue is not 0");
  Matrix sum = Matrix::Zero(dim_s, dim_s);
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& outcome : outcomes) {
    if (outcome.eigenvalue < prev)
      throw ValidationError("KrausSet: outcome eigenvalues are not ascending");
    prev = outcome.eigenvalue;
    for (const auto& op : outcome.operators) {
      if (op.v.rows() != dim_s || op.v.cols() != dim_s)
        throw ValidationError("KrausSet: operator dimension mismatch");
      if (!all_finite(op.v))
        throw ValidationError("KrausSet: non-finite operator entries");
      sum += op.v.adjoint() * op.v;
    }
  }
  const double residual = (sum - Matrix::Identity(dim_s, dim_s)).norm();
  if (residual > kCompletenessTol * (1.0 + std::sqrt(static_cast<double>(dim_s))))
    throw ValidationError(
        "KrausSet: completeness violated, ||sum V^dag V - I|| = " +
        std::to_string(residual));
}

Eigen::Index KrausSet::total_operators() const {
  Eigen::Index n = 0;
  for (const auto& outcome : outcomes)
    n += static_cast<Eigen::Index>(outcome.operators.size());
  return n;
}

Moments hermitian_moments(const Matrix& obs, const Matrix& rho) {
  if (obs.rows() != rho.rows())
    throw DimensionError("hermitian_moments: dimension mismatch");
  Matrix prod = obs * rho;
  Moments m;
  m.mean = prod.trace().real();
  m.second = (obs * prod).trace().real();
  return m;
}

double expectation(const Observable& obs, const DensityOperator& state) {
  if (obs.dim() != state.dim())
    throw DimensionError("expectation: dimension mismatch");
  return (obs.matrix() * state.matrix()).trace().real();
}

double variance(const Observable& obs, const DensityOperator& state) {
  if (obs.dim() != state.dim())
    throw DimensionError("variance: dimension mismatch");
  Moments m = hermitian_moments(obs.matrix(), state.matrix());
  return std::max(0.0, m.variance());
}

Observable shift_to_zero_ground(const Observable& obs) {
  const double min_eig = obs.min_eigenvalue();
  if (min_eig == 0.0) return obs;
  return Observable(obs.matrix() -
                    min_eig * Matrix::Identity(obs.dim(), obs.dim()));
}

}  // namespace qmeter
