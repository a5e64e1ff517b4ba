#pragma once

#include <vector>

#include "qmeter/linalg.hpp"

namespace qmeter {

/// Hermitian, positive semidefinite, unit-trace state. Eigenvalues in
/// [-1e-10, 0) from upstream roundoff are clamped to zero and the state
/// renormalized; anything more negative is rejected.
class DensityOperator {
 public:
  explicit DensityOperator(Matrix m);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

/// Hermitian operator with cached spectral decomposition. Eigenvalues
/// closer than 1e-8 are merged into a single eigenspace, so there is one
/// projector per distinct eigenvalue.
class Observable {
 public:
  explicit Observable(Matrix m);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<Matrix>& projectors() const { return projectors_; }
  double min_eigenvalue() const { return eigenvalues_.front(); }

 private:
  Matrix mat_;
  std::vector<double> eigenvalues_;
  std::vector<Matrix> projectors_;
};

class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix m);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

struct KrausOperator {
  Eigen::Index j = 0;  // probe readout-basis index
  Eigen::Index m = 0;  // probe eigenvector index
  Matrix v;            // d_s x d_s
};

/// One meter outcome: its eigenvalue and the Kraus operators that map the
/// system state into that outcome's branch.
struct KrausOutcome {
  double eigenvalue = 0.0;
  std::vector<KrausOperator> operators;
};

/// Doubly indexed Kraus family {V_{k,l}} grouped by meter outcome k.
/// Outcome eigenvalues are ascending with the first pinned at zero, and
/// the family resolves the identity on the system.
struct KrausSet {
  Eigen::Index dim_s = 0;
  std::vector<KrausOutcome> outcomes;

  static KrausSet validated(Eigen::Index dim_s,
                            std::vector<KrausOutcome> outcomes);
  void validate() const;
  Eigen::Index total_operators() const;
};

double expectation(const Observable& obs, const DensityOperator& state);
double variance(const Observable& obs, const DensityOperator& state);

/// obs - lambda_min * I, so the smallest eigenvalue of the result is 0.
Observable shift_to_zero_ground(const Observable& obs);

struct Moments {
  double mean = 0.0;
  double second = 0.0;
  double variance() const { return second - mean * mean; }
};

/// First and second moments of a Hermitian operator in a (possibly
/// composite) state, both given as raw matrices.
Moments hermitian_moments(const Matrix& obs, const Matrix& rho);

}  // namespace qmeter
