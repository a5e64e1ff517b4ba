#pragma once

#include <array>
#include <optional>

#include "qmeter/types.hpp"

namespace qmeter {

/// One indirect measurement of the system S: interact S with a probe P via
/// U, then projectively read the zero-grounded meter observable M on S+P.
/// probe_basis holds, as columns, the orthonormal basis {|psi_j>} of P used
/// for the Kraus decomposition (computational by default).
class MeasurementScheme {
 public:
  MeasurementScheme(Eigen::Index d_s, Eigen::Index d_p, UnitaryOperator u,
                    Observable m, DensityOperator rho_p,
                    std::optional<Matrix> probe_basis = std::nullopt);

  Eigen::Index d_s() const { return d_s_; }
  Eigen::Index d_p() const { return d_p_; }
  const UnitaryOperator& u() const { return u_; }
  const Observable& meter() const { return m_; }
  const DensityOperator& rho_p() const { return rho_p_; }
  const Matrix& probe_basis() const { return probe_basis_; }
  bool has_custom_probe_basis() const { return custom_basis_; }

  /// U^dag M U, the meter observable pulled back to the initial state.
  Matrix heisenberg_meter() const;

 private:
  Eigen::Index d_s_, d_p_;
  UnitaryOperator u_;
  Observable m_;
  DensityOperator rho_p_;
  Matrix probe_basis_;
  bool custom_basis_ = false;
};

/// The unique system observable A for which the meter mean reproduces <A>
/// on every initial system state: A = tr_P[U^dag M U (I_S x rho_P)].
Observable derive_unbiased_observable(const MeasurementScheme& scheme);

/// Frobenius distance between a and the observable the scheme actually
/// measures without bias.
double unbiasedness_residual(const MeasurementScheme& scheme,
                             const Observable& a);

/// N = U^dag M U - A x I_P on S+P. Hermitian; mean zero in any product
/// state when the scheme is unbiased for a.
Matrix noise_operator(const MeasurementScheme& scheme, const Observable& a);

/// Extracts the Kraus family V_{k,(j,m)} = sqrt(q_m) <psi_j| Pi_k U |phi_m>
/// from the scheme, grouped by meter outcome. Operators with Frobenius norm
/// below 1e-12 are dropped after the completeness check.
KrausSet kraus_from_scheme(const MeasurementScheme& scheme);

/// sum_{k,l} V rho V^dag.
DensityOperator post_measurement_state(const KrausSet& kraus,
                                       const DensityOperator& rho_s);

struct MeterStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Outcome statistics of the meter via the Kraus sums (canonical form).
MeterStats meter_statistics(const MeasurementScheme& scheme,
                            const DensityOperator& rho_s);

/// Same statistics from the full-space moments of U^dag M U; serves as the
/// cross-validation route for meter_statistics.
MeterStats meter_statistics_heisenberg(const MeasurementScheme& scheme,
                                       const DensityOperator& rho_s);

MeterStats kraus_meter_statistics(const KrausSet& kraus,
                                  const DensityOperator& rho_s);

/// Pure state of S + S_bar + Q realizing the measurement channel, with the
/// meter replaced by a projective observable M' acting on Q alone.
struct PurifiedRun {
  Vector psi;           // unit vector on S x S_bar x Q
  Eigen::Index d_s = 0;
  Eigen::Index n_ops = 0;  // dimension of Q
  std::vector<double> meter_prime_eigenvalues;           // per Q basis vector
  std::vector<std::array<Eigen::Index, 3>> block_index;  // (k, j, m) per Q basis vector
};

struct PurifyReport {
  PurifiedRun run;
  MeterStats purified;
  double mean_error = 0.0;      // |<M'> - Kraus-sum mean|
  double variance_error = 0.0;  // |Var M' - Kraus-sum variance|
  double state_error = 0.0;     // ||tr_{S_bar,Q} psi psi^dag - rho_S'||_F
};

/// Builds the purified run and checks that M' reproduces the meter mean and
/// variance and that tracing out S_bar and Q recovers the post-measurement
/// state. Throws ConsistencyError naming the first check that fails.
PurifyReport purify_and_verify(const KrausSet& kraus,
                               const DensityOperator& rho_s);

}  // namespace qmeter
