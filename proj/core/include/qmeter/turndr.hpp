#pragma once

#include "qmeter/scheme.hpp"

namespace qmeter {

struct KrausLabel {
  Eigen::Index k = -1;
  Eigen::Index j = -1;
  Eigen::Index m = -1;
};

/// Survival activity of a measurement channel, minimized over the regular
/// candidates in the zero-outcome Kraus block. xi is empty when no
/// candidate is regular (the bound is then vacuous).
struct SurvivalActivity {
  std::optional<double> xi;
  KrausLabel selected;
  bool unbounded() const { return !xi.has_value(); }
};

SurvivalActivity survival_activity(const KrausSet& kraus,
                                   const DensityOperator& rho_s,
                                   double reg_tol = 1e-8);

/// Assembled trade-off between the survival activity and the indirect
/// measurement noise: lhs = xi * (1 + dN^2/dA^2) against rhs = <A>^2/dA^2.
struct TurReport {
  std::optional<double> xi;
  KrausLabel selected_l;
  double cv_squared = 0.0;   // <A>^2 / dA^2
  double noise_ratio = 0.0;  // dN^2 / dA^2
  double lhs = 0.0;          // +inf when xi is unbounded
  double rhs = 0.0;
  bool satisfied = false;
  double mean_a = 0.0;
  double var_a = 0.0;
  double var_n = 0.0;
  double residual = 0.0;  // unbiasedness residual of the reference observable
  MeterStats meter;       // Kraus-sum outcome statistics
  // |dM^2 - dA^2 - dN^2| evaluated with the exactly unbiased observable.
  double decomposition_error = 0.0;
  // |dM^2/<M>^2 - (1 + noise_ratio)/cv2|; the two routes to the bound.
  double meter_form_error = 0.0;
};

/// Evaluates the trade-off for one scheme and initial system state. The
/// observable defaults to the scheme's exactly unbiased one; pass a
/// reference observable (e.g. a fixed experiment target) to evaluate the
/// report against it instead. Throws DegenerateError if dA^2 < 1e-10 and
/// ValidationError if the reference residual exceeds unbias_tol.
TurReport tur_bound(const MeasurementScheme& scheme,
                    const DensityOperator& rho_s, double unbias_tol = 1e-5,
                    double reg_tol = 1e-8,
                    const std::optional<Observable>& reference = std::nullopt);

/// Whether lhs >= rhs up to pure roundoff headroom.
bool bound_satisfied(double lhs, double rhs);

/// D_B = U^dag (B x I_P) U - B x I_P, the recoil on B caused by the
/// interaction.
Matrix disturbance_operator(const UnitaryOperator& u, const Observable& b,
                            Eigen::Index d_s, Eigen::Index d_p);

struct NdrResult {
  bool holds_additive = false;
  bool holds_reciprocal = false;
  double slack = 0.0;  // additive-form lhs minus rhs
};

/// Noise-disturbance relation in both its additive and reciprocal forms;
/// the two verdicts agree by algebra.
NdrResult ndr_check(double noise_a, double dist_b, double std_a, double std_b,
                    double commutator_mean_abs);

/// Lower bound on dN_A/dA implied by the survival activity:
/// sqrt(cv2/xi - 1) when cv2 > xi, else 0. Throws on xi <= 0.
double noise_floor(double xi, double cv_squared);

}  // namespace qmeter
