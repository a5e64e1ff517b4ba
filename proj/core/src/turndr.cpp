#include "qmeter/turndr.hpp"

#include <cmath>
#include <limits>

namespace qmeter {

namespace {

constexpr double kZeroOutcomeTol = 1e-10;
constexpr double kDegenerateVarTol = 1e-10;
constexpr double kBoundRelSlack = 1e-7;
constexpr double kBoundAbsSlack = 1e-9;
constexpr double kNdrSlackTol = 1e-12;

}  // namespace

SurvivalActivity survival_activity(const KrausSet& kraus,
                                   const DensityOperator& rho_s,
                                   double reg_tol) {
  if (kraus.dim_s != rho_s.dim())
    throw DimensionError("survival_activity: dimension mismatch");
  if (kraus.outcomes.empty() ||
      std::abs(kraus.outcomes.front().eigenvalue) > kZeroOutcomeTol)
    throw ValidationError(
        "survival_activity: Kraus set has no zero-eigenvalue outcome");

  SurvivalActivity result;
  const auto& zero_block = kraus.outcomes.front();
  for (const auto& op : zero_block.operators) {
    Matrix gram = op.v.adjoint() * op.v;
    Matrix inv;
    try {
      inv = psd_inverse(gram, reg_tol);
    } catch (const SingularError&) {
      continue;  // excluded from the min, effectively xi_l = +inf
    }
    const double xi_l = (inv * rho_s.matrix()).trace().real() - 1.0;
    if (xi_l < -kBoundAbsSlack)
      throw ConsistencyError(
          "survival_activity: negative candidate " + std::to_string(xi_l) +
          ", V^dag V exceeds the identity");
    if (!result.xi || xi_l < *result.xi) {
      result.xi = std::max(0.0, xi_l);
      result.selected = KrausLabel{0, op.j, op.m};
    }
  }
  return result;
}

bool bound_satisfied(double lhs, double rhs) {
  return lhs >= rhs * (1.0 - kBoundRelSlack) - kBoundAbsSlack;
}

TurReport tur_bound(const MeasurementScheme& scheme,
                    const DensityOperator& rho_s, double unbias_tol,
                    double reg_tol, const std::optional<Observable>& reference) {
  if (rho_s.dim() != scheme.d_s())
    throw DimensionError("tur_bound: dimension mismatch");

  Observable derived = derive_unbiased_observable(scheme);
  const Observable& a = reference ? *reference : derived;

  TurReport report;
  report.residual = (a.matrix() - derived.matrix()).norm();
  if (report.residual > unbias_tol)
    throw ValidationError("tur_bound: unbiasedness residual " +
                          std::to_string(report.residual) +
                          " exceeds tolerance");

  report.mean_a = expectation(a, rho_s);
  report.var_a = variance(a, rho_s);
  if (report.var_a < kDegenerateVarTol)
    throw DegenerateError("tur_bound: dA^2 = " + std::to_string(report.var_a) +
                          " is degenerate, CV^2 undefined");

  Matrix joint = tensor(rho_s.matrix(), scheme.rho_p().matrix());
  report.var_n = std::max(
      0.0, hermitian_moments(noise_operator(scheme, a), joint).variance());

  KrausSet kraus = kraus_from_scheme(scheme);
  SurvivalActivity activity = survival_activity(kraus, rho_s, reg_tol);
  report.xi = activity.xi;
  report.selected_l = activity.selected;

  report.cv_squared = report.mean_a * report.mean_a / report.var_a;
  report.noise_ratio = report.var_n / report.var_a;
  report.rhs = report.cv_squared;
  report.lhs = report.xi ? *report.xi * (1.0 + report.noise_ratio)
                         : std::numeric_limits<double>::infinity();
  report.satisfied = !report.xi || bound_satisfied(report.lhs, report.rhs);

  report.meter = kraus_meter_statistics(kraus, rho_s);

  // Decomposition of the meter variance, with the exactly unbiased A so the
  // identity is not polluted by a reference offset.
  const double var_n_exact = std::max(
      0.0, hermitian_moments(noise_operator(scheme, derived), joint).variance());
  const double var_a_exact = variance(derived, rho_s);
  report.decomposition_error =
      std::abs(report.meter.variance - var_a_exact - var_n_exact);

  if (report.meter.mean * report.meter.mean > kDegenerateVarTol) {
    const double meter_form =
        report.meter.variance / (report.meter.mean * report.meter.mean);
    report.meter_form_error =
        std::abs(meter_form - (1.0 + report.noise_ratio) / report.cv_squared);
  } else {
    report.meter_form_error = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

Matrix disturbance_operator(const UnitaryOperator& u, const Observable& b,
                            Eigen::Index d_s, Eigen::Index d_p) {
  if (u.dim() != d_s * d_p)
    throw DimensionError("disturbance_operator: U must act on S+P");
  if (b.dim() != d_s)
    throw DimensionError("disturbance_operator: B must act on S");
  Matrix lifted = tensor(b.matrix(), identity(d_p));
  return u.matrix().adjoint() * lifted * u.matrix() - lifted;
}

NdrResult ndr_check(double noise_a, double dist_b, double std_a, double std_b,
                    double commutator_mean_abs) {
  for (double v : {noise_a, dist_b, std_a, std_b, commutator_mean_abs})
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("ndr_check: inputs must be finite and >= 0");
  if (std_a <= 0.0 || std_b <= 0.0)
    throw ValidationError("ndr_check: std_a and std_b must be positive");

  const double half_comm = 0.5 * commutator_mean_abs;
  const double additive_lhs =
      noise_a * dist_b + noise_a * std_b + std_a * dist_b;
  const double reciprocal_lhs =
      (noise_a / std_a + 1.0) * (dist_b / std_b + 1.0);
  const double reciprocal_rhs = 1.0 + half_comm / (std_a * std_b);

  NdrResult result;
  const double scale = 1.0 + additive_lhs + half_comm;
  result.holds_additive = additive_lhs >= half_comm - kNdrSlackTol * scale;
  result.holds_reciprocal =
      reciprocal_lhs >=
      reciprocal_rhs - kNdrSlackTol * (1.0 + reciprocal_lhs + reciprocal_rhs);
  result.slack = additive_lhs - half_comm;
  return result;
}

double noise_floor(double xi, double cv_squared) {
  if (!(xi > 0.0))
    throw ValidationError("noise_floor: xi must be positive");
  if (cv_squared <= xi) return 0.0;
  return std::sqrt(cv_squared / xi - 1.0);
}

}  // namespace qmeter
