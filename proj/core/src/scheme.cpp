#include "qmeter/scheme.hpp"

#include <cmath>

namespace qmeter {

namespace {

constexpr double kZeroGroundTol = 1e-10;
constexpr double kBasisTol = 1e-10;
constexpr double kDropTol = 1e-12;
constexpr double kCheckTol = 1e-9;

}  // namespace

MeasurementScheme::MeasurementScheme(Eigen::Index d_s, Eigen::Index d_p,
                                     UnitaryOperator u, Observable m,
                                     DensityOperator rho_p,
                                     std::optional<Matrix> probe_basis)
    : d_s_(d_s),
      d_p_(d_p),
      u_(std::move(u)),
      m_(std::move(m)),
      rho_p_(std::move(rho_p)) {
  if (d_s_ < 1 || d_p_ < 1)
    throw ValidationError("MeasurementScheme: dimensions must be positive");
  if (u_.dim() != d_s_ * d_p_ || m_.dim() != d_s_ * d_p_)
    throw DimensionError("MeasurementScheme: U and M must act on S+P");
  if (rho_p_.dim() != d_p_)
    throw DimensionError("MeasurementScheme: rho_P must act on P");
  if (std::abs(m_.min_eigenvalue()) > kZeroGroundTol)
    throw ValidationError(
        "MeasurementScheme: meter is not zero-grounded, min eigenvalue " +
        std::to_string(m_.min_eigenvalue()));
  if (probe_basis) {
    if (probe_basis->rows() != d_p_ || probe_basis->cols() != d_p_)
      throw DimensionError("MeasurementScheme: probe basis must be d_P x d_P");
    const double residual =
        (probe_basis->adjoint() * *probe_basis - Matrix::Identity(d_p_, d_p_))
            .norm();
    if (residual > kBasisTol * (1.0 + std::sqrt(static_cast<double>(d_p_))))
      throw ValidationError("MeasurementScheme: probe basis not orthonormal");
    probe_basis_ = std::move(*probe_basis);
    custom_basis_ = true;
  } else {
    probe_basis_ = Matrix::Identity(d_p_, d_p_);
  }
}

Matrix MeasurementScheme::heisenberg_meter() const {
  return u_.matrix().adjoint() * m_.matrix() * u_.matrix();
}

Observable derive_unbiased_observable(const MeasurementScheme& scheme) {
  Matrix pulled = scheme.heisenberg_meter() *
                  tensor(identity(scheme.d_s()), scheme.rho_p().matrix());
  Matrix a = partial_trace(pulled, scheme.d_s(), scheme.d_p(),
                           Subsystem::System);
  // Hermitian up to roundoff since rho_P acts on the traced factor only.
  return Observable(0.5 * (a + a.adjoint()));
}

double unbiasedness_residual(const MeasurementScheme& scheme,
                             const Observable& a) {
  if (a.dim() != scheme.d_s())
    throw DimensionError("unbiasedness_residual: dimension mismatch");
  return (a.matrix() - derive_unbiased_observable(scheme).matrix()).norm();
}

Matrix noise_operator(const MeasurementScheme& scheme, const Observable& a) {
  if (a.dim() != scheme.d_s())
    throw DimensionError("noise_operator: dimension mismatch");
  return scheme.heisenberg_meter() -
         tensor(a.matrix(), identity(scheme.d_p()));
}

KrausSet kraus_from_scheme(const MeasurementScheme& scheme) {
  const Eigen::Index d_s = scheme.d_s(), d_p = scheme.d_p();
  EigResult probe_eig = hermitian_eig(scheme.rho_p().matrix());

  std::vector<KrausOutcome> outcomes;
  Matrix completeness = Matrix::Zero(d_s, d_s);
  const auto& projectors = scheme.meter().projectors();
  const auto& eigenvalues = scheme.meter().eigenvalues();
  for (size_t k = 0; k < projectors.size(); ++k) {
    Matrix block = projectors[k] * scheme.u().matrix();
    KrausOutcome outcome{eigenvalues[k], {}};
    for (Eigen::Index j = 0; j < d_p; ++j) {
      Vector psi = scheme.probe_basis().col(j);
      for (Eigen::Index m = 0; m < d_p; ++m) {
        const double weight = std::sqrt(std::max(0.0, probe_eig.eigenvalues(m)));
        Vector phi = probe_eig.eigenvectors.col(m);
        Matrix v(d_s, d_s);
        for (Eigen::Index a = 0; a < d_s; ++a)
          for (Eigen::Index b = 0; b < d_s; ++b) {
            Complex sum = 0.0;
            for (Eigen::Index p = 0; p < d_p; ++p)
              for (Eigen::Index q = 0; q < d_p; ++q)
                sum += std::conj(psi(p)) * block(a * d_p + p, b * d_p + q) *
                       phi(q);
            v(a, b) = weight * sum;
          }
        completeness += v.adjoint() * v;
        outcome.operators.push_back(KrausOperator{j, m, std::move(v)});
      }
    }
    outcomes.push_back(std::move(outcome));
  }

  const double residual =
      (completeness - Matrix::Identity(d_s, d_s)).norm();
  if (residual > kCheckTol * (1.0 + std::sqrt(static_cast<double>(d_s))))
    throw ConsistencyError(
        "kraus_from_scheme: completeness violated before pruning, residual " +
        std::to_string(residual));

  for (auto& outcome : outcomes) {
    std::erase_if(outcome.operators,
                  [](const KrausOperator& op) { return op.v.norm() < kDropTol; });
  }
  return KrausSet::validated(d_s, std::move(outcomes));
}

DensityOperator post_measurement_state(const KrausSet& kraus,
                                       const DensityOperator& rho_s) {
  if (kraus.dim_s != rho_s.dim())
    throw DimensionError("post_measurement_state: dimension mismatch");
  Matrix out = Matrix::Zero(kraus.dim_s, kraus.dim_s);
  for (const auto& outcome : kraus.outcomes)
    for (const auto& op : outcome.operators)
      out += op.v * rho_s.matrix() * op.v.adjoint();
  return DensityOperator(std::move(out));
}

MeterStats kraus_meter_statistics(const KrausSet& kraus,
                                  const DensityOperator& rho_s) {
  if (kraus.dim_s != rho_s.dim())
    throw DimensionError("kraus_meter_statistics: dimension mismatch");
  double mean = 0.0, second = 0.0;
  for (const auto& outcome : kraus.outcomes) {
    double prob = 0.0;
    for (const auto& op : outcome.operators)
      prob += (op.v.adjoint() * op.v * rho_s.matrix()).trace().real();
    mean += outcome.eigenvalue * prob;
    second += outcome.eigenvalue * outcome.eigenvalue * prob;
  }
  return MeterStats{mean, second - mean * mean};
}

MeterStats meter_statistics(const MeasurementScheme& scheme,
                            const DensityOperator& rho_s) {
  return kraus_meter_statistics(kraus_from_scheme(scheme), rho_s);
}

MeterStats meter_statistics_heisenberg(const MeasurementScheme& scheme,
                                       const DensityOperator& rho_s) {
  if (rho_s.dim() != scheme.d_s())
    throw DimensionError("meter_statistics_heisenberg: dimension mismatch");
  Moments m = hermitian_moments(scheme.heisenberg_meter(),
                                tensor(rho_s.matrix(), scheme.rho_p().matrix()));
  return MeterStats{m.mean, m.variance()};
}

PurifyReport purify_and_verify(const KrausSet& kraus,
                               const DensityOperator& rho_s) {
  if (kraus.dim_s != rho_s.dim())
    throw DimensionError("purify_and_verify: dimension mismatch");
  const Eigen::Index d_s = kraus.dim_s;
  const Eigen::Index n_ops = kraus.total_operators();

  EigResult rho_eig = hermitian_eig(rho_s.matrix());

  PurifiedRun run;
  run.d_s = d_s;
  run.n_ops = n_ops;
  run.psi = Vector::Zero(d_s * d_s * n_ops);
  // psi[(a*d_s + mu)*n_ops + t] = sqrt(lambda_mu) (V_t u_mu)_a, where Q basis
  // vector t stands for the Kraus label (k, j, m).
  Eigen::Index t = 0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kraus.outcomes.size());
       ++k) {
    const auto& outcome = kraus.outcomes[static_cast<size_t>(k)];
    for (const auto& op : outcome.operators) {
      run.meter_prime_eigenvalues.push_back(outcome.eigenvalue);
      run.block_index.push_back({k, op.j, op.m});
      for (Eigen::Index mu = 0; mu < d_s; ++mu) {
        const double lambda = std::max(0.0, rho_eig.eigenvalues(mu));
        if (lambda == 0.0) continue;
        Vector branch = op.v * rho_eig.eigenvectors.col(mu);
        for (Eigen::Index a = 0; a < d_s; ++a)
          run.psi((a * d_s + mu) * n_ops + t) += std::sqrt(lambda) * branch(a);
      }
      ++t;
    }
  }

  const double norm = run.psi.norm();
  if (std::abs(norm - 1.0) > kCheckTol)
    throw ConsistencyError("purify_and_verify: purified state norm " +
                           std::to_string(norm) + " is not 1");

  // Moments of M' = sum_t r_t |t><t| on Q.
  double mean = 0.0, second = 0.0;
  Matrix reduced = Matrix::Zero(d_s, d_s);
  for (Eigen::Index a = 0; a < d_s; ++a)
    for (Eigen::Index mu = 0; mu < d_s; ++mu)
      for (Eigen::Index tt = 0; tt < n_ops; ++tt) {
        const Complex amp = run.psi((a * d_s + mu) * n_ops + tt);
        const double w = std::norm(amp);
        const double r = run.meter_prime_eigenvalues[static_cast<size_t>(tt)];
        mean += r * w;
        second += r * r * w;
        for (Eigen::Index a2 = 0; a2 < d_s; ++a2)
          reduced(a, a2) += amp * std::conj(run.psi((a2 * d_s + mu) * n_ops + tt));
      }

  PurifyReport report;
  report.purified = MeterStats{mean, second - mean * mean};

  MeterStats direct = kraus_meter_statistics(kraus, rho_s);
  DensityOperator post = post_measurement_state(kraus, rho_s);

  report.mean_error = std::abs(report.purified.mean - direct.mean);
  report.variance_error = std::abs(report.purified.variance - direct.variance);
  report.state_error = (reduced - post.matrix()).norm();
  report.run = std::move(run);

  const double scale = 1.0 + std::abs(direct.mean) + direct.variance;
  if (report.mean_error > kCheckTol * scale)
    throw ConsistencyError(
        "purify_and_verify: purified meter mean deviates by " +
        std::to_string(report.mean_error));
  if (report.variance_error > kCheckTol * scale)
    throw ConsistencyError(
        "purify_and_verify: purified meter variance deviates by " +
        std::to_string(report.variance_error));
  if (report.state_error > kCheckTol)
    throw ConsistencyError(
        "purify_and_verify: purified reduced state deviates from the "
        "post-measurement state by " +
        std::to_string(report.state_error));
  return report;
}

}  // namespace qmeter
