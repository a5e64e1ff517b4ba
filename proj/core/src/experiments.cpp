#include "qmeter/experiments.hpp"

#include <cmath>

namespace qmeter {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix ginibre(int d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw ValidationError("config: trials must be >= 1");
  if (unbias_tol <= 0.0 || reg_tol <= 0.0)
    throw ValidationError("config: tolerances must be positive");
  if (max_restarts < 1)
    throw ValidationError("config: max_restarts must be >= 1");
  if (dim_range.empty())
    throw ValidationError("config: dim_range must not be empty");
  for (int d : dim_range)
    if (d < 2) throw ValidationError("config: dimensions must be >= 2");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  std::uint64_t state = master_seed ^ (0xd1b54a32d192ed03ULL * (trial_index + 1));
  std::uint64_t s = splitmix64(state);
  return splitmix64(state) ^ s;
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
  return Rng(trial_seed(master_seed, trial_index));
}

UnitaryOperator haar_unitary(int d, Rng& rng) {
  Matrix g = ginibre(d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Normalize the R-diagonal phases so the distribution is Haar rather
  // than QR-convention dependent.
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    const double mag = std::abs(diag);
    q.col(i) *= (mag > 0.0) ? diag / mag : Complex(1.0, 0.0);
  }
  return UnitaryOperator(std::move(q));
}

DensityOperator random_density(int d, Rng& rng) {
  Matrix g = ginibre(d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityOperator(0.5 * (rho + rho.adjoint()));
}

Observable random_meter(int d, Rng& rng) {
  Matrix g = ginibre(d, rng);
  return shift_to_zero_ground(Observable(0.5 * (g + g.adjoint())));
}

namespace {

// Meter for the random sweep. A generic Hermitian matrix has a rank-1
// ground eigenspace, which makes every zero-outcome Kraus operator rank 1
// and the survival activity unbounded whenever d_s > 1. Collapsing the
// lowest d_s eigenvalues onto the ground level keeps the ensemble random
// while admitting regular zero-outcome candidates.
Observable random_sweep_meter(int d_total, int d_s, Rng& rng) {
  Matrix g = ginibre(d_total, rng);
  EigResult eig = hermitian_eig(0.5 * (g + g.adjoint()));
  RealVector spectrum(d_total);
  const double pivot = eig.eigenvalues(d_s - 1);
  for (Eigen::Index i = 0; i < d_total; ++i)
    spectrum(i) = (i < d_s) ? 0.0 : eig.eigenvalues(i) - pivot;
  return Observable(eig.eigenvectors * spectrum.asDiagonal() *
                    eig.eigenvectors.adjoint());
}

}  // namespace

const char* to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::Ok: return "ok";
    case TrialStatus::Degenerate: return "degenerate";
    case TrialStatus::Unbounded: return "unbounded";
    case TrialStatus::Failed: return "failed";
  }
  return "unknown";
}

std::vector<TrialRecord> run_random_sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<TrialRecord> records;
  records.reserve(static_cast<size_t>(config.trials));
  for (int i = 0; i < config.trials; ++i) {
    TrialRecord record;
    record.trial_index = i;
    record.seed = trial_seed(config.master_seed, static_cast<std::uint64_t>(i));
    Rng rng(record.seed);
    std::uniform_int_distribution<size_t> pick(0, config.dim_range.size() - 1);
    record.d_s = config.dim_range[pick(rng)];
    record.d_p = config.dim_range[pick(rng)];
    try {
      DensityOperator rho_p = random_density(record.d_p, rng);
      UnitaryOperator u = haar_unitary(record.d_s * record.d_p, rng);
      Observable meter =
          random_sweep_meter(record.d_s * record.d_p, record.d_s, rng);
      MeasurementScheme scheme(record.d_s, record.d_p, std::move(u),
                               std::move(meter), std::move(rho_p));
      DensityOperator rho_s = random_density(record.d_s, rng);
      record.report =
          tur_bound(scheme, rho_s, config.unbias_tol, config.reg_tol);
      purify_and_verify(kraus_from_scheme(scheme), rho_s);
      record.status =
          record.report.xi ? TrialStatus::Ok : TrialStatus::Unbounded;
    } catch (const DegenerateError& e) {
      record.status = TrialStatus::Degenerate;
      record.failure_reason = e.what();
    } catch (const Error& e) {
      record.status = TrialStatus::Failed;
      record.failure_reason = e.what();
    }
    records.push_back(std::move(record));
  }
  return records;
}

DensityOperator qubit_target_state() {
  Matrix rho(2, 2);
  rho << Complex(0.5, 0.0), Complex(0.0, -0.5), Complex(0.0, 0.5),
      Complex(0.5, 0.0);
  return DensityOperator(std::move(rho));
}

Observable qubit_target_observable() {
  return Observable(0.5 * pauli_z() + identity(2));
}

namespace {

// 6 parameters: Bloch direction w (3), meter direction angles (2), meter
// magnitude (1).
struct QubitAnsatz {
  Matrix rho_p;
  Matrix meter_p;
};

QubitAnsatz decode_qubit_params(const Eigen::VectorXd& p) {
  Eigen::Vector3d w = p.head<3>();
  const double norm = w.norm();
  Eigen::Vector3d bloch =
      (norm > 0.0) ? Eigen::Vector3d(std::tanh(norm) / norm * w)
                   : Eigen::Vector3d::Zero();
  QubitAnsatz out;
  out.rho_p = 0.5 * (identity(2) + bloch.x() * pauli_x() +
                     bloch.y() * pauli_y() + bloch.z() * pauli_z());

  const double alpha = p(3), beta = p(4), mp = p(5);
  const double magnitude = (mp > 30.0) ? mp : std::log1p(std::exp(mp));
  Vector v(2);
  v << Complex(std::cos(alpha), 0.0),
      std::sin(alpha) * Complex(std::cos(beta), std::sin(beta));
  out.meter_p = magnitude * (v * v.adjoint());
  return out;
}

double qubit_residual(const Matrix& u, const Matrix& target,
                      const Eigen::VectorXd& p) {
  QubitAnsatz ansatz = decode_qubit_params(p);
  Matrix meter = tensor(identity(2), ansatz.meter_p);
  Matrix pulled =
      u.adjoint() * meter * u * tensor(identity(2), ansatz.rho_p);
  Matrix a = partial_trace(pulled, 2, 2, Subsystem::System);
  return (target - a).norm();
}

}  // namespace

std::optional<QubitScheme> optimize_qubit_scheme(const UnitaryOperator& u,
                                                 Rng& rng,
                                                 const ExperimentConfig& config) {
  const Matrix target = qubit_target_observable().matrix();
  const Matrix& umat = u.matrix();
  auto objective = [&](const Eigen::VectorXd& p) {
    return qubit_residual(umat, target, p);
  };

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  for (int restart = 0; restart < config.max_restarts; ++restart) {
    Eigen::VectorXd start(6);
    if (restart == 0) {
      start << 0.1, 0.1, 0.1, 0.7, 0.3, 0.5;
    } else {
      start << gauss(rng), gauss(rng), gauss(rng), angle(rng), angle(rng),
          gauss(rng);
    }
    NelderMeadResult best = nelder_mead(objective, start, 1e-9, 4000, 0.5);
    // Polish from the found vertex with shrinking steps; the landscape is
    // smooth near a root and this reliably gains several digits.
    for (double step : {1e-2, 1e-4}) {
      NelderMeadResult refined =
          nelder_mead(objective, best.argmin, 1e-12, 2000, step);
      if (refined.value < best.value) best = refined;
    }
    if (best.value <= config.unbias_tol) {
      QubitAnsatz ansatz = decode_qubit_params(best.argmin);
      MeasurementScheme scheme(
          2, 2, u, shift_to_zero_ground(Observable(tensor(identity(2), ansatz.meter_p))),
          DensityOperator(ansatz.rho_p));
      return QubitScheme{std::move(scheme), best.value, restart + 1};
    }
  }
  return std::nullopt;
}

QubitSweep run_qubit_tradeoff(const ExperimentConfig& config) {
  config.validate();
  QubitSweep sweep;
  const DensityOperator rho_s = qubit_target_state();
  const Observable target = qubit_target_observable();
  const int max_attempts = config.trials * 200;
  while (static_cast<int>(sweep.records.size()) < config.trials &&
         sweep.attempts < max_attempts) {
    const std::uint64_t seed = trial_seed(
        config.master_seed, static_cast<std::uint64_t>(sweep.attempts));
    Rng rng(seed);
    ++sweep.attempts;
    try {
      UnitaryOperator u = haar_unitary(4, rng);
      std::optional<QubitScheme> found = optimize_qubit_scheme(u, rng, config);
      if (!found) {
        ++sweep.failures;
        continue;
      }
      QubitTrialRecord record;
      record.trial_index = static_cast<int>(sweep.records.size());
      record.seed = seed;
      record.residual = found->residual;
      record.report = tur_bound(found->scheme, rho_s, config.unbias_tol,
                                config.reg_tol, target);
      purify_and_verify(kraus_from_scheme(found->scheme), rho_s);
      record.status =
          record.report.xi ? TrialStatus::Ok : TrialStatus::Unbounded;
      record.scheme = std::move(found->scheme);
      sweep.records.push_back(std::move(record));
    } catch (const Error&) {
      ++sweep.failures;
    }
  }
  if (static_cast<int>(sweep.records.size()) < config.trials)
    throw Error("run_qubit_tradeoff: attempt budget exhausted with " +
                std::to_string(sweep.records.size()) + " accepted schemes");
  return sweep;
}

NdrSweep run_ndr_sweep(const ExperimentConfig& config, const Observable& b) {
  if (b.dim() != 2)
    throw DimensionError("run_ndr_sweep: B must be a qubit observable");
  QubitSweep base = run_qubit_tradeoff(config);

  NdrSweep sweep;
  sweep.attempts = base.attempts;
  sweep.failures = base.failures;
  const DensityOperator rho_s = qubit_target_state();
  const Observable target = qubit_target_observable();
  for (const auto& trial : base.records) {
    NdrRecord record;
    record.trial_index = trial.trial_index;
    record.seed = trial.seed;
    record.residual = trial.residual;
    record.xi = trial.report.xi;
    record.cv_squared = trial.report.cv_squared;
    record.status = trial.status;
    const MeasurementScheme& scheme = *trial.scheme;

    Matrix joint = tensor(rho_s.matrix(), scheme.rho_p().matrix());
    // Root-mean-square magnitudes, the universally valid choice for the
    // noise and disturbance entering the relation.
    record.noise_a = std::sqrt(std::max(
        0.0, hermitian_moments(noise_operator(scheme, target), joint).second));
    Matrix d_b = disturbance_operator(scheme.u(), b, 2, 2);
    record.dist_b =
        std::sqrt(std::max(0.0, hermitian_moments(d_b, joint).second));
    record.std_a = std::sqrt(variance(target, rho_s));
    record.std_b = std::sqrt(variance(b, rho_s));
    Matrix comm = target.matrix() * b.matrix() - b.matrix() * target.matrix();
    record.commutator_abs = std::abs((comm * rho_s.matrix()).trace());

    NdrResult ndr = ndr_check(record.noise_a, record.dist_b, record.std_a,
                              record.std_b, record.commutator_abs);
    record.holds_additive = ndr.holds_additive;
    record.holds_reciprocal = ndr.holds_reciprocal;
    record.slack = ndr.slack;
    record.floor = (record.xi && *record.xi > 0.0)
                       ? noise_floor(*record.xi, record.cv_squared)
                       : 0.0;
    sweep.records.push_back(std::move(record));
  }
  return sweep;
}

}  // namespace qmeter
