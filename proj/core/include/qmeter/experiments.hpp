#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qmeter/nelder_mead.hpp"
#include "qmeter/turndr.hpp"

namespace qmeter {

struct ExperimentConfig {
  int trials = 1000;
  std::uint64_t master_seed = 20220831;  // fixed default, see README
  std::vector<int> dim_range{2, 3, 4, 5};
  double unbias_tol = 1e-5;
  double reg_tol = 1e-8;
  int max_restarts = 50;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Per-trial RNG stream keyed by (master_seed, trial_index) so trials are
/// reproducible independently of execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index);

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phases normalized away.
UnitaryOperator haar_unitary(int d, Rng& rng);

/// Hilbert-Schmidt ensemble: G G^dag / tr(G G^dag) with Gaussian G.
DensityOperator random_density(int d, Rng& rng);

/// GUE-distributed Hermitian matrix shifted so its ground eigenvalue is 0.
Observable random_meter(int d, Rng& rng);

enum class TrialStatus { Ok, Degenerate, Unbounded, Failed };
const char* to_string(TrialStatus status);

struct TrialRecord {
  int trial_index = 0;
  int d_s = 0;
  int d_p = 0;
  std::uint64_t seed = 0;
  TurReport report;
  TrialStatus status = TrialStatus::Failed;
  std::string failure_reason;
};

/// Random-scheme sweep: per trial, draw dimensions, probe state, unitary and
/// meter, derive the unbiased observable, and evaluate the trade-off bound.
std::vector<TrialRecord> run_random_sweep(const ExperimentConfig& config);

/// Fixed constants of the qubit trade-off experiment.
DensityOperator qubit_target_state();
Observable qubit_target_observable();

struct QubitScheme {
  MeasurementScheme scheme;
  double residual = 0.0;
  int restarts_used = 0;
};

/// Searches for a probe state and probe-only meter making the given 4x4
/// interaction an unbiased indirect measurement of the fixed qubit target.
/// The probe state is parametrized by a Bloch vector mapped into the unit
/// ball and the meter by a scaled rank-1 projector, which exhausts the
/// zero-grounded Hermitian family at d_P = 2. Returns nullopt when no
/// restart reaches the residual tolerance.
std::optional<QubitScheme> optimize_qubit_scheme(const UnitaryOperator& u,
                                                 Rng& rng,
                                                 const ExperimentConfig& config);

struct QubitTrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  double residual = 0.0;
  TurReport report;
  TrialStatus status = TrialStatus::Failed;
  std::optional<MeasurementScheme> scheme;
};

struct QubitSweep {
  std::vector<QubitTrialRecord> records;
  int attempts = 0;
  int failures = 0;
};

/// Draws Haar unitaries and keeps optimizing schemes until config.trials
/// accepted records are collected.
QubitSweep run_qubit_tradeoff(const ExperimentConfig& config);

struct NdrRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  double noise_a = 0.0;  // rms of the noise operator of A
  double dist_b = 0.0;   // rms of the disturbance operator of B
  double std_a = 0.0;
  double std_b = 0.0;
  double commutator_abs = 0.0;
  std::optional<double> xi;
  double cv_squared = 0.0;
  double floor = 0.0;
  double slack = 0.0;
  bool holds_additive = false;
  bool holds_reciprocal = false;
  double residual = 0.0;
  TrialStatus status = TrialStatus::Failed;
};

struct NdrSweep {
  std::vector<NdrRecord> records;
  int attempts = 0;
  int failures = 0;
};

/// Qubit noise-disturbance sweep against the incompatible observable b.
NdrSweep run_ndr_sweep(const ExperimentConfig& config, const Observable& b);

}  // namespace qmeter
