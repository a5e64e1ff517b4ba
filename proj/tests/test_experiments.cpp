#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "qmeter/experiments.hpp"

using namespace qmeter;

TEST_CASE("trial_seed decorrelates neighbouring indices") {
  const std::uint64_t a = trial_seed(20220831, 0);
  const std::uint64_t b = trial_seed(20220831, 1);
  CHECK(a != b);
  CHECK(trial_seed(20220831, 0) == a);  // pure function
  CHECK(trial_seed(20220832, 0) != a);
}

TEST_CASE("haar_unitary is unitary at every dimension") {
  Rng rng(501);
  for (int d = 1; d <= 6; ++d) {
    Matrix u = haar_unitary(d, rng).matrix();
    CHECK((u.adjoint() * u - identity(d)).norm() <= 1e-10 * (1.0 + d));
  }
}

TEST_CASE("haar_unitary first-entry second moment matches 1/d") {
  // E|U_00|^2 = 1/d for the Haar measure; d = 2 gives 0.5.
  Rng rng(502);
  double acc = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    acc += std::norm(haar_unitary(2, rng).matrix()(0, 0));
  CHECK(acc / n == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("random_density produces valid states; purity matches d=2 HS value") {
  Rng rng(503);
  CHECK(random_density(1, rng).matrix()(0, 0).real() ==
        doctest::Approx(1.0));

  double purity = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Matrix rho = random_density(2, rng).matrix();
    CHECK(std::abs(rho.trace() - Complex(1.0)) < 1e-12);
    CHECK(hermitian_eig(rho).eigenvalues.minCoeff() >= -1e-12);
    purity += (rho * rho).trace().real();
  }
  // E tr(rho^2) = 4/5 for the Hilbert-Schmidt ensemble at d = 2.
  CHECK(purity / n == doctest::Approx(0.8).epsilon(0.025));
}

TEST_CASE("random_meter is zero-grounded with the right gap statistics") {
  Rng rng(504);
  for (int i = 0; i < 100; ++i) {
    Observable m = random_meter(3, rng);
    CHECK(std::abs(m.min_eigenvalue()) < 1e-12);
  }

  // At d = 2 the spectral gap is sqrt((a-b)^2 + 4|c|^2) for the Gaussian
  // entries a, b, c; compare the sample mean against an independent
  // Monte-Carlo evaluation of that closed form.
  const int n = 20000;
  double gap_sample = 0.0;
  for (int i = 0; i < n; ++i) {
    Observable m = random_meter(2, rng);
    gap_sample += m.eigenvalues().back();
  }
  gap_sample /= n;

  std::mt19937_64 ref_rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double off_std = 1.0 / std::sqrt(2.0);
  double gap_ref = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = gauss(ref_rng);
    const double b = gauss(ref_rng);
    const double cr = gauss(ref_rng) * off_std;
    const double ci = gauss(ref_rng) * off_std;
    gap_ref += std::sqrt((a - b) * (a - b) + 4.0 * (cr * cr + ci * ci));
  }
  gap_ref /= n;
  CHECK(gap_sample == doctest::Approx(gap_ref).epsilon(0.05));
}

TEST_CASE("run_random_sweep is deterministic in the master seed") {
  ExperimentConfig config;
  config.trials = 20;
  config.master_seed = 1234;
  std::vector<TrialRecord> a = run_random_sweep(config);
  std::vector<TrialRecord> b = run_random_sweep(config);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].d_s == b[i].d_s);
    CHECK(a[i].status == b[i].status);
    if (a[i].status == TrialStatus::Ok) {
      CHECK(a[i].report.lhs == b[i].report.lhs);
      CHECK(a[i].report.rhs == b[i].report.rhs);
      CHECK(a[i].report.cv_squared == b[i].report.cv_squared);
    }
  }
}

TEST_CASE("run_random_sweep records satisfy the bound") {
  ExperimentConfig config;
  config.trials = 60;
  config.master_seed = 777;
  std::vector<TrialRecord> records = run_random_sweep(config);
  REQUIRE(records.size() == 60);
  int ok = 0;
  for (const TrialRecord& r : records) {
    CHECK(r.status != TrialStatus::Failed);
    if (r.status != TrialStatus::Ok) continue;
    ++ok;
    CHECK(r.report.satisfied);
    CHECK(r.report.residual <= config.unbias_tol);
    CHECK(r.report.decomposition_error <=
          1e-9 * (1.0 + r.report.meter.variance));
  }
  CHECK(ok > 0);
}

TEST_CASE("nelder_mead minimizes standard objectives") {
  // Shifted quadratic.
  auto quadratic = [](const Eigen::VectorXd& x) {
    const double dx = x[0] - 1.0, dy = x[1] + 2.0;
    return dx * dx + 3.0 * dy * dy;
  };
  NelderMeadResult q =
      nelder_mead(quadratic, Eigen::Vector2d(0.0, 0.0), 1e-12, 2000, 1.0);
  CHECK(q.argmin[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(q.argmin[1] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(q.converged);

  // Constant objective terminates at the start value.
  auto constant = [](const Eigen::VectorXd&) { return 4.2; };
  NelderMeadResult c =
      nelder_mead(constant, Eigen::Vector2d(0.3, -0.7), 1e-9, 100, 0.5);
  CHECK(c.value == doctest::Approx(4.2));

  // Rosenbrock valley.
  auto rosenbrock = [](const Eigen::VectorXd& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NelderMeadResult r =
      nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), 1e-12, 10000, 0.5);
  CHECK(r.argmin[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.argmin[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("nelder_mead rejects non-finite objectives") {
  auto bad = [](const Eigen::VectorXd&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  Eigen::VectorXd start(1);
  start << 0.0;
  CHECK_THROWS_AS(nelder_mead(bad, start, 1e-9, 10, 0.5), ValidationError);
}

TEST_CASE("optimize_qubit_scheme: the trivial interaction cannot be unbiased") {
  // With U = I the meter acts on the probe alone, so the derived system
  // observable is a multiple of the identity and the residual cannot drop
  // below ||target - c I|| ~ 0.7.
  ExperimentConfig config;
  config.max_restarts = 5;
  Rng rng(505);
  CHECK_FALSE(
      optimize_qubit_scheme(UnitaryOperator(identity(4)), rng, config)
          .has_value());
}

TEST_CASE("optimize_qubit_scheme accepted schemes hit the target") {
  ExperimentConfig config;
  Rng rng = trial_rng(config.master_seed, 3);
  int accepted = 0;
  for (int attempt = 0; attempt < 30 && accepted < 3; ++attempt) {
    UnitaryOperator u = haar_unitary(4, rng);
    std::optional<QubitScheme> result =
        optimize_qubit_scheme(u, rng, config);
    if (!result) continue;
    ++accepted;
    CHECK(result->residual <= config.unbias_tol);
    CHECK(unbiasedness_residual(result->scheme, qubit_target_observable()) <=
          config.unbias_tol);
    TurReport report =
        tur_bound(result->scheme, qubit_target_state(), config.unbias_tol,
                  config.reg_tol, qubit_target_observable());
    CHECK(report.cv_squared == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(report.satisfied);
  }
  CHECK(accepted == 3);
}

TEST_CASE("run_qubit_tradeoff produces satisfied records") {
  ExperimentConfig config;
  config.trials = 10;
  config.master_seed = 42;
  QubitSweep sweep = run_qubit_tradeoff(config);
  REQUIRE(static_cast<int>(sweep.records.size()) == 10);
  for (const QubitTrialRecord& r : sweep.records) {
    CHECK(r.status == TrialStatus::Ok);
    CHECK(r.residual <= config.unbias_tol);
    CHECK(std::abs(r.report.cv_squared - 4.0) <= 1e-9);
    CHECK(r.report.satisfied);
    if (r.report.xi) {
      CHECK(1.0 + r.report.noise_ratio >= 4.0 / *r.report.xi - 1e-7);
    }
  }
}

TEST_CASE("run_ndr_sweep records satisfy both relation forms") {
  ExperimentConfig config;
  config.trials = 10;
  config.master_seed = 4242;
  NdrSweep sweep = run_ndr_sweep(config, Observable(pauli_x()));
  REQUIRE(static_cast<int>(sweep.records.size()) == 10);
  for (const NdrRecord& r : sweep.records) {
    CHECK(r.status == TrialStatus::Ok);
    CHECK(r.holds_additive);
    CHECK(r.holds_reciprocal);
    CHECK(r.slack >= -1e-9);
    // The survival activity caps how quiet the measurement can be.
    if (r.xi && *r.xi > 0.0 && *r.xi < r.cv_squared) {
      CHECK(r.noise_a / r.std_a >= r.floor - 1e-7 * (1.0 + r.floor));
      CHECK(r.floor ==
            doctest::Approx(std::sqrt(r.cv_squared / *r.xi - 1.0))
                .epsilon(1e-9));
    }
  }
}
