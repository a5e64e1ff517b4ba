#include <doctest.h>

#include "oracles.hpp"
#include "qmeter/experiments.hpp"
#include "qmeter/scheme.hpp"
#include "test_helpers.hpp"

using namespace qmeter;

namespace {

Matrix swap_gate() {
  Matrix s = Matrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1.0;
  s(1, 2) = s(2, 1) = 1.0;
  return s;
}

MeasurementScheme swap_readout_scheme() {
  // Interact by swapping S and P, then read sigma_z + I on the probe.
  Observable meter(tensor(identity(2), pauli_z() + identity(2)));
  DensityOperator rho_p(Matrix{0.5 * (identity(2) + 0.3 * pauli_x())});
  return MeasurementScheme(2, 2, UnitaryOperator(swap_gate()), meter, rho_p);
}

}  // namespace

TEST_CASE("derive_unbiased_observable: trivial and swap interactions") {
  // U = I and a meter acting on S alone reads that observable directly.
  Observable meter(tensor(pauli_z() + identity(2), identity(2)));
  DensityOperator rho_p(Matrix{0.5 * identity(2)});
  MeasurementScheme direct(2, 2, UnitaryOperator(identity(4)), meter, rho_p);
  Observable a = derive_unbiased_observable(direct);
  CHECK((a.matrix() - (pauli_z() + identity(2))).norm() < 1e-12);
  CHECK(unbiasedness_residual(direct, a) < 1e-12);

  // Swapping first moves the system into the probe register, so the same
  // meter on P measures sigma_z + I on the original system.
  MeasurementScheme swapped = swap_readout_scheme();
  Observable a_swap = derive_unbiased_observable(swapped);
  CHECK((a_swap.matrix() - (pauli_z() + identity(2))).norm() < 1e-12);
}

TEST_CASE("derived observable reproduces the meter mean on random states") {
  std::mt19937_64 rng(301);
  for (int rep = 0; rep < 5; ++rep) {
    MeasurementScheme scheme = helpers::random_scheme(2, 3, rng);
    Observable a = derive_unbiased_observable(scheme);
    for (int s = 0; s < 20; ++s) {
      Matrix g = oracles::random_matrix(2, rng);
      Matrix rho_m = g * g.adjoint();
      rho_m /= rho_m.trace();
      DensityOperator rho(rho_m);
      MeterStats stats = meter_statistics_heisenberg(scheme, rho);
      CHECK(std::abs(stats.mean - expectation(a, rho)) < 1e-9);
    }
  }
}

TEST_CASE("unbiasedness_residual scales with the perturbation") {
  std::mt19937_64 rng(302);
  MeasurementScheme scheme = helpers::random_scheme(3, 2, rng);
  Observable a = derive_unbiased_observable(scheme);
  CHECK(unbiasedness_residual(scheme, a) < 1e-12);

  const double eps = 1e-3;
  Observable shifted(Matrix{a.matrix() + eps * identity(3)});
  CHECK(unbiasedness_residual(scheme, shifted) ==
        doctest::Approx(eps * std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("noise_operator: additive probe readout noise") {
  // M = A x I + I x sigma_z with a trivial interaction: the noise is
  // exactly the probe term.
  Matrix a_m = Matrix::Zero(2, 2);
  a_m.diagonal() << 3.0, 1.0;
  Observable meter(
      Matrix{tensor(a_m, identity(2)) + tensor(identity(2), pauli_z())});
  DensityOperator rho_p(Matrix{0.5 * identity(2)});
  MeasurementScheme scheme(2, 2, UnitaryOperator(identity(4)), meter, rho_p);

  Observable a = derive_unbiased_observable(scheme);
  Matrix n = noise_operator(scheme, a);
  CHECK((n - tensor(identity(2), pauli_z())).norm() < 1e-10);

  // dN^2 = <sigma_z^2> = 1 in the maximally mixed probe.
  Matrix rho_full = tensor(0.5 * identity(2), rho_p.matrix());
  Moments mn = hermitian_moments(n, rho_full);
  CHECK(mn.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mn.variance() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kraus_from_scheme: projective readout in the probe eigenbasis") {
  // U = I and M = (sigma_z + I) x I_P measures the system projectively; in
  // the eigenbasis of rho_P the cross terms j != m vanish.
  Matrix rho_p_m = Matrix::Zero(2, 2);
  rho_p_m.diagonal() << 0.7, 0.3;
  DensityOperator rho_p(rho_p_m);
  Observable meter(tensor(pauli_z() + identity(2), identity(2)));
  MeasurementScheme scheme(2, 2, UnitaryOperator(identity(4)), meter, rho_p,
                           identity(2));

  KrausSet kraus = kraus_from_scheme(scheme);
  REQUIRE(kraus.outcomes.size() == 2);
  CHECK(kraus.outcomes[0].eigenvalue == doctest::Approx(0.0));
  CHECK(kraus.outcomes[1].eigenvalue == doctest::Approx(2.0));

  Matrix p0 = Matrix::Zero(2, 2);
  p0(1, 1) = 1.0;  // sigma_z + I annihilates |1>
  Matrix p1 = Matrix::Zero(2, 2);
  p1(0, 0) = 1.0;
  // Each surviving operator is proportional to the system projector of its
  // outcome and carries one of the probe weights; the cross terms between
  // distinct probe eigenvectors are dropped, so each block keeps exactly
  // one operator per weight and the weights sum to 1.
  for (std::size_t k = 0; k < 2; ++k) {
    const Matrix& proj = k == 0 ? p0 : p1;
    REQUIRE(kraus.outcomes[k].operators.size() == 2);
    double weight = 0.0;
    for (const KrausOperator& op : kraus.outcomes[k].operators) {
      const double q = op.v.squaredNorm();
      CHECK((std::abs(q - 0.7) < 1e-12 || std::abs(q - 0.3) < 1e-12));
      const Complex coeff = (proj.adjoint() * op.v).trace();
      CHECK((op.v - coeff * proj).norm() < 1e-12);
      weight += q;
    }
    CHECK(weight == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kraus completeness holds across random schemes") {
  std::mt19937_64 rng(304);
  for (int rep = 0; rep < 50; ++rep) {
    MeasurementScheme scheme = helpers::random_scheme(2 + rep % 3, 2, rng);
    KrausSet kraus = kraus_from_scheme(scheme);
    Matrix sum = Matrix::Zero(kraus.dim_s, kraus.dim_s);
    for (const KrausOutcome& outcome : kraus.outcomes)
      for (const KrausOperator& op : outcome.operators)
        sum += op.v.adjoint() * op.v;
    CHECK((sum - identity(kraus.dim_s)).norm() < 1e-9);
  }
}

TEST_CASE("post_measurement_state: trivial and dephasing channels") {
  DensityOperator plus(Matrix{0.5 * (identity(2) + pauli_x())});

  KrausSet trivial = KrausSet::validated(
      2, {KrausOutcome{0.0, {KrausOperator{0, 0, identity(2)}}}});
  CHECK((post_measurement_state(trivial, plus).matrix() - plus.matrix())
            .norm() < 1e-12);

  // Projective sigma_z readout dephases |+> to the maximally mixed state.
  Matrix p0 = Matrix::Zero(2, 2);
  p0(1, 1) = 1.0;
  Matrix p1 = Matrix::Zero(2, 2);
  p1(0, 0) = 1.0;
  KrausSet dephase = KrausSet::validated(
      2, {KrausOutcome{0.0, {KrausOperator{0, 0, p0}}},
          KrausOutcome{2.0, {KrausOperator{0, 0, p1}}}});
  CHECK((post_measurement_state(dephase, plus).matrix() - 0.5 * identity(2))
            .norm() < 1e-12);
}

TEST_CASE("post_measurement_state matches the full-space projection oracle") {
  std::mt19937_64 rng(305);
  for (int rep = 0; rep < 20; ++rep) {
    MeasurementScheme scheme = helpers::random_scheme(2, 2, rng);
    Matrix g = oracles::random_matrix(2, rng);
    Matrix rho_m = g * g.adjoint();
    rho_m /= rho_m.trace();
    DensityOperator rho(rho_m);

    // tr_P[sum_k Pi_k U (rho x rho_P) U^dag Pi_k] computed directly.
    Matrix joint = scheme.u().matrix() * tensor(rho_m, scheme.rho_p().matrix()) *
                   scheme.u().matrix().adjoint();
    Matrix projected = Matrix::Zero(4, 4);
    for (const Matrix& pi : scheme.meter().projectors())
      projected += pi * joint * pi;
    Matrix expected = partial_trace(projected, 2, 2, Subsystem::System);

    KrausSet kraus = kraus_from_scheme(scheme);
    CHECK((post_measurement_state(kraus, rho).matrix() - expected).norm() <
          1e-9);
  }
}

TEST_CASE("meter statistics: swap readout and the variance split") {
  MeasurementScheme scheme = swap_readout_scheme();
  DensityOperator rho(Matrix{0.5 * (identity(2) + pauli_y())});
  MeterStats stats = meter_statistics(scheme, rho);

  Observable a = derive_unbiased_observable(scheme);
  CHECK(stats.mean == doctest::Approx(expectation(a, rho)).epsilon(1e-10));

  Matrix n = noise_operator(scheme, a);
  Matrix rho_full = tensor(rho.matrix(), scheme.rho_p().matrix());
  const double var_n = hermitian_moments(n, rho_full).variance();
  CHECK(stats.variance ==
        doctest::Approx(variance(a, rho) + var_n).epsilon(1e-9));
}

TEST_CASE("Kraus-sum and Heisenberg meter statistics agree") {
  std::mt19937_64 rng(306);
  for (int rep = 0; rep < 50; ++rep) {
    MeasurementScheme scheme = helpers::random_scheme(2 + rep % 2, 2, rng);
    Matrix g = oracles::random_matrix(scheme.d_s(), rng);
    Matrix rho_m = g * g.adjoint();
    rho_m /= rho_m.trace();
    DensityOperator rho(rho_m);

    MeterStats a = meter_statistics(scheme, rho);
    MeterStats b = meter_statistics_heisenberg(scheme, rho);
    CHECK(std::abs(a.mean - b.mean) < 1e-9);
    CHECK(std::abs(a.variance - b.variance) < 1e-9);
  }
}

TEST_CASE("the channel is invariant under the probe readout basis") {
  std::mt19937_64 rng(307);
  for (int rep = 0; rep < 10; ++rep) {
    MeasurementScheme base = helpers::random_scheme(2, 3, rng);
    Matrix basis = haar_unitary(3, rng).matrix();
    MeasurementScheme rotated(base.d_s(), base.d_p(), base.u(), base.meter(),
                              base.rho_p(), basis);
    CHECK(rotated.has_custom_probe_basis());

    Matrix g = oracles::random_matrix(2, rng);
    Matrix rho_m = g * g.adjoint();
    rho_m /= rho_m.trace();
    DensityOperator rho(rho_m);

    KrausSet ka = kraus_from_scheme(base);
    KrausSet kb = kraus_from_scheme(rotated);
    CHECK((post_measurement_state(ka, rho).matrix() -
           post_measurement_state(kb, rho).matrix())
              .norm() < 1e-10);
    MeterStats sa = kraus_meter_statistics(ka, rho);
    MeterStats sb = kraus_meter_statistics(kb, rho);
    CHECK(std::abs(sa.mean - sb.mean) < 1e-10);
    CHECK(std::abs(sa.variance - sb.variance) < 1e-10);
  }
}

TEST_CASE("purify_and_verify: trivial channel and pure input") {
  KrausSet trivial = KrausSet::validated(
      2, {KrausOutcome{0.0, {KrausOperator{0, 0, identity(2)}}}});
  DensityOperator rho(Matrix{0.5 * identity(2)});
  PurifyReport report = purify_and_verify(trivial, rho);
  CHECK(report.mean_error < 1e-12);
  CHECK(report.variance_error < 1e-12);
  CHECK(report.state_error < 1e-12);
  CHECK(std::abs(report.run.psi.norm() - 1.0) < 1e-12);

  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  CHECK(purify_and_verify(trivial, DensityOperator(pure)).state_error < 1e-12);
}

TEST_CASE("purification reproduces meter statistics on random schemes") {
  std::mt19937_64 rng(308);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index d_s = 2 + rep % 3;
    MeasurementScheme scheme = helpers::random_scheme(d_s, 2, rng);
    Matrix g = oracles::random_matrix(d_s, rng);
    Matrix rho_m = g * g.adjoint();
    rho_m /= rho_m.trace();
    DensityOperator rho(rho_m);

    KrausSet kraus = kraus_from_scheme(scheme);
    PurifyReport report = purify_and_verify(kraus, rho);
    const double scale = 1.0 + report.purified.variance;
    CHECK(report.mean_error <= 1e-9 * scale);
    CHECK(report.variance_error <= 1e-9 * scale);
    CHECK(report.state_error <= 1e-9);
  }
}

TEST_CASE("a biased reference degrades the variance split proportionally") {
  std::mt19937_64 rng(309);
  MeasurementScheme scheme = helpers::random_scheme(2, 2, rng);
  Observable a = derive_unbiased_observable(scheme);
  Matrix bias = oracles::random_hermitian(2, rng);
  bias *= 1e-3 / bias.norm();
  Observable biased(Matrix{a.matrix() + bias});
  const double residual = unbiasedness_residual(scheme, biased);
  CHECK(residual == doctest::Approx(1e-3).epsilon(1e-9));

  DensityOperator rho(Matrix{0.5 * identity(2)});
  MeterStats stats = meter_statistics(scheme, rho);
  Matrix n = noise_operator(scheme, biased);
  Matrix rho_full = tensor(rho.matrix(), scheme.rho_p().matrix());
  const double split = variance(biased, rho) +
                       hermitian_moments(n, rho_full).variance();
  const double scale = 1.0 + stats.variance;
  CHECK(std::abs(stats.variance - split) <= 10.0 * residual * scale);
}
