#include <benchmark/benchmark.h>

#include "qmeter/experiments.hpp"
#include "qmeter/scheme.hpp"
#include "qmeter/turndr.hpp"

using namespace qmeter;

namespace {

MeasurementScheme make_scheme(int d_s, int d_p, Rng& rng) {
  return MeasurementScheme(d_s, d_p, haar_unitary(d_s * d_p, rng),
                           random_meter(d_s * d_p, rng),
                           random_density(d_p, rng));
}

void BM_tensor(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(1);
  Matrix a = random_meter(d, rng).matrix();
  Matrix b = random_meter(d, rng).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(tensor(a, b));
}
BENCHMARK(BM_tensor)->Arg(2)->Arg(4)->Arg(8);

void BM_partial_trace(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(2);
  Matrix x = random_meter(d * d, rng).matrix();
  for (auto _ : state)
    benchmark::DoNotOptimize(partial_trace(x, d, d, Subsystem::System));
}
BENCHMARK(BM_partial_trace)->Arg(2)->Arg(4)->Arg(8);

void BM_kraus_from_scheme(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(3);
  MeasurementScheme scheme = make_scheme(d, d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kraus_from_scheme(scheme));
}
BENCHMARK(BM_kraus_from_scheme)->Arg(2)->Arg(3)->Arg(4);

void BM_survival_activity(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(4);
  MeasurementScheme scheme = make_scheme(d, d, rng);
  KrausSet kraus = kraus_from_scheme(scheme);
  DensityOperator rho = random_density(d, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(survival_activity(kraus, rho));
}
BENCHMARK(BM_survival_activity)->Arg(2)->Arg(3)->Arg(4);

void BM_haar_unitary(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(haar_unitary(d, rng));
}
BENCHMARK(BM_haar_unitary)->Arg(2)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
