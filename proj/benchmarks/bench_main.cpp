#include <benchmark/benchmark.h>

#include "extskewt/angular.hpp"
#include "extskewt/fit.hpp"

using namespace extskewt;

namespace {

Matrix corr3(double w12, double w13, double w23) {
  Matrix m(3, 3);
  m << 1.0, w12, w13, w12, 1.0, w23, w13, w23, 1.0;
  return m;
}

ExtDepModel model2() {
  Matrix c(2, 2);
  c << 1.0, 0.6, 0.6, 1.0;
  return {c, Vector::Zero(2), 0.0, 1.5};
}

ExtDepModel model3(bool skew) {
  Vector a = Vector::Zero(3);
  if (skew) a << -3.0, -3.0, 7.0;
  return {corr3(0.6, 0.8, 0.7), a, 0.0, 3.0};
}

}  // namespace

static void BM_MvtCdf3(benchmark::State& state) {
  QmcConfig cfg;
  CorrelationMatrix c(corr3(0.5, 0.3, 0.6));
  Vector b(3), nc(3);
  b << 0.7, -0.2, 0.4;
  nc << 0.3, 0.0, -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mvt_cdf(b, c, nc, 4.0, cfg).value);
  }
}
BENCHMARK(BM_MvtCdf3);

static void BM_MvtCdfQmc4(benchmark::State& state) {
  QmcConfig cfg;
  Matrix m = Matrix::Identity(4, 4);
  m(0, 1) = m(1, 0) = 0.5;
  m(2, 3) = m(3, 2) = 0.3;
  CorrelationMatrix c(m);
  Vector b(4);
  b << 0.7, -0.2, 0.4, 1.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mvt_cdf_qmc(b, c, Vector::Zero(4), 4.0, cfg).value);
  }
}
BENCHMARK(BM_MvtCdfQmc4);

static void BM_DensityD2(benchmark::State& state) {
  UnitFrechetV v(model2());
  Vector x(2);
  x << 1.1, 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(density_d2(v, x));
  }
}
BENCHMARK(BM_DensityD2);

static void BM_DensityD3Skew(benchmark::State& state) {
  UnitFrechetV v(model3(true));
  Vector x(3);
  x << 1.1, 0.7, 1.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(density_d3(v, x));
  }
}
BENCHMARK(BM_DensityD3Skew);

static void BM_InteriorDensity3(benchmark::State& state) {
  UnitFrechetV v(model3(false));
  Vector w(3);
  w << 0.3, 0.4, 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(v.interior_density(w));
  }
}
BENCHMARK(BM_InteriorDensity3);

static void BM_ExponentV3(benchmark::State& state) {
  QmcConfig cfg;
  const ExtDepModel m = model3(true);
  const MarginDerived md = margin_derived(m);
  Vector x(3);
  x << 1.0, 1.3, 0.8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exponent_V(m, md, x, cfg).value);
  }
}
BENCHMARK(BM_ExponentV3);

static void BM_SimulateMaxStable(benchmark::State& state) {
  const ExtDepModel m = model2();
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_maxstable(m, 10, rng).paths.sum());
  }
}
BENCHMARK(BM_SimulateMaxStable);

BENCHMARK_MAIN();
