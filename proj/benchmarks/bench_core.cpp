#include <benchmark/benchmark.h>

#include <cmath>

#include "amo/green.hpp"
#include "amo/localization.hpp"
#include "amo/resonance.hpp"

namespace {

amo::ModelParams bench_params(std::int64_t max_site) {
  return amo::ModelParams::make(3.0, amo::FrequencySpec::golden(), 0.31, 0.5,
                                max_site);
}

void BM_DetP(benchmark::State& state) {
  const auto k = state.range(0);
  auto p = bench_params(std::max<std::int64_t>(k, 64));
  for (auto _ : state) {
    benchmark::DoNotOptimize(amo::det_p(p, 0.123, k));
  }
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_DetP)->Arg(100)->Arg(500)->Arg(2000);

void BM_GreenCramer(benchmark::State& state) {
  const auto size = state.range(0);
  auto p = bench_params(4 * size);
  const amo::Box box{0, size - 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(amo::green_cramer(p, box, size / 3));
  }
}
BENCHMARK(BM_GreenCramer)->Arg(64)->Arg(256)->Arg(1024);

void BM_ClassifyRegular(benchmark::State& state) {
  const auto k = state.range(0);
  auto p = bench_params(8 * k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        amo::classify_regular(p, 2 * k, std::log(3.0) - 0.3, k));
  }
}
BENCHMARK(BM_ClassifyRegular)->Arg(25)->Arg(67);

void BM_UniformityProduct(benchmark::State& state) {
  auto alpha = amo::construct_liouville(0.4, 8);
  auto p = amo::ModelParams::make(std::exp(1.0), std::move(alpha), 0.31, 0.0,
                                  4096);
  for (auto _ : state) {
    benchmark::DoNotOptimize(amo::uniformity_product(p, 4, 1, 0.2, 0));
  }
}
BENCHMARK(BM_UniformityProduct);

void BM_Lyapunov(benchmark::State& state) {
  const auto steps = state.range(0);
  auto p = bench_params(steps);
  for (auto _ : state) {
    benchmark::DoNotOptimize(amo::lyapunov(p, steps, 1));
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_Lyapunov)->Arg(10000)->Arg(100000);

void BM_Eigensolve(benchmark::State& state) {
  const auto n = state.range(0);
  auto p = bench_params(2 * n);
  const amo::Box box{0, n - 1};
  const amo::Selector sel{amo::Selector::Kind::MostLocalized, 0.0, true, 20};
  for (auto _ : state) {
    benchmark::DoNotOptimize(amo::eigensolve(p, box, 2, sel));
  }
}
BENCHMARK(BM_Eigensolve)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
