#include <benchmark/benchmark.h>

#include "nystromite/data.hpp"
#include "nystromite/nystrom.hpp"
#include "nystromite/sampling.hpp"

using namespace nystromite;

namespace {

// Leading-index partition of a synthetic matrix, shared across iterations
// so the timed region covers only the decomposition itself.
BlockPartition leading_partition(Index n, Index s) {
  SyntheticSpec spec;
  spec.n = n;
  spec.rate = 0.5;
  spec.seed = 7;
  const Matrix m = synthetic_matrix(spec);
  std::vector<Index> lead(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i) lead[static_cast<std::size_t>(i)] = i;
  return partition(m, IndexSet(lead, n), IndexSet(lead, n));
}

void BM_factorize(benchmark::State& state) {
  const BlockPartition p = leading_partition(state.range(0), 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(factorize(p));
}

void BM_svd_general(benchmark::State& state) {
  const BlockPartition p = leading_partition(state.range(0), 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(svd_general(p));
}

void BM_svd_single_step(benchmark::State& state) {
  const BlockPartition p = leading_partition(state.range(0), 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(svd_single_step(p));
}

void BM_rrqr_select(benchmark::State& state) {
  const Index s = 20;
  SyntheticSpec spec;
  spec.n = state.range(0);
  spec.rate = 0.5;
  spec.seed = 11;
  const Matrix m = synthetic_matrix(spec);
  const ThinDecomposition thin = thin_svd(m, s);
  const Matrix wide = thin.g.transpose();
  for (auto _ : state)
    benchmark::DoNotOptimize(rrqr_select(wide, s));
}

void BM_select_sample(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n = state.range(0);
  spec.rate = 0.5;
  spec.seed = 13;
  const Matrix m = synthetic_matrix(spec);
  SamplerConfig cfg;
  cfg.front_end = ThinFrontEnd::LinearTimeSvd;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(select_sample(m, 20, cfg));
  }
}

}  // namespace

BENCHMARK(BM_factorize)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_svd_general)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_svd_single_step)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rrqr_select)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_select_sample)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
