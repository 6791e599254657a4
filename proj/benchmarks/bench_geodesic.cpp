#include <benchmark/benchmark.h>

#include <numeric>

#include "pcfgeo/metrics.hpp"
#include "pcfgeo/spec_io.hpp"

using namespace pcfgeo;

namespace {

const MetricContext& gasket_context() {
  static const MetricContext ctx = [] {
    HarmonicStructure hs = make_structure(resolve_spec("gasket:2"));
    HarmonicTuple h = default_tuple(hs);
    return MetricContext(std::move(hs), std::move(h), 12);
  }();
  return ctx;
}

void BM_ContextBuild(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    HarmonicStructure hs = make_structure(resolve_spec("gasket:2"));
    HarmonicTuple h = default_tuple(hs);
    MetricContext ctx(std::move(hs), std::move(h), level);
    benchmark::DoNotOptimize(ctx.dimension());
  }
}
BENCHMARK(BM_ContextBuild)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_Profile(benchmark::State& state) {
  const MetricContext& ctx = gasket_context();
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_profile(ctx, {{}, 0}, level));
  state.counters["vertices"] = static_cast<double>(ctx.graph().vertex_count(level));
}
BENCHMARK(BM_Profile)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_DistanceMatrix(benchmark::State& state) {
  const MetricContext& ctx = gasket_context();
  std::vector<VertexId> sources(ctx.graph().vertex_count(3));
  std::iota(sources.begin(), sources.end(), 0);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(ctx, 10, sources, threads));
}
BENCHMARK(BM_DistanceMatrix)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Certificate(benchmark::State& state) {
  const MetricContext& ctx = gasket_context();
  const int level = static_cast<int>(state.range(0));
  const double cap = default_cap(ctx);
  for (auto _ : state) benchmark::DoNotOptimize(intrinsic_certificate(ctx, {{}, 0}, {{}, 1}, level, cap));
}
BENCHMARK(BM_Certificate)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
