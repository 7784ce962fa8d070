// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "generators.hpp"
#include "semdiff/fuzz.hpp"
#include "semdiff/regions.hpp"
#include "semdiff/surface_sim.hpp"

using namespace semdiff;

namespace {

std::vector<RegionPoint> points(std::size_t n) {
  fuzz::Rng rng(1);
  std::vector<RegionPoint> pts(n);
  for (auto& p : pts) {
    p.x = rng.unit();
    p.y = rng.unit();
    for (int k = 0; k < 4; ++k) p.metrics.push_back(rng.unit());
  }
  return pts;
}

std::vector<std::string> programs(std::size_t n) {
  fuzz::Rng rng(2);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen::random_program(rng));
  return out;
}

std::vector<CodePair> pairs_of(const std::vector<std::string>& codes) {
  std::vector<CodePair> pairs;
  for (std::size_t i = 0; i + 1 < codes.size(); ++i) pairs.emplace_back(codes[i], codes[i + 1]);
  return pairs;
}

void BM_thresholds_serial(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_thresholds_serial(pts, 0.05, ErrorFlavor::absolute));
}

void BM_thresholds_parallel(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_thresholds(pts, 0.05, ErrorFlavor::absolute));
}

void BM_surface_serial(benchmark::State& state) {
  const auto codes = programs(static_cast<std::size_t>(state.range(0)) + 1);
  const auto pairs = pairs_of(codes);
  for (auto _ : state) benchmark::DoNotOptimize(surface_batch_serial(pairs));
}

void BM_surface_parallel(benchmark::State& state) {
  const auto codes = programs(static_cast<std::size_t>(state.range(0)) + 1);
  const auto pairs = pairs_of(codes);
  for (auto _ : state) benchmark::DoNotOptimize(surface_batch(pairs));
}

}  // namespace

BENCHMARK(BM_thresholds_serial)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_thresholds_parallel)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_surface_serial)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_surface_parallel)->Arg(200)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
