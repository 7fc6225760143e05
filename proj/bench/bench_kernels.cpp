// Parallel kernels against their serial references.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "pafit/empirics.hpp"
#include "pafit/kernel_contract.hpp"
#include "pafit/replicas.hpp"
#include "pafit/weight_index.hpp"

using namespace pafit;

namespace {

FitnessDistribution two_point() { return FitnessDistribution::discrete({{0.5, 0.5}, {1.0, 0.5}}); }

ReplicaPlan plan(std::uint64_t n) {
  ReplicaPlan p;
  p.dist = two_point();
  p.lambda = 2.0;
  p.n_target = n;
  p.run.schedule = {n};
  p.replicas = 8;
  p.base_seed = 1;
  return p;
}

const GraphState& big_state() {
  static const GraphState g = [] {
    GraphState s(two_point(), 2.0, AttachmentModel::m1(), 3);
    while (s.n() < 400000) s.step();
    return s;
  }();
  return g;
}

void BM_ReplicasSerial(benchmark::State& st) {
  const auto p = plan(static_cast<std::uint64_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::run_replicas_serial(p));
}

void BM_ReplicasParallel(benchmark::State& st) {
  const auto p = plan(static_cast<std::uint64_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(run_replicas(p));
}

void BM_SnapshotSerial(benchmark::State& st) {
  const SnapshotOptions opts{20, 10, 0.1};
  for (auto _ : st) benchmark::DoNotOptimize(reference::snapshot_serial(big_state(), opts));
}

void BM_SnapshotParallel(benchmark::State& st) {
  const SnapshotOptions opts{20, 10, 0.1};
  for (auto _ : st) benchmark::DoNotOptimize(snapshot(big_state(), opts));
}

void BM_ResampleSerial(benchmark::State& st) {
  const auto vertices = choose_vertices(big_state(), 8, 1);
  for (auto _ : st)
    benchmark::DoNotOptimize(reference::resample_serial(AttachmentModel::m1(), big_state(), vertices, 20000, 5));
}

void BM_ResampleParallel(benchmark::State& st) {
  const auto vertices = choose_vertices(big_state(), 8, 1);
  for (auto _ : st) benchmark::DoNotOptimize(resample(AttachmentModel::m1(), big_state(), vertices, 20000, 5));
}

std::vector<std::uint64_t> random_weights(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<std::uint64_t> w(n);
  for (auto& x : w) x = 1 + rng() % (std::uint64_t{1} << 32);
  return w;
}

void BM_FindFenwick(benchmark::State& st) {
  const auto w = random_weights(static_cast<std::size_t>(st.range(0)));
  WeightIndex index;
  for (auto x : w) index.push_back(x);
  std::mt19937_64 rng(8);
  for (auto _ : st) benchmark::DoNotOptimize(index.find(target_from_bits(rng() >> 11, index.total())));
}

void BM_FindLinearScan(benchmark::State& st) {
  const auto w = random_weights(static_cast<std::size_t>(st.range(0)));
  std::uint64_t total = 0;
  for (auto x : w) total += x;
  std::mt19937_64 rng(8);
  for (auto _ : st) benchmark::DoNotOptimize(reference::linear_scan_find(w, target_from_bits(rng() >> 11, total)));
}

}  // namespace

BENCHMARK(BM_ReplicasSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicasParallel)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SnapshotSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnapshotParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ResampleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResampleParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FindFenwick)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_FindLinearScan)->Range(1 << 10, 1 << 20);

int main(int argc, char** argv) {
  big_state();  // build the shared state outside the timed region
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
