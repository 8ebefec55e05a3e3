// Serial reference vs OpenMP kernels. Arg(0) is the problem size; the
// parallel variants also take the thread count as Arg(1).
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rigidflow/kernels.hpp"

using namespace rigidflow;

namespace {

std::vector<Residue> helix(std::size_t n) {
  std::vector<Residue> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 1.745 * static_cast<double>(i);
    const double z = 1.5 * static_cast<double>(i);
    out[i].ca = Vec3(2.3 * std::cos(a), 2.3 * std::sin(a), z);
    out[i].n = out[i].ca + Vec3(-0.5, 1.3, 0.2);
    out[i].c = out[i].ca + Vec3(1.5, 0.1, -0.3);
  }
  return out;
}

PairArrays pair_of(std::size_t n) {
  const auto f0 = serial::build_frames(helix(n));
  auto f1 = f0;
  serial::perturb_frames(f1, 0.5, igso3::cached_table(0.5), 1);
  PairArrays p;
  for (std::size_t i = 0; i < n; ++i) {
    p.t0.push_back(f0[i].t);
    p.t1.push_back(f1[i].t);
  }
  p.q0 = serial::to_quaternions(f0);
  p.q1 = serial::to_quaternions(f1);
  return p;
}

template <bool Parallel>
void BM_BuildFrames(benchmark::State& state) {
  const auto residues = helix(static_cast<std::size_t>(state.range(0)));
  if constexpr (Parallel) set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto frames = Parallel ? parallel::build_frames(residues) : serial::build_frames(residues);
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_PerturbFrames(benchmark::State& state) {
  const auto base = serial::build_frames(helix(static_cast<std::size_t>(state.range(0))));
  const auto& table = igso3::cached_table(0.5);
  if constexpr (Parallel) set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto frames = base;
    if constexpr (Parallel) parallel::perturb_frames(frames, 0.03, table, 7);
    else serial::perturb_frames(frames, 0.03, table, 7);
    benchmark::DoNotOptimize(frames.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Velocities(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PairArrays pair = pair_of(n);
  std::vector<Vec3> ut(n);
  std::vector<Vec4> ur(n);
  if constexpr (Parallel) set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    if constexpr (Parallel) parallel::velocities(pair, 0.37, ut, ur);
    else serial::velocities(pair, 0.37, ut, ur);
    benchmark::DoNotOptimize(ur.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_SampleIgso3(benchmark::State& state) {
  const auto& table = igso3::cached_table(0.5);
  const auto n = static_cast<std::size_t>(state.range(0));
  if constexpr (Parallel) set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto samples = Parallel ? parallel::sample_igso3(table, n, 3) : serial::sample_igso3(table, n, 3);
    benchmark::DoNotOptimize(samples.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (const int n : {1000, 100000}) b->Arg(n);
}

void sizes_threads(benchmark::internal::Benchmark* b) {
  for (const int n : {1000, 100000}) {
    for (const int t : {1, 2, 4, 8}) b->Args({n, t});
  }
}

}  // namespace

BENCHMARK(BM_BuildFrames<false>)->Apply(sizes);
BENCHMARK(BM_BuildFrames<true>)->Apply(sizes_threads)->UseRealTime();
BENCHMARK(BM_PerturbFrames<false>)->Apply(sizes);
BENCHMARK(BM_PerturbFrames<true>)->Apply(sizes_threads)->UseRealTime();
BENCHMARK(BM_Velocities<false>)->Apply(sizes);
BENCHMARK(BM_Velocities<true>)->Apply(sizes_threads)->UseRealTime();
BENCHMARK(BM_SampleIgso3<false>)->Apply(sizes);
BENCHMARK(BM_SampleIgso3<true>)->Apply(sizes_threads)->UseRealTime();

BENCHMARK_MAIN();
