// Serial reference vs OpenMP kernels on the full synthetic grid.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/localization_cues.hpp"
#include "hrtfkit/synth_oracle.hpp"

using namespace hrtfkit;

namespace {

const RawMeasurementSet& raw() {
  static const auto s = synth::synth_set(synth::SynthOptions{}, synth::SpeakerColoration::sealed_module());
  return s;
}

const HrirDatabase& db() {
  static const auto d = build_database_serial(raw());
  return d;
}

void BM_BuildSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_database_serial(raw()));
}

void BM_BuildParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_database(raw()));
}

void BM_ItdSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cues::itd_map_serial(db()));
}

void BM_ItdParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cues::itd_map(db()));
}

void BM_Synth(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::synth_set(synth::SynthOptions{}, synth::SpeakerColoration::flat()));
  }
}

void thread_counts(benchmark::internal::Benchmark* b) {
  const int max = omp_get_num_procs();
  for (int t = 1; t <= max; t *= 2) b->Arg(t);
  if ((max & (max - 1)) != 0) b->Arg(max);
}

}  // namespace

BENCHMARK(BM_BuildSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildParallel)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ItdSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ItdParallel)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Synth)->Apply(thread_counts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
