// Serial reference kernels against their OpenMP versions on a
// 1000-task x 10000-realization synthetic instance.

#include <benchmark/benchmark.h>

#include <numeric>

#include "sbp/kernels.hpp"
#include "sbp/synth.hpp"

namespace {

const sbp::Instance& instance() {
  static const sbp::Instance inst = sbp::generate_instance(1000, sbp::default_mixture(), 10000, 7);
  return inst;
}

sbp::kernels::Groups machines_of(std::size_t size) {
  sbp::kernels::Groups groups;
  for (std::size_t i = 0; i < instance().size(); i += size) {
    groups.emplace_back();
    for (std::size_t j = i; j < std::min(i + size, instance().size()); ++j) groups.back().push_back(j);
  }
  return groups;
}

void BM_RowMomentsSerial(benchmark::State& state) {
  const auto& m = instance().inst;
  for (auto _ : state) benchmark::DoNotOptimize(sbp::kernels::serial::row_moments(m, {0, m.cols()}));
}

void BM_RowMomentsParallel(benchmark::State& state) {
  const auto& m = instance().inst;
  for (auto _ : state) benchmark::DoNotOptimize(sbp::kernels::row_moments(m, {0, m.cols()}));
}

void BM_ViolationsSerial(benchmark::State& state) {
  const auto& m = instance().inst;
  const auto groups = machines_of(40);
  for (auto _ : state)
    benchmark::DoNotOptimize(sbp::kernels::serial::violations_per_group(m, groups, {0, m.cols()}, 1.0));
}

void BM_ViolationsParallel(benchmark::State& state) {
  const auto& m = instance().inst;
  const auto groups = machines_of(40);
  for (auto _ : state)
    benchmark::DoNotOptimize(sbp::kernels::violations_per_group(m, groups, {0, m.cols()}, 1.0));
}

void BM_SumRowsSerial(benchmark::State& state) {
  const auto& m = instance().inst;
  std::vector<std::size_t> rows(100);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(sbp::kernels::serial::sum_rows(m, rows));
}

void BM_SumRowsParallel(benchmark::State& state) {
  const auto& m = instance().inst;
  std::vector<std::size_t> rows(100);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (auto _ : state) benchmark::DoNotOptimize(sbp::kernels::sum_rows(m, rows));
}

}  // namespace

BENCHMARK(BM_RowMomentsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RowMomentsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ViolationsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ViolationsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SumRowsSerial)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_SumRowsParallel)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
