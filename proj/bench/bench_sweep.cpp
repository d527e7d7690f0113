// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Frequency sweep throughput: OpenMP kernel against the serial reference.

#include <map>
#include <benchmark/benchmark.h>

#include "phmor/analysis.hpp"
#include "phmor/benchmarks.hpp"

namespace
{

const phmor::FrequencyResponse &StokesResponse(int M)
{
  static std::map<int, phmor::FrequencyResponse> cache;
  auto it = cache.find(M);
  if (it == cache.end())
  {
    phmor::FlowConfig cfg;
    cfg.M = M;
    it = cache.emplace(M, phmor::FrequencyResponse(phmor::FlowDecouple(phmor::BuildStokes(cfg)).ode))
             .first;
  }
  return it->second;
}

void BM_SweepParallel(benchmark::State &state)
{
  const auto &fr = StokesResponse(int(state.range(0)));
  const phmor::FrequencyGrid grid = phmor::FrequencyGrid::Default();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(fr.Sweep(grid.omega));
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}

void BM_SweepSerial(benchmark::State &state)
{
  const auto &fr = StokesResponse(int(state.range(0)));
  const phmor::FrequencyGrid grid = phmor::FrequencyGrid::Default();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(fr.SweepSerial(grid.omega));
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}

}  // namespace

BENCHMARK(BM_SweepParallel)->Arg(11)->Arg(17)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Arg(11)->Arg(17)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
