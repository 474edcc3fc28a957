#include <benchmark/benchmark.h>

#include "dispatchlab/baselines.hpp"
#include "dispatchlab/ingest.hpp"
#include "dispatchlab/sim.hpp"

using namespace dispatchlab;

namespace {

Scenario day_scenario(int requests, int drivers) {
  SynthParams params;
  params.n_requests = requests;
  params.n_drivers = drivers;
  params.duration_s = 86400.0;
  params.seed = 6;
  return synth_scenario(params);
}

void run_policy(benchmark::State& state, PolicyKind policy) {
  const Scenario scenario = day_scenario(static_cast<int>(state.range(0)),
                                         static_cast<int>(state.range(1)));
  SimConfig cfg;
  cfg.eta_g_per_km = 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(scenario, policy, cfg));
  }
  state.counters["requests"] = static_cast<double>(scenario.requests.size());
}

}  // namespace

static void BM_RunLead(benchmark::State& state) { run_policy(state, PolicyKind::LEAD); }
static void BM_RunCd(benchmark::State& state) { run_policy(state, PolicyKind::CD); }
static void BM_RunTora(benchmark::State& state) { run_policy(state, PolicyKind::TORA); }
static void BM_RunLaf(benchmark::State& state) { run_policy(state, PolicyKind::LAF); }

BENCHMARK(BM_RunLead)->Args({500, 10})->Args({2000, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunCd)->Args({2000, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunTora)->Args({2000, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunLaf)->Args({2000, 20})->Unit(benchmark::kMillisecond);
