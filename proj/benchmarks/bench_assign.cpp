#include <benchmark/benchmark.h>

#include "dispatchlab/assign.hpp"
#include "dispatchlab/hungarian.hpp"
#include "dispatchlab/rng.hpp"

using namespace dispatchlab;

namespace {

BatchProblem sized_problem(std::size_t n_drivers, std::size_t n_requests,
                           double eta, std::uint64_t seed) {
  Rng rng(seed);
  const GridSpec grid(GeoPoint(30.0, -98.0), 1.0);
  const auto rand_point = [&] {
    return offset_point(grid.origin, rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0));
  };
  std::vector<BatchDriver> drivers;
  for (std::size_t i = 0; i < n_drivers; ++i) {
    drivers.push_back(BatchDriver{"d" + std::to_string(100 + i), rand_point(),
                                  rng.uniform(63.0, 340.0),
                                  rng.uniform(0.0, 120.0), 0.0});
  }
  std::vector<RideRequest> requests;
  for (std::size_t i = 0; i < n_requests; ++i) {
    RideRequest r;
    r.id = "r" + std::to_string(100 + i);
    r.pickup = rand_point();
    r.dropoff = rand_point();
    r.trip_km = haversine_km(r.pickup, r.dropoff);
    r.request_time_s = static_cast<double>(i);
    requests.push_back(std::move(r));
  }
  ValueTable table(0.9, 0.025);
  for (int c = 0; c < 9; ++c) {
    for (int w = 0; w < 9; ++w) {
      table.set(TileId{c, w}, rng.uniform(0.0, 20.0), rng.uniform(0.0, 30.0));
    }
  }
  BatchBuildOptions opt;
  opt.eta_g_per_km = eta;
  return build_batch_problem(std::move(drivers), std::move(requests), grid,
                             table, opt);
}

}  // namespace

static void BM_MinCostAssignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> cost(n * n);
  for (auto& c : cost) c = rng.uniform(0.0, 1000.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_cost_assignment(n, n, cost));
  }
}
BENCHMARK(BM_MinCostAssignment)->Arg(8)->Arg(20)->Arg(50)->Arg(150);

static void BM_SolveBatch(benchmark::State& state) {
  const auto drivers = static_cast<std::size_t>(state.range(0));
  const auto requests = static_cast<std::size_t>(state.range(1));
  const BatchProblem p = sized_problem(drivers, requests, 5.0, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_batch(p));
  }
}
BENCHMARK(BM_SolveBatch)->Args({10, 5})->Args({20, 7})->Args({50, 25})->Args({150, 50});

static void BM_SolveBatchExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const BatchProblem p = sized_problem(n, n, 5.0, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_batch_exact(p));
  }
}
BENCHMARK(BM_SolveBatchExact)->Arg(4)->Arg(5)->Arg(6);

static void BM_BuildBatchProblem(benchmark::State& state) {
  const auto drivers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sized_problem(drivers, drivers / 2, 5.0, 6));
  }
}
BENCHMARK(BM_BuildBatchProblem)->Arg(20)->Arg(150);
