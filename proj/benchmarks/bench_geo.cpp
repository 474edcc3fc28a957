#include <benchmark/benchmark.h>

#include "dispatchlab/geo.hpp"
#include "dispatchlab/rng.hpp"

using namespace dispatchlab;

static void BM_HaversineKm(benchmark::State& state) {
  Rng rng(1);
  std::vector<GeoPoint> points;
  for (int i = 0; i < 1024; ++i) {
    points.emplace_back(rng.uniform(29.0, 31.0), rng.uniform(-99.0, -97.0));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = points[i & 1023];
    const auto& b = points[(i + 7) & 1023];
    benchmark::DoNotOptimize(haversine_km(a, b));
    ++i;
  }
}
BENCHMARK(BM_HaversineKm);

static void BM_TileOf(benchmark::State& state) {
  const GridSpec grid(GeoPoint(29.5, -99.0), 1.0);
  Rng rng(2);
  std::vector<GeoPoint> points;
  for (int i = 0; i < 1024; ++i) {
    points.push_back(offset_point(grid.origin, rng.uniform(0.0, 40.0),
                                  rng.uniform(0.0, 40.0)));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tile_of(points[i & 1023], grid));
    ++i;
  }
}
BENCHMARK(BM_TileOf);

BENCHMARK_MAIN();
