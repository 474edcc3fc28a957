#include "dispatchlab/baselines.hpp"

#include <limits>

#include <doctest.h>

#include "dispatchlab/errors.hpp"
#include "dispatchlab/rng.hpp"
#include "support.hpp"

using namespace dispatchlab;
using testsupport::RandomProblemOptions;
using testsupport::north_of;
using testsupport::random_problem;

namespace {

BatchProblem line_problem(const std::vector<std::pair<double, double>>& drivers_km_rate,
                          std::size_t n_requests, double trip_km = 3.0) {
  // Drivers sit north of the pickup at exact km offsets, so deadheads are
  // exact; all requests share the same pickup.
  const GridSpec grid(GeoPoint(30.0, -98.0), 1.0);
  const ValueTable table(0.9, 0.025);
  const GeoPoint pickup = north_of(grid.origin, 1.0);
  const GeoPoint dropoff = north_of(grid.origin, 1.0 + trip_km);

  std::vector<BatchDriver> drivers;
  for (std::size_t i = 0; i < drivers_km_rate.size(); ++i) {
    drivers.push_back(BatchDriver{"d" + std::to_string(i),
                                  north_of(pickup, drivers_km_rate[i].first),
                                  drivers_km_rate[i].second, 0.0, 0.0});
  }
  std::vector<RideRequest> requests;
  for (std::size_t i = 0; i < n_requests; ++i) {
    RideRequest r;
    r.id = "r" + std::to_string(i);
    r.pickup = pickup;
    r.dropoff = dropoff;
    r.trip_km = trip_km;
    r.request_time_s = 10.0 * static_cast<double>(i);
    requests.push_back(std::move(r));
  }
  return build_batch_problem(std::move(drivers), std::move(requests), grid,
                             table, BatchBuildOptions{});
}

}  // namespace

TEST_CASE("policy names round-trip and reject unknowns") {
  CHECK(policy_from_name("lead") == PolicyKind::LEAD);
  CHECK(policy_from_name("CD") == PolicyKind::CD);
  CHECK(policy_from_name("Tora") == PolicyKind::TORA);
  CHECK(policy_from_name("laf") == PolicyKind::LAF);
  CHECK(to_string(PolicyKind::TORA) == "tora");
  CHECK_THROWS_AS(policy_from_name("greedy"), ConfigError);
}

TEST_CASE("assign_cd: nearest driver wins") {
  const BatchProblem p = line_problem({{3.0, 200.0}, {1.0, 200.0}}, 1);
  const Matching m = assign_cd(p);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == "d1");
}

TEST_CASE("assign_cd: sequential greedy hands the best driver to the earlier request") {
  // one driver at 1 km, one at 2 km; r0 arrives before r1
  const BatchProblem p = line_problem({{1.0, 200.0}, {2.0, 200.0}}, 2);
  const Matching m = assign_cd(p);
  REQUIRE(m.pairs.size() == 2);
  for (const auto& [driver, request] : m.pairs) {
    if (request == "r0") CHECK(driver == "d0");
    if (request == "r1") CHECK(driver == "d1");
  }
}

TEST_CASE("assign_cd: empty batch yields an empty matching") {
  BatchProblem p;
  p.grid = GridSpec(GeoPoint(30.0, -98.0), 1.0);
  CHECK(assign_cd(p).pairs.empty());
}

TEST_CASE("assign_cd: per-step greedy local optimality on random batches") {
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    const BatchProblem p = random_problem(rng, RandomProblemOptions{});
    const Matching m = assign_cd(p);

    // replay the greedy trace independently
    std::vector<char> taken(p.drivers.size(), 0);
    for (std::size_t r = 0; r < p.requests.size(); ++r) {
      int best = -1;
      for (std::size_t d = 0; d < p.drivers.size(); ++d) {
        if (taken[d] || !p.edge(d, r).allowed) continue;
        if (best < 0 || p.edge(d, r).deadhead_km <
                            p.edge(static_cast<std::size_t>(best), r).deadhead_km) {
          best = static_cast<int>(d);
        }
      }
      const auto it = std::find_if(m.pairs.begin(), m.pairs.end(),
                                   [&](const auto& pr) {
                                     return pr.second == p.requests[r].id;
                                   });
      if (best < 0) {
        CHECK(it == m.pairs.end());
      } else {
        REQUIRE(it != m.pairs.end());
        CHECK(it->first == p.drivers[static_cast<std::size_t>(best)].id);
        for (std::size_t d = 0; d < p.drivers.size(); ++d) {
          if (p.drivers[d].id == it->first) taken[d] = 1;
        }
      }
    }
  }
}

TEST_CASE("assign_tora: identical rates collapse to closest-driver") {
  const BatchProblem p = line_problem({{2.5, 200.0}, {1.0, 200.0}, {4.0, 200.0}}, 2);
  const Matching cd = assign_cd(p);
  const Matching tora = assign_tora(p, 100.0);
  CHECK(cd.pairs == tora.pairs);
}

TEST_CASE("assign_tora: hand-evaluated ratio test switches to the clean driver") {
  // closest: 1 km at 300 g/km -> 300 g; alternative: 2 km at 63.35 -> 126.7 g
  // E2D = (126.7 - 300) / (2 - 1) = -173.3, accepted at threshold 100
  const BatchProblem p = line_problem({{1.0, 300.0}, {2.0, 63.35}}, 1);
  const Matching m = assign_tora(p, 100.0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == "d1");

  // a 200 threshold rejects the same switch
  const Matching strict = assign_tora(p, 200.0);
  CHECK(strict.pairs[0].first == "d0");
}

TEST_CASE("assign_tora: infinite threshold equals closest-driver pair-for-pair") {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    const BatchProblem p = random_problem(rng, RandomProblemOptions{});
    const Matching cd = assign_cd(p);
    const Matching tora =
        assign_tora(p, std::numeric_limits<double>::infinity());
    CHECK(cd.pairs == tora.pairs);
  }
}

TEST_CASE("assign_tora: rejects negative thresholds") {
  const BatchProblem p = line_problem({{1.0, 200.0}}, 1);
  CHECK_THROWS_AS(assign_tora(p, -1.0), ConfigError);
}

TEST_CASE("assign_laf: equal edge utilities favor the poorer driver") {
  // Equal projected finals need deadheads offsetting the wealth difference:
  // d0 (U=0) at 1 km and d1 (U=10) at 11 km both project to 11 km with a
  // 12 km trip, so the spread decides and the poor driver serves.
  const GridSpec grid(GeoPoint(30.0, -98.0), 1.0);
  const GeoPoint pickup = north_of(grid.origin, 0.5);
  const GeoPoint dropoff = north_of(grid.origin, 12.5);

  std::vector<BatchDriver> drivers = {
      BatchDriver{"d0", north_of(pickup, 1.0), 200.0, 0.0, 0.0},
      BatchDriver{"d1", north_of(pickup, 11.0), 200.0, 10.0, 0.0}};
  RideRequest r;
  r.id = "r0";
  r.pickup = pickup;
  r.dropoff = dropoff;
  r.trip_km = 12.0;
  BatchBuildOptions opt;
  opt.candidate_radius_km = 1e9;
  const BatchProblem p = build_batch_problem(std::move(drivers), {r}, grid,
                                             ValueTable(0.9, 0.025), opt);

  const LafValueTable values(0.9, 0.025);
  const Matching m = assign_laf(p, values, 1.0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == "d0");
}

TEST_CASE("assign_laf: a lone driver serves regardless of its rate") {
  const BatchProblem p = line_problem({{2.0, 9999.0}}, 1);
  const Matching m = assign_laf(p, LafValueTable(0.9, 0.025), 1.0);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == "d0");
}

TEST_CASE("assign_laf: identical drivers resolve deterministically") {
  const BatchProblem p = line_problem({{2.0, 200.0}, {2.0, 200.0}}, 1);
  const LafValueTable values(0.9, 0.025);
  const Matching a = assign_laf(p, values, 1.0);
  const Matching b = assign_laf(p, values, 1.0);
  CHECK(a.pairs == b.pairs);
  REQUIRE(a.pairs.size() == 1);
}

TEST_CASE("assign_laf: matching never depends on emission rates") {
  Rng rng(43);
  const LafValueTable values(0.9, 0.025);
  for (int i = 0; i < 40; ++i) {
    BatchProblem p = random_problem(rng, RandomProblemOptions{});
    const Matching before = assign_laf(p, values, 1.0);
    const double scale = rng.uniform(0.2, 5.0);
    for (auto& d : p.drivers) d.emission_g_per_km *= scale;
    for (auto& e : p.edges) e.expected_emission_g *= scale;
    const Matching after = assign_laf(p, values, 1.0);
    CHECK(before.pairs == after.pairs);
  }
}

TEST_CASE("baselines emit feasible matchings") {
  Rng rng(44);
  for (int i = 0; i < 30; ++i) {
    RandomProblemOptions opt;
    opt.eta_g_per_km = 5.0;
    const BatchProblem p = random_problem(rng, opt);
    for (const Matching& m : {assign_cd(p), assign_tora(p, 100.0),
                              assign_laf(p, LafValueTable(0.9, 0.025), 1.0)}) {
      CHECK_NOTHROW(batch_objective(m, p));
    }
  }
}

TEST_CASE("laf value table updates follow the single-function rule") {
  LafValueTable t(0.9, 0.025);
  CHECK(t.value(TileId{0, 0}) == 0.0);
  const double delta = t.update(TileId{0, 0}, TileId{1, 1}, 4.0);
  CHECK(delta == doctest::Approx(0.1).epsilon(1e-12));  // 0.025 * 4
  CHECK(t.value(TileId{0, 0}) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(t.value(TileId{1, 1}) == 0.0);
}
