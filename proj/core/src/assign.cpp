#include "dispatchlab/assign.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dispatchlab/errors.hpp"
#include "dispatchlab/hungarian.hpp"

namespace dispatchlab {

namespace {

// Cost standing in for pruned edges in the Hungarian seed; large enough to
// dominate any real weight so forbidden pairs are used only when unavoidable,
// then stripped.
constexpr double kForbiddenCost = 1e12;

double projected_utility_base(const BatchProblem& p, std::size_t driver) {
  return p.fairness_scope == FairnessScope::all_available
             ? p.drivers[driver].cumulative_utility_km
             : 0.0;
}

// Objective of an index-level assignment (request -> driver, -1 unmatched):
// matched expected emissions plus eta times the projected-utility spread.
double objective_of(const BatchProblem& p, const std::vector<int>& req_to_driver) {
  double emission = 0.0;
  const std::size_t n_drivers = p.drivers.size();
  if (n_drivers == 0) {
    return 0.0;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<double> projected(n_drivers);
  for (std::size_t d = 0; d < n_drivers; ++d) {
    projected[d] = projected_utility_base(p, d);
  }
  for (std::size_t r = 0; r < req_to_driver.size(); ++r) {
    if (req_to_driver[r] < 0) continue;
    const auto d = static_cast<std::size_t>(req_to_driver[r]);
    const CandidateEdge& e = p.edge(d, r);
    emission += e.expected_emission_g;
    projected[d] = e.expected_utility_km;
  }
  for (const double u : projected) {
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  return emission + p.eta_g_per_km * (hi - lo);
}

std::vector<std::pair<std::string, std::string>> pairs_of(
    const BatchProblem& p, const std::vector<int>& req_to_driver) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t r = 0; r < req_to_driver.size(); ++r) {
    if (req_to_driver[r] < 0) continue;
    pairs.emplace_back(p.drivers[static_cast<std::size_t>(req_to_driver[r])].id,
                       p.requests[r].id);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return pairs;
}

Matching make_matching(const BatchProblem& p, const std::vector<int>& req_to_driver) {
  Matching m;
  m.pairs = pairs_of(p, req_to_driver);
  m.objective_value = objective_of(p, req_to_driver);
  return m;
}

// Tie-break comparison: the (request_id, driver_id) pair list, lexicographic.
bool lex_less(const BatchProblem& p, const std::vector<int>& a,
              const std::vector<int>& b) {
  std::vector<std::pair<std::string, std::string>> pa, pb;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r] >= 0) pa.emplace_back(p.requests[r].id, p.drivers[a[r]].id);
    if (b[r] >= 0) pb.emplace_back(p.requests[r].id, p.drivers[b[r]].id);
  }
  std::sort(pa.begin(), pa.end());
  std::sort(pb.begin(), pb.end());
  return pa < pb;
}

// Maximum matchable size over allowed edges (Kuhn's augmenting paths).
std::size_t max_matchable(const BatchProblem& p) {
  const std::size_t n_d = p.drivers.size();
  const std::size_t n_r = p.requests.size();
  std::vector<int> request_owner(n_r, -1);
  std::size_t matched = 0;
  std::vector<char> visited(n_r, 0);

  struct Dfs {
    const BatchProblem& p;
    std::vector<int>& owner;
    std::vector<char>& visited;
    bool operator()(std::size_t d) {
      for (std::size_t r = 0; r < p.requests.size(); ++r) {
        if (!p.edge(d, r).allowed || visited[r]) continue;
        visited[r] = 1;
        if (owner[r] < 0 || (*this)(static_cast<std::size_t>(owner[r]))) {
          owner[r] = static_cast<int>(d);
          return true;
        }
      }
      return false;
    }
  } dfs{p, request_owner, visited};

  for (std::size_t d = 0; d < n_d; ++d) {
    std::fill(visited.begin(), visited.end(), 0);
    if (dfs(d)) ++matched;
  }
  return matched;
}

struct ExactSearch {
  const BatchProblem& p;
  std::size_t target_size;
  std::vector<double> suffix_bound;  // sum over r' >= r of min(0, min emission)
  std::vector<int> current;
  std::vector<char> driver_used;
  std::vector<int> best;
  double best_objective = std::numeric_limits<double>::infinity();
  bool have_best = false;

  void run() {
    const std::size_t n_r = p.requests.size();
    suffix_bound.assign(n_r + 1, 0.0);
    for (std::size_t r = n_r; r-- > 0;) {
      double lo = 0.0;  // a skipped request contributes zero
      for (std::size_t d = 0; d < p.drivers.size(); ++d) {
        if (p.edge(d, r).allowed) {
          lo = std::min(lo, p.edge(d, r).expected_emission_g);
        }
      }
      suffix_bound[r] = suffix_bound[r + 1] + lo;
    }
    current.assign(n_r, -1);
    driver_used.assign(p.drivers.size(), 0);
    recurse(0, 0, 0.0);
  }

  void recurse(std::size_t r, std::size_t assigned, double emission_sum) {
    const std::size_t n_r = p.requests.size();
    if (assigned + (n_r - r) < target_size) return;  // cannot reach target
    // Spread is non-negative, so the emission sum bounds the objective below.
    if (have_best && emission_sum + suffix_bound[r] > best_objective) return;
    if (r == n_r) {
      if (assigned != target_size) return;
      const double obj = objective_of(p, current);
      if (!have_best || obj < best_objective ||
          (obj == best_objective && lex_less(p, current, best))) {
        best = current;
        best_objective = obj;
        have_best = true;
      }
      return;
    }
    for (std::size_t d = 0; d < p.drivers.size(); ++d) {
      if (driver_used[d] || !p.edge(d, r).allowed) continue;
      driver_used[d] = 1;
      current[r] = static_cast<int>(d);
      recurse(r + 1, assigned + 1, emission_sum + p.edge(d, r).expected_emission_g);
      current[r] = -1;
      driver_used[d] = 0;
    }
    if (assigned + (n_r - r - 1) >= target_size) {
      recurse(r + 1, assigned, emission_sum);  // leave r unassigned
    }
  }
};

void local_search(const BatchProblem& p, std::vector<int>& req_to_driver) {
  const std::size_t n_r = p.requests.size();
  const std::size_t n_d = p.drivers.size();
  const std::size_t move_cap = 10 * std::max<std::size_t>(p.edges.size(), 1);

  double current = objective_of(p, req_to_driver);
  for (std::size_t applied = 0; applied < move_cap; ++applied) {
    double best = current;
    int move_kind = 0;  // 1 = swap requests, 2 = reassign to unmatched driver
    std::size_t m_r1 = 0, m_r2 = 0, m_d = 0;

    std::vector<char> matched(n_d, 0);
    for (std::size_t r = 0; r < n_r; ++r) {
      if (req_to_driver[r] >= 0) matched[static_cast<std::size_t>(req_to_driver[r])] = 1;
    }

    // Swap the requests of two matched drivers.
    for (std::size_t r1 = 0; r1 < n_r; ++r1) {
      if (req_to_driver[r1] < 0) continue;
      for (std::size_t r2 = r1 + 1; r2 < n_r; ++r2) {
        if (req_to_driver[r2] < 0) continue;
        const auto d1 = static_cast<std::size_t>(req_to_driver[r1]);
        const auto d2 = static_cast<std::size_t>(req_to_driver[r2]);
        if (!p.edge(d2, r1).allowed || !p.edge(d1, r2).allowed) continue;
        std::swap(req_to_driver[r1], req_to_driver[r2]);
        const double obj = objective_of(p, req_to_driver);
        std::swap(req_to_driver[r1], req_to_driver[r2]);
        if (obj < best) {
          best = obj;
          move_kind = 1;
          m_r1 = r1;
          m_r2 = r2;
        }
      }
    }
    // Reassign a matched request to a currently unmatched driver.
    for (std::size_t r = 0; r < n_r; ++r) {
      if (req_to_driver[r] < 0) continue;
      for (std::size_t d = 0; d < n_d; ++d) {
        if (matched[d] || !p.edge(d, r).allowed) continue;
        const int old = req_to_driver[r];
        req_to_driver[r] = static_cast<int>(d);
        const double obj = objective_of(p, req_to_driver);
        req_to_driver[r] = old;
        if (obj < best) {
          best = obj;
          move_kind = 2;
          m_r1 = r;
          m_d = d;
        }
      }
    }

    if (move_kind == 0) break;
    if (move_kind == 1) {
      std::swap(req_to_driver[m_r1], req_to_driver[m_r2]);
    } else {
      req_to_driver[m_r1] = static_cast<int>(m_d);
    }
    current = best;
  }
}

}  // namespace

double expected_emission_g(double e_v_g_per_km, double trip_km,
                           double deadhead_km, TileId driver_tile,
                           TileId dropoff_tile, const ValueTable& table) {
  const double future =
      table.gamma() * (table.value_t(dropoff_tile) + table.value_d(dropoff_tile));
  const double here = table.value_t(driver_tile) + table.value_d(driver_tile);
  return ((trip_km + deadhead_km) + future - here) * e_v_g_per_km;
}

double expected_utility_km(double cumulative_utility_km, double trip_km,
                           double deadhead_km, TileId driver_tile,
                           TileId dropoff_tile, const ValueTable& table,
                           UtilityMode mode) {
  const double future =
      table.gamma() * (table.value_t(dropoff_tile) - table.value_d(dropoff_tile));
  const double here = mode == UtilityMode::paper
                          ? table.value_t(driver_tile) + table.value_d(driver_tile)
                          : table.value_t(driver_tile) - table.value_d(driver_tile);
  return cumulative_utility_km + (trip_km - deadhead_km) + future - here;
}

BatchProblem build_batch_problem(std::vector<BatchDriver> drivers,
                                 std::vector<RideRequest> requests,
                                 const GridSpec& grid, const ValueTable& table,
                                 const BatchBuildOptions& options) {
  BatchProblem p;
  p.drivers = std::move(drivers);
  p.requests = std::move(requests);
  p.grid = grid;
  p.eta_g_per_km = options.eta_g_per_km;
  p.fairness_scope = options.fairness_scope;

  std::vector<TileId> dropoff_tiles;
  dropoff_tiles.reserve(p.requests.size());
  for (const auto& r : p.requests) {
    dropoff_tiles.push_back(tile_of(r.dropoff, grid));
  }

  p.edges.resize(p.drivers.size() * p.requests.size());
  for (std::size_t d = 0; d < p.drivers.size(); ++d) {
    const BatchDriver& drv = p.drivers[d];
    const TileId driver_tile = tile_of(drv.location, grid);
    for (std::size_t r = 0; r < p.requests.size(); ++r) {
      const RideRequest& req = p.requests[r];
      const double dh = deadhead_km(drv.location, req.pickup, options.circuity);
      CandidateEdge e;
      e.driver_id = drv.id;
      e.request_id = req.id;
      e.deadhead_km = dh;
      e.trip_km = req.trip_km;
      e.expected_emission_g =
          expected_emission_g(drv.emission_g_per_km, req.trip_km, dh,
                              driver_tile, dropoff_tiles[r], table);
      e.expected_utility_km =
          expected_utility_km(drv.cumulative_utility_km, req.trip_km, dh,
                              driver_tile, dropoff_tiles[r], table,
                              options.utility_mode);
      e.allowed = dh <= options.candidate_radius_km;
      p.edge(d, r) = std::move(e);
    }
  }
  return p;
}

double batch_objective(const Matching& m, const BatchProblem& p) {
  std::unordered_map<std::string, std::size_t> driver_index, request_index;
  for (std::size_t d = 0; d < p.drivers.size(); ++d) {
    driver_index.emplace(p.drivers[d].id, d);
  }
  for (std::size_t r = 0; r < p.requests.size(); ++r) {
    request_index.emplace(p.requests[r].id, r);
  }

  std::vector<int> req_to_driver(p.requests.size(), -1);
  std::unordered_set<std::string> used_drivers;
  for (const auto& [driver_id, request_id] : m.pairs) {
    const auto di = driver_index.find(driver_id);
    const auto ri = request_index.find(request_id);
    if (di == driver_index.end() || ri == request_index.end()) {
      throw ContractViolation("matching references unknown id (" + driver_id +
                              ", " + request_id + ")");
    }
    if (!used_drivers.insert(driver_id).second) {
      throw ContractViolation("driver " + driver_id + " matched twice");
    }
    if (req_to_driver[ri->second] != -1) {
      throw ContractViolation("request " + request_id + " matched twice");
    }
    if (!p.edge(di->second, ri->second).allowed) {
      throw ContractViolation("matching uses pruned edge (" + driver_id + ", " +
                              request_id + ")");
    }
    req_to_driver[ri->second] = static_cast<int>(di->second);
  }
  return objective_of(p, req_to_driver);
}

Matching solve_batch_exact(const BatchProblem& p) {
  if (p.drivers.size() > 10 || p.requests.size() > 10) {
    throw OracleSizeError("exact solver accepts at most 10 drivers x 10 "
                          "requests, got " +
                          std::to_string(p.drivers.size()) + "x" +
                          std::to_string(p.requests.size()));
  }
  ExactSearch search{p, max_matchable(p), {}, {}, {}, {},
                     std::numeric_limits<double>::infinity(), false};
  search.run();
  if (!search.have_best) {
    return make_matching(p, std::vector<int>(p.requests.size(), -1));
  }
  return make_matching(p, search.best);
}

Matching solve_batch(const BatchProblem& p) {
  const std::size_t n_d = p.drivers.size();
  const std::size_t n_r = p.requests.size();
  std::vector<int> best(n_r, -1);
  if (n_d > 0 && n_r > 0) {
    const auto seeded_descent = [&](bool fairness_tilt) {
      std::vector<double> cost(n_d * n_r);
      for (std::size_t d = 0; d < n_d; ++d) {
        for (std::size_t r = 0; r < n_r; ++r) {
          const CandidateEdge& e = p.edge(d, r);
          if (!e.allowed) {
            cost[d * n_r + r] = kForbiddenCost;
            continue;
          }
          // The tilted seed folds a linear surrogate of the spread term into
          // the assignment cost. The spread itself only reacts to the two
          // extreme drivers, so descent from the emission seed cannot
          // dismantle a rich clique one move at a time; this seed starts from
          // a jointly fair assignment instead and descent keeps whichever
          // endpoint scores better.
          cost[d * n_r + r] =
              fairness_tilt
                  ? e.expected_emission_g + p.eta_g_per_km * e.expected_utility_km
                  : e.expected_emission_g;
        }
      }
      std::vector<int> req_to_driver(n_r, -1);
      const auto driver_to_req = min_cost_assignment(n_d, n_r, cost);
      for (std::size_t d = 0; d < n_d; ++d) {
        const int r = driver_to_req[d];
        if (r >= 0 && p.edge(d, static_cast<std::size_t>(r)).allowed) {
          req_to_driver[static_cast<std::size_t>(r)] = static_cast<int>(d);
        }
      }
      local_search(p, req_to_driver);
      return req_to_driver;
    };

    best = seeded_descent(false);
    if (p.eta_g_per_km > 0.0) {
      const std::vector<int> tilted = seeded_descent(true);
      const double best_obj = objective_of(p, best);
      const double tilted_obj = objective_of(p, tilted);
      if (tilted_obj < best_obj ||
          (tilted_obj == best_obj && lex_less(p, tilted, best))) {
        best = tilted;
      }
    }
  }
  return make_matching(p, best);
}

std::pair<std::vector<RideRequest>, std::vector<RideRequest>> overflow_split(
    std::vector<RideRequest> requests, std::size_t capacity) {
  if (requests.size() <= capacity) {
    return {std::move(requests), {}};
  }
  std::vector<RideRequest> head(requests.begin(),
                                requests.begin() + static_cast<long>(capacity));
  std::vector<RideRequest> deferred(requests.begin() + static_cast<long>(capacity),
                                    requests.end());
  return {std::move(head), std::move(deferred)};
}

}  // namespace dispatchlab
