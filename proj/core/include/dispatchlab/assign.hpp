#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dispatchlab/geo.hpp"
#include "dispatchlab/ingest.hpp"
#include "dispatchlab/values.hpp"

namespace dispatchlab {

// Reading of the utility weight's final value-function term: `derived` uses
// V_T(l) - V_D(l), mirroring the emission weight's structure; `paper` uses
// V_T(l) + V_D(l). One sign apart, both selectable.
enum class UtilityMode { derived, paper };

// How per-batch fairness treats drivers the matching leaves unassigned:
// project their current cumulative utility, or score them as zero.
enum class FairnessScope { all_available, matched_only };

struct CandidateEdge {
  std::string driver_id;
  std::string request_id;
  double deadhead_km = 0.0;
  double trip_km = 0.0;
  double expected_emission_g = 0.0;
  double expected_utility_km = 0.0;
  bool allowed = true;  // false when the pickup lies beyond the candidate radius
};

struct BatchDriver {
  std::string id;
  GeoPoint location;  // current, or upcoming dropoff when still on a trip
  double emission_g_per_km = 0.0;
  double cumulative_utility_km = 0.0;
  double busy_until_s = 0.0;
};

// One batch's matching inputs: the available drivers, the batch requests, and
// the dense driver x request edge grid with precomputed weights.
struct BatchProblem {
  std::vector<BatchDriver> drivers;
  std::vector<RideRequest> requests;
  std::vector<CandidateEdge> edges;  // row-major: drivers x requests
  GridSpec grid;
  double eta_g_per_km = 0.0;
  FairnessScope fairness_scope = FairnessScope::all_available;

  const CandidateEdge& edge(std::size_t driver, std::size_t request) const {
    return edges[driver * requests.size() + request];
  }
  CandidateEdge& edge(std::size_t driver, std::size_t request) {
    return edges[driver * requests.size() + request];
  }
};

struct Matching {
  std::vector<std::pair<std::string, std::string>> pairs;  // (driver_id, request_id)
  double objective_value = 0.0;
};

// Long-term expected emission of assigning this trip:
// [(d_T + d_D) + gamma*(V_T(q) + V_D(q)) - (V_T(l) + V_D(l))] * e_v.
double expected_emission_g(double e_v_g_per_km, double trip_km,
                           double deadhead_km, TileId driver_tile,
                           TileId dropoff_tile, const ValueTable& table);

// Projected final cumulative utility after this trip:
// U + (d_T - d_D) + gamma*(V_T(q) - V_D(q)) - last term per UtilityMode.
double expected_utility_km(double cumulative_utility_km, double trip_km,
                           double deadhead_km, TileId driver_tile,
                           TileId dropoff_tile, const ValueTable& table,
                           UtilityMode mode);

struct BatchBuildOptions {
  double eta_g_per_km = 0.0;
  double circuity = 1.0;
  double candidate_radius_km = 8.0;
  UtilityMode utility_mode = UtilityMode::derived;
  FairnessScope fairness_scope = FairnessScope::all_available;
};

BatchProblem build_batch_problem(std::vector<BatchDriver> drivers,
                                 std::vector<RideRequest> requests,
                                 const GridSpec& grid, const ValueTable& table,
                                 const BatchBuildOptions& options);

// Batch objective: sum of matched expected emissions plus eta times the
// spread of projected cumulative utilities. Throws ContractViolation when the
// matching is infeasible for the problem.
double batch_objective(const Matching& m, const BatchProblem& p);

// Exhaustive optimum over injective assignments of min(|requests|, |drivers|)
// pairs, branch-and-bound pruned on the emission sum. Guarded to instances of
// at most 10 x 10; ties broken by lexicographic (request_id, driver_id).
Matching solve_batch_exact(const BatchProblem& p);

// Production path: Hungarian seed on the expected-emission matrix, then
// best-improvement local search (pair swaps and reassignment to unmatched
// drivers) on the full batch objective. Deterministic given the problem.
Matching solve_batch(const BatchProblem& p);

// Batch-overflow rule: the first `capacity` time-ordered requests stay in the
// batch, the rest carry over in order.
std::pair<std::vector<RideRequest>, std::vector<RideRequest>> overflow_split(
    std::vector<RideRequest> requests, std::size_t capacity);

}  // namespace dispatchlab
