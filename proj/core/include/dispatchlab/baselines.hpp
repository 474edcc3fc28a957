#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

#include "dispatchlab/assign.hpp"

namespace dispatchlab {

enum class PolicyKind { LEAD, CD, TORA, LAF };

PolicyKind policy_from_name(std::string_view name);
std::string_view to_string(PolicyKind k);

// Closest Driver: requests in batch order each take the nearest available
// driver (ties by driver id); chosen drivers leave the pool.
Matching assign_cd(const BatchProblem& p);

// TORA-style thresholding: start from the closest driver, then switch to the
// alternative whose deadhead-emission savings per extra pickup kilometre beat
// the threshold (most negative E2D ratio wins, ties by driver id).
Matching assign_tora(const BatchProblem& p, double e2d_threshold_g_per_km);

// Single per-tile estimate of expected achievable utility, TD-updated with
// reward trip_km - deadhead_km. Drives the LAF baseline.
class LafValueTable {
 public:
  LafValueTable() = default;
  LafValueTable(double gamma, double alpha);

  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }
  double value(const TileId& s) const;
  // v(from) += alpha * (reward + gamma * v(to) - v(from)); returns the increment.
  double update(const TileId& from, const TileId& to, double reward_km);

 private:
  std::unordered_map<TileId, double, TileIdHash> cells_;
  double gamma_ = 0.9;
  double alpha_ = 0.025;
};

// Fairness-first matching: Hungarian seed maximizing summed projected
// utilities, then local search on  -sum(matched U) + lambda * utility spread.
// Emission rates never enter the objective.
Matching assign_laf(const BatchProblem& p, const LafValueTable& values,
                    double lambda = 1.0);

}  // namespace dispatchlab
