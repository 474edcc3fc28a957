#include "dispatchlab/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "dispatchlab/errors.hpp"
#include "dispatchlab/hungarian.hpp"

namespace dispatchlab {

namespace {

constexpr double kForbiddenCost = 1e12;

Matching finalize(const BatchProblem& p, const std::vector<int>& req_to_driver) {
  Matching m;
  for (std::size_t r = 0; r < req_to_driver.size(); ++r) {
    if (req_to_driver[r] < 0) continue;
    m.pairs.emplace_back(p.drivers[static_cast<std::size_t>(req_to_driver[r])].id,
                         p.requests[r].id);
  }
  std::sort(m.pairs.begin(), m.pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  // Report the batch objective of the produced matching so policies are
  // comparable; baselines do not optimize it.
  m.objective_value = batch_objective(m, p);
  return m;
}

// Nearest allowed free driver for request r; ties by driver id. -1 when none.
int closest_free_driver(const BatchProblem& p, std::size_t r,
                        const std::vector<char>& taken) {
  int best = -1;
  for (std::size_t d = 0; d < p.drivers.size(); ++d) {
    if (taken[d] || !p.edge(d, r).allowed) continue;
    if (best < 0) {
      best = static_cast<int>(d);
      continue;
    }
    const double dh = p.edge(d, r).deadhead_km;
    const double best_dh = p.edge(static_cast<std::size_t>(best), r).deadhead_km;
    if (dh < best_dh ||
        (dh == best_dh && p.drivers[d].id < p.drivers[static_cast<std::size_t>(best)].id)) {
      best = static_cast<int>(d);
    }
  }
  return best;
}

}  // namespace

PolicyKind policy_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lead") return PolicyKind::LEAD;
  if (lower == "cd") return PolicyKind::CD;
  if (lower == "tora") return PolicyKind::TORA;
  if (lower == "laf") return PolicyKind::LAF;
  throw ConfigError("unknown policy '" + std::string(name) +
                    "' (expected lead, cd, tora or laf)");
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::LEAD: return "lead";
    case PolicyKind::CD: return "cd";
    case PolicyKind::TORA: return "tora";
    case PolicyKind::LAF: return "laf";
  }
  return "?";
}

Matching assign_cd(const BatchProblem& p) {
  std::vector<int> req_to_driver(p.requests.size(), -1);
  std::vector<char> taken(p.drivers.size(), 0);
  for (std::size_t r = 0; r < p.requests.size(); ++r) {
    const int d = closest_free_driver(p, r, taken);
    if (d < 0) continue;
    req_to_driver[r] = d;
    taken[static_cast<std::size_t>(d)] = 1;
  }
  return finalize(p, req_to_driver);
}

Matching assign_tora(const BatchProblem& p, double e2d_threshold_g_per_km) {
  if (e2d_threshold_g_per_km < 0.0) {
    throw ConfigError("E2D threshold must be non-negative");
  }
  std::vector<int> req_to_driver(p.requests.size(), -1);
  std::vector<char> taken(p.drivers.size(), 0);
  for (std::size_t r = 0; r < p.requests.size(); ++r) {
    const int closest = closest_free_driver(p, r, taken);
    if (closest < 0) continue;
    const auto c = static_cast<std::size_t>(closest);
    const double c_dist = p.edge(c, r).deadhead_km;
    const double c_emission = c_dist * p.drivers[c].emission_g_per_km;

    // Alternatives strictly farther than the closest driver; a negative E2D
    // is an emission saving per extra pickup kilometre.
    int chosen = closest;
    double best_e2d = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < p.drivers.size(); ++d) {
      if (taken[d] || d == c || !p.edge(d, r).allowed) continue;
      const double dist = p.edge(d, r).deadhead_km;
      if (dist <= c_dist) continue;
      const double emission = dist * p.drivers[d].emission_g_per_km;
      const double e2d = (emission - c_emission) / (dist - c_dist);
      if (e2d > -e2d_threshold_g_per_km) continue;
      if (e2d < best_e2d ||
          (e2d == best_e2d && chosen != closest &&
           p.drivers[d].id < p.drivers[static_cast<std::size_t>(chosen)].id)) {
        best_e2d = e2d;
        chosen = static_cast<int>(d);
      }
    }
    req_to_driver[r] = chosen;
    taken[static_cast<std::size_t>(chosen)] = 1;
  }
  return finalize(p, req_to_driver);
}

LafValueTable::LafValueTable(double gamma, double alpha)
    : gamma_(gamma), alpha_(alpha) {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("LAF value table needs gamma in [0,1] and "
                                "alpha in (0,1]");
  }
}

double LafValueTable::value(const TileId& s) const {
  const auto it = cells_.find(s);
  return it == cells_.end() ? 0.0 : it->second;
}

double LafValueTable::update(const TileId& from, const TileId& to,
                             double reward_km) {
  const double v_to = value(to);
  const double v_from = value(from);
  const double delta = alpha_ * (reward_km + gamma_ * v_to - v_from);
  cells_[from] = v_from + delta;
  return delta;
}

Matching assign_laf(const BatchProblem& p, const LafValueTable& values,
                    double lambda) {
  const std::size_t n_d = p.drivers.size();
  const std::size_t n_r = p.requests.size();
  std::vector<int> req_to_driver(n_r, -1);
  if (n_d == 0 || n_r == 0) {
    return finalize(p, req_to_driver);
  }

  // Projected final utility per edge from the single utility value function.
  std::vector<TileId> dropoff_tiles(n_r);
  for (std::size_t r = 0; r < n_r; ++r) {
    dropoff_tiles[r] = tile_of(p.requests[r].dropoff, p.grid);
  }
  std::vector<double> edge_u(n_d * n_r, 0.0);
  for (std::size_t d = 0; d < n_d; ++d) {
    const TileId here = tile_of(p.drivers[d].location, p.grid);
    for (std::size_t r = 0; r < n_r; ++r) {
      const CandidateEdge& e = p.edge(d, r);
      edge_u[d * n_r + r] = p.drivers[d].cumulative_utility_km +
                            (e.trip_km - e.deadhead_km) +
                            values.gamma() * values.value(dropoff_tiles[r]) -
                            values.value(here);
    }
  }

  const auto laf_objective = [&](const std::vector<int>& rtd) {
    double matched_sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::vector<double> projected(n_d);
    for (std::size_t d = 0; d < n_d; ++d) {
      projected[d] = p.drivers[d].cumulative_utility_km;
    }
    for (std::size_t r = 0; r < rtd.size(); ++r) {
      if (rtd[r] < 0) continue;
      const auto d = static_cast<std::size_t>(rtd[r]);
      matched_sum += edge_u[d * n_r + r];
      projected[d] = edge_u[d * n_r + r];
    }
    for (const double u : projected) {
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    return -matched_sum + lambda * (hi - lo);
  };

  // Seed: maximize summed projected utility.
  std::vector<double> cost(n_d * n_r);
  for (std::size_t d = 0; d < n_d; ++d) {
    for (std::size_t r = 0; r < n_r; ++r) {
      cost[d * n_r + r] =
          p.edge(d, r).allowed ? -edge_u[d * n_r + r] : kForbiddenCost;
    }
  }
  const auto driver_to_req = min_cost_assignment(n_d, n_r, cost);
  for (std::size_t d = 0; d < n_d; ++d) {
    const int r = driver_to_req[d];
    if (r >= 0 && p.edge(d, static_cast<std::size_t>(r)).allowed) {
      req_to_driver[static_cast<std::size_t>(r)] = static_cast<int>(d);
    }
  }

  // Best-improvement local search, same move set as the batch solver.
  const std::size_t move_cap = 10 * std::max<std::size_t>(p.edges.size(), 1);
  double current = laf_objective(req_to_driver);
  for (std::size_t applied = 0; applied < move_cap; ++applied) {
    double best = current;
    int move_kind = 0;
    std::size_t m_r1 = 0, m_r2 = 0, m_d = 0;

    std::vector<char> matched(n_d, 0);
    for (std::size_t r = 0; r < n_r; ++r) {
      if (req_to_driver[r] >= 0) matched[static_cast<std::size_t>(req_to_driver[r])] = 1;
    }
    for (std::size_t r1 = 0; r1 < n_r; ++r1) {
      if (req_to_driver[r1] < 0) continue;
      for (std::size_t r2 = r1 + 1; r2 < n_r; ++r2) {
        if (req_to_driver[r2] < 0) continue;
        const auto d1 = static_cast<std::size_t>(req_to_driver[r1]);
        const auto d2 = static_cast<std::size_t>(req_to_driver[r2]);
        if (!p.edge(d2, r1).allowed || !p.edge(d1, r2).allowed) continue;
        std::swap(req_to_driver[r1], req_to_driver[r2]);
        const double obj = laf_objective(req_to_driver);
        std::swap(req_to_driver[r1], req_to_driver[r2]);
        if (obj < best) {
          best = obj;
          move_kind = 1;
          m_r1 = r1;
          m_r2 = r2;
        }
      }
    }
    for (std::size_t r = 0; r < n_r; ++r) {
      if (req_to_driver[r] < 0) continue;
      for (std::size_t d = 0; d < n_d; ++d) {
        if (matched[d] || !p.edge(d, r).allowed) continue;
        const int old = req_to_driver[r];
        req_to_driver[r] = static_cast<int>(d);
        const double obj = laf_objective(req_to_driver);
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
  return finalize(p, req_to_driver);
}

}  // namespace dispatchlab
