#include "dispatchlab/metrics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "dispatchlab/errors.hpp"
#include "text_util.hpp"

namespace dispatchlab {

MetricsReport summarize(const SimResult& result) {
  MetricsReport rep;
  rep.served_count = result.trips.size();
  rep.dropped_count = result.dropped.size();

  if (!result.trips.empty()) {
    double emission_sum = 0.0;
    double wait_sum = 0.0;
    std::size_t lev_trips = 0;
    std::unordered_map<std::string, VehicleClass> classes;
    for (const auto& d : result.final_drivers) {
      classes.emplace(d.spec.id, d.spec.cls());
    }
    for (const auto& t : result.trips) {
      emission_sum += t.emission_g;
      wait_sum += t.wait_s;
      const auto it = classes.find(t.driver_id);
      if (it != classes.end() && it->second == VehicleClass::LEV) {
        ++lev_trips;
      }
    }
    const auto n = static_cast<double>(result.trips.size());
    rep.emissions_g_per_trip = emission_sum / n;
    rep.mean_wait_s = wait_sum / n;
    rep.lev_trip_share = static_cast<double>(lev_trips) / n;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& d : result.final_drivers) {
    rep.per_driver_utility.emplace_back(d.spec.id, d.cumulative_utility_km);
    lo = std::min(lo, d.cumulative_utility_km);
    hi = std::max(hi, d.cumulative_utility_km);
  }
  rep.fairness_gap_km = result.final_drivers.empty() ? 0.0 : hi - lo;
  return rep;
}

NormalizedReport normalize(const MetricsReport& report,
                           const MetricsReport& baseline) {
  NormalizedReport out;
  if (!baseline.emissions_g_per_trip || *baseline.emissions_g_per_trip == 0.0 ||
      !report.emissions_g_per_trip) {
    throw NormalizationError("cannot normalize metric emissions_g_per_trip: "
                             "absent or zero value");
  }
  out.emissions_ratio = *report.emissions_g_per_trip / *baseline.emissions_g_per_trip;

  if (report.fairness_gap_km == 0.0) {
    throw NormalizationError("cannot normalize metric fairness_gap_km: "
                             "absent or zero value");
  }
  out.fairness_ratio = baseline.fairness_gap_km / report.fairness_gap_km;

  if (!baseline.mean_wait_s || *baseline.mean_wait_s == 0.0 || !report.mean_wait_s) {
    throw NormalizationError("cannot normalize metric mean_wait_s: absent or "
                             "zero value");
  }
  out.wait_ratio = *report.mean_wait_s / *baseline.mean_wait_s;
  return out;
}

std::vector<SweepRow> sweep_table(
    const std::vector<std::pair<SweepKey, MetricsReport>>& reports) {
  std::vector<SweepRow> rows;
  for (const auto& [key, rep] : reports) {
    if (rep.emissions_g_per_trip) {
      rows.push_back({key, "emissions_g_per_trip", *rep.emissions_g_per_trip});
    }
    rows.push_back({key, "fairness_gap_km", rep.fairness_gap_km});
    if (rep.mean_wait_s) {
      rows.push_back({key, "mean_wait_s", *rep.mean_wait_s});
    }
    rows.push_back({key, "served_count", static_cast<double>(rep.served_count)});
    rows.push_back({key, "dropped_count", static_cast<double>(rep.dropped_count)});
    if (rep.lev_trip_share) {
      rows.push_back({key, "lev_trip_share", *rep.lev_trip_share});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     if (a.key != b.key) return a.key < b.key;
                     return a.metric < b.metric;
                   });
  return rows;
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "policy,batch_duration_s,eta_g_per_km,lev_pct,metric,value\n";
  for (const auto& r : rows) {
    out << r.key.policy << ',' << detail::fmt_double(r.key.batch_duration_s)
        << ',' << detail::fmt_double(r.key.eta_g_per_km) << ','
        << detail::fmt_double(r.key.lev_pct) << ',' << r.metric << ','
        << detail::fmt_double(r.value) << '\n';
  }
  return out.str();
}

std::string metrics_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "metric,value\n";
  if (report.emissions_g_per_trip) {
    out << "emissions_g_per_trip," << detail::fmt_double(*report.emissions_g_per_trip)
        << '\n';
  }
  out << "fairness_gap_km," << detail::fmt_double(report.fairness_gap_km) << '\n';
  if (report.mean_wait_s) {
    out << "mean_wait_s," << detail::fmt_double(*report.mean_wait_s) << '\n';
  }
  out << "served_count," << report.served_count << '\n';
  out << "dropped_count," << report.dropped_count << '\n';
  if (report.lev_trip_share) {
    out << "lev_trip_share," << detail::fmt_double(*report.lev_trip_share) << '\n';
  }
  return out.str();
}

}  // namespace dispatchlab
