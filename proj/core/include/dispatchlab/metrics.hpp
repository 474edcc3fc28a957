#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dispatchlab/sim.hpp"

namespace dispatchlab {

struct MetricsReport {
  std::optional<double> emissions_g_per_trip;  // absent when no trips
  double fairness_gap_km = 0.0;                // max - min cumulative utility
  std::optional<double> mean_wait_s;           // served trips only
  std::size_t served_count = 0;
  std::size_t dropped_count = 0;
  std::vector<std::pair<std::string, double>> per_driver_utility;
  std::optional<double> lev_trip_share;        // trips served by LEV-class drivers
};

MetricsReport summarize(const SimResult& result);

// Ratios against a baseline run. Emissions and wait are report/baseline
// (below 1 is better); fairness is baseline_gap/report_gap (above 1 is
// fairer). Throws NormalizationError naming the metric whose divisor is
// absent or zero.
struct NormalizedReport {
  double emissions_ratio = 1.0;
  double fairness_ratio = 1.0;
  double wait_ratio = 1.0;
};

NormalizedReport normalize(const MetricsReport& report,
                           const MetricsReport& baseline);

struct SweepKey {
  std::string policy;
  double batch_duration_s = 0.0;
  double eta_g_per_km = 0.0;
  double lev_pct = 0.0;

  friend auto operator<=>(const SweepKey&, const SweepKey&) = default;
};

struct SweepRow {
  SweepKey key;
  std::string metric;
  double value = 0.0;
};

// Long-format rows (policy, batch_duration, eta, lev_pct, metric, value),
// stably sorted; absent metrics are omitted.
std::vector<SweepRow> sweep_table(
    const std::vector<std::pair<SweepKey, MetricsReport>>& reports);

std::string sweep_table_csv(const std::vector<SweepRow>& rows);
std::string metrics_csv(const MetricsReport& report);

}  // namespace dispatchlab
