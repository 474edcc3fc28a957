#pragma once

#include <filesystem>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "dispatchlab/geo.hpp"

namespace dispatchlab {

// One observed serve: the driver's tile at assignment, the dropoff tile, and
// the distances driven for that request.
struct Transition {
  TileId from;
  TileId to;
  double deadhead_km = 0.0;
  double trip_km = 0.0;
};

struct TdDelta {
  double delta_d = 0.0;
  double delta_t = 0.0;
};

// Per-tile estimates of expected discounted future deadhead distance (v_d)
// and trip distance (v_t). Unseen tiles read as 0. One table is shared by all
// drivers of a run.
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(double gamma, double alpha);

  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }

  double value_d(const TileId& s) const;
  double value_t(const TileId& s) const;

  // v(from) += alpha * (reward + gamma * v(to) - v(from)) for both tables.
  // Reads v(to) before writing, so from == to uses the pre-update value.
  // Returns the applied increments.
  TdDelta td_update(const Transition& tr);

  void set(const TileId& s, double v_d, double v_t);
  std::size_t size() const { return cells_.size(); }

  // Entries sorted by (col, row) for stable snapshots.
  std::vector<std::tuple<TileId, double, double>> entries_sorted() const;

  // Snapshot file: header line then one `col,row,v_d,v_t` row per tile.
  void save(const std::filesystem::path& path) const;
  static ValueTable load(const std::filesystem::path& path, double gamma,
                         double alpha);

 private:
  struct Cell {
    double v_d = 0.0;
    double v_t = 0.0;
  };

  std::unordered_map<TileId, Cell, TileIdHash> cells_;
  double gamma_ = 0.9;
  double alpha_ = 0.025;
};

}  // namespace dispatchlab
