#include "dispatchlab/values.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "dispatchlab/errors.hpp"
#include "text_util.hpp"

namespace dispatchlab {

ValueTable::ValueTable(double gamma, double alpha) : gamma_(gamma), alpha_(alpha) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("discount factor must lie in [0, 1]");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("learning rate must lie in (0, 1]");
  }
}

double ValueTable::value_d(const TileId& s) const {
  const auto it = cells_.find(s);
  return it == cells_.end() ? 0.0 : it->second.v_d;
}

double ValueTable::value_t(const TileId& s) const {
  const auto it = cells_.find(s);
  return it == cells_.end() ? 0.0 : it->second.v_t;
}

TdDelta ValueTable::td_update(const Transition& tr) {
  // Read everything before the write so from == to sees pre-update values.
  const double vd_to = value_d(tr.to);
  const double vt_to = value_t(tr.to);
  const double vd_from = value_d(tr.from);
  const double vt_from = value_t(tr.from);

  TdDelta d;
  d.delta_d = alpha_ * (tr.deadhead_km + gamma_ * vd_to - vd_from);
  d.delta_t = alpha_ * (tr.trip_km + gamma_ * vt_to - vt_from);

  Cell& cell = cells_[tr.from];
  cell.v_d = vd_from + d.delta_d;
  cell.v_t = vt_from + d.delta_t;
  return d;
}

void ValueTable::set(const TileId& s, double v_d, double v_t) {
  cells_[s] = Cell{v_d, v_t};
}

std::vector<std::tuple<TileId, double, double>> ValueTable::entries_sorted() const {
  std::vector<std::tuple<TileId, double, double>> out;
  out.reserve(cells_.size());
  for (const auto& [tile, cell] : cells_) {
    out.emplace_back(tile, cell.v_d, cell.v_t);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) < std::get<0>(b);
  });
  return out;
}

void ValueTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write value snapshot: " + path.string());
  }
  out << "col,row,v_d,v_t\n";
  for (const auto& [tile, v_d, v_t] : entries_sorted()) {
    out << tile.col << ',' << tile.row << ',' << detail::fmt_double(v_d) << ','
        << detail::fmt_double(v_t) << '\n';
  }
}

ValueTable ValueTable::load(const std::filesystem::path& path, double gamma,
                            double alpha) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read value snapshot: " + path.string());
  }
  ValueTable table(gamma, alpha);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 4) {
      throw SchemaError("value snapshot row must have 4 fields: " + line);
    }
    table.set(TileId{std::stoi(fields[0]), std::stoi(fields[1])},
              std::stod(fields[2]), std::stod(fields[3]));
  }
  return table;
}

}  // namespace dispatchlab
