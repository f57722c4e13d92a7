#pragma once

// Result tables written by the command-line driver: per-station tilts,
// the point-to-station assignment, RSS distribution curves, and the
// outer-pass objective trace. All files carry a header row, serialize
// numbers with nine significant digits, and have deterministic row
// order (station index, grid order, ascending RSS, pass number).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "corridor_tilt/errors.hpp"
#include "corridor_tilt/grid.hpp"
#include "corridor_tilt/optimizer.hpp"
#include "corridor_tilt/partition.hpp"

namespace corridor_tilt::artifacts {

inline std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_tilts_csv(std::ostream& os,
                            const std::vector<channel::BaseStation>& stations,
                            const partition::TiltVector& tilts,
                            const std::vector<double>& cell_mass) {
  if (tilts.size() != stations.size() || cell_mass.size() != stations.size())
    throw Error("tilts table: stations, tilts, and masses must align");
  os << "station_id,x_m,y_m,azimuth_deg,tilt_deg,cell_mass\n";
  for (std::size_t n = 0; n < stations.size(); ++n) {
    const channel::BaseStation& bs = stations[n];
    os << bs.id << ',' << fmt9(bs.x_m) << ',' << fmt9(bs.y_m) << ','
       << fmt9(bs.azimuth_deg) << ',' << fmt9(tilts.deg[n]) << ','
       << fmt9(cell_mass[n]) << '\n';
  }
}

inline void write_partition_csv(std::ostream& os,
                                const grid::QuadratureGrid& g,
                                const std::vector<channel::BaseStation>& stations,
                                const partition::Partition& part,
                                const partition::RssField& field) {
  if (part.size() != g.size() || field.rss_dbm.size() != g.size())
    throw Error("partition table: grid, assignment, and field must align");
  os << "x_m,y_m,h_m,region_tag,weight,station_id,rss_dbm\n";
  for (std::size_t p = 0; p < g.size(); ++p) {
    const grid::GridPoint& pt = g.points[p];
    os << fmt9(pt.loc.x_m) << ',' << fmt9(pt.loc.y_m) << ','
       << fmt9(pt.loc.height_m) << ',' << grid::region_tag(pt) << ','
       << fmt9(pt.weight) << ',' << stations[part.assignment[p]].id << ','
       << fmt9(field.rss_dbm[p]) << '\n';
  }
}

inline void write_cdf_csv(std::ostream& os,
                          const std::vector<partition::CdfPoint>& cdf) {
  os << "rss_dbm,cdf\n";
  for (const partition::CdfPoint& c : cdf)
    os << fmt9(c.rss_dbm) << ',' << fmt9(c.cdf) << '\n';
}

// One row per outer pass; pass 0 is the objective under the seeded
// random initial partition.
inline void write_convergence_csv(std::ostream& os,
                                  const std::vector<double>& outer_phi_dbm) {
  os << "outer_iter,phi_dbm\n";
  for (std::size_t k = 0; k < outer_phi_dbm.size(); ++k)
    os << k << ',' << fmt9(outer_phi_dbm[k]) << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw ParseError("csv: missing column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split_csv_line(line);
      first = false;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  if (first) throw ParseError("csv: '" + path + "' has no header row");
  return table;
}

inline double parse_double_field(const std::string& text,
                                 const std::string& what) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("csv: " + what + ": '" + text + "' is not a number");
  }
}

// Reads a tilt vector from any table carrying station_id and tilt_deg
// columns (the tilts table written by the optimizer qualifies). Station
// ids must cover 1..N exactly once; rows may appear in any order.
inline partition::TiltVector read_tilts_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t id_col = table.column("station_id");
  const std::size_t tilt_col = table.column("tilt_deg");
  const std::size_t n_rows = table.rows.size();
  partition::TiltVector tilts;
  tilts.deg.assign(n_rows, 0.0);
  std::vector<bool> seen(n_rows, false);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw ParseError("csv: '" + path + "' has a ragged row");
    const double id_val = parse_double_field(row[id_col], "station_id");
    const std::int64_t id = static_cast<std::int64_t>(id_val);
    if (static_cast<double>(id) != id_val || id < 1 ||
        id > static_cast<std::int64_t>(n_rows))
      throw ParseError("csv: station_id '" + row[id_col] +
                       "' does not index a station");
    if (seen[static_cast<std::size_t>(id - 1)])
      throw ParseError("csv: duplicate station_id '" + row[id_col] + "'");
    seen[static_cast<std::size_t>(id - 1)] = true;
    tilts.deg[static_cast<std::size_t>(id - 1)] =
        parse_double_field(row[tilt_col], "tilt_deg");
  }
  return tilts;
}

inline void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed while writing '" + path + "'");
}

}  // namespace corridor_tilt::artifacts
