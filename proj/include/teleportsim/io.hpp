#pragma once
// Delimited text input and output: generic table parsing with line-numbered
// errors, typed readers for the measurement file formats, and writers that
// format numbers reproducibly.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "teleportsim/decoy.hpp"
#include "teleportsim/interference.hpp"
#include "teleportsim/pair_source.hpp"
#include "teleportsim/tomography.hpp"

namespace tsim {

struct TableRow {
  int line = 0;
  std::vector<std::string> cells;
};

// Reads a whitespace- or comma-delimited table. Blank lines and lines
// starting with '#' are skipped.
inline std::vector<TableRow> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<TableRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    TableRow row;
    row.line = line_no;
    std::string cell;
    for (char ch : line) {
      if (ch == '#') break;
      if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
        if (!cell.empty()) {
          row.cells.push_back(cell);
          cell.clear();
        }
        continue;
      }
      cell.push_back(ch);
    }
    if (!cell.empty()) row.cells.push_back(cell);
    if (!row.cells.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline double parse_double(const std::string& path, const TableRow& row,
                           std::size_t col) {
  if (col >= row.cells.size()) {
    throw InputError(path + ":" + std::to_string(row.line) +
                     ": expected at least " + std::to_string(col + 1) +
                     " columns");
  }
  const std::string& s = row.cells[col];
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) {
    throw InputError(path + ":" + std::to_string(row.line) +
                     ": cannot parse \"" + s + "\" as a number");
  }
  return value;
}

inline void require_columns(const std::string& path, const TableRow& row,
                            std::size_t n) {
  if (row.cells.size() != n) {
    throw InputError(path + ":" + std::to_string(row.line) + ": expected " +
                     std::to_string(n) + " columns, got " +
                     std::to_string(row.cells.size()));
  }
}

// Consistent number formatting for all output files.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

// Columns: pump_power_mw singles_s singles_i coincidences accidentals
// integration_s.
inline std::vector<PowerScanPoint> read_power_scan(const std::string& path) {
  std::vector<PowerScanPoint> out;
  for (const TableRow& row : read_table(path)) {
    detail::require_columns(path, row, 6);
    PowerScanPoint pt;
    pt.pump_power_mw = detail::parse_double(path, row, 0);
    pt.singles_s = detail::parse_double(path, row, 1);
    pt.singles_i = detail::parse_double(path, row, 2);
    pt.coincidences = detail::parse_double(path, row, 3);
    pt.accidentals = detail::parse_double(path, row, 4);
    pt.integration_s = detail::parse_double(path, row, 5);
    out.push_back(pt);
  }
  return out;
}

// Columns: delay_ps coincidences integration_s.
inline DipScan read_dip_scan(const std::string& path) {
  DipScan out;
  for (const TableRow& row : read_table(path)) {
    detail::require_columns(path, row, 3);
    out.push_back({detail::parse_double(path, row, 0),
                   detail::parse_double(path, row, 1),
                   detail::parse_double(path, row, 2)});
  }
  return out;
}

// Columns: phase_rad counts integration_s.
inline std::vector<FringePoint> read_fringe_scan(const std::string& path) {
  std::vector<FringePoint> out;
  for (const TableRow& row : read_table(path)) {
    detail::require_columns(path, row, 3);
    out.push_back({detail::parse_double(path, row, 0),
                   detail::parse_double(path, row, 1),
                   detail::parse_double(path, row, 2)});
  }
  return out;
}

// Columns: state mu gain error  -- three intensity rows per state, vacuum
// identified by mu == 0, signal by the largest mu; the error column is a
// rate in [0, 1].
inline std::vector<DecoyDataset> read_decoy_table(const std::string& path) {
  struct Entry {
    double mu = 0.0;
    double gain = 0.0;
    double error = 0.0;
  };
  std::map<std::string, std::vector<Entry>> by_state;
  std::vector<std::string> order;
  for (const TableRow& row : read_table(path)) {
    detail::require_columns(path, row, 4);
    const std::string& state = row.cells[0];
    if (by_state.find(state) == by_state.end()) order.push_back(state);
    by_state[state].push_back({detail::parse_double(path, row, 1),
                               detail::parse_double(path, row, 2),
                               detail::parse_double(path, row, 3)});
  }
  std::vector<DecoyDataset> out;
  for (const std::string& state : order) {
    auto entries = by_state[state];
    if (entries.size() != 3) {
      throw InputError(path + ": state \"" + state +
                       "\" needs exactly 3 intensity rows, got " +
                       std::to_string(entries.size()));
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.mu > b.mu; });
    DecoyDataset d;
    d.state_label = state;
    d.mu_signal = entries[0].mu;
    d.mu_decoy = entries[1].mu;
    d.mu_vacuum = entries[2].mu;
    d.gain_signal = entries[0].gain;
    d.gain_decoy = entries[1].gain;
    d.gain_vacuum = entries[2].gain;
    d.error_signal = entries[0].error;
    d.error_decoy = entries[1].error;
    d.error_vacuum = entries[2].error;
    validate(d);
    out.push_back(d);
  }
  return out;
}

// Columns: basis counts, one row per projection (e, l, +, -, +i, -i).
inline TomographyCounts read_tomography_counts(const std::string& path) {
  TomographyCounts c;
  bool seen[6] = {false, false, false, false, false, false};
  for (const TableRow& row : read_table(path)) {
    detail::require_columns(path, row, 2);
    const std::string& basis = row.cells[0];
    const double raw = detail::parse_double(path, row, 1);
    const auto counts = static_cast<std::int64_t>(raw);
    if (raw < 0.0 || static_cast<double>(counts) != raw) {
      throw InputError(path + ":" + std::to_string(row.line) +
                       ": counts must be non-negative integers");
    }
    int idx = -1;
    if (basis == "e") {
      c.n_e = counts;
      idx = 0;
    } else if (basis == "l") {
      c.n_l = counts;
      idx = 1;
    } else if (basis == "+") {
      c.n_plus = counts;
      idx = 2;
    } else if (basis == "-") {
      c.n_minus = counts;
      idx = 3;
    } else if (basis == "+i") {
      c.n_plus_i = counts;
      idx = 4;
    } else if (basis == "-i") {
      c.n_minus_i = counts;
      idx = 5;
    } else {
      throw InputError(path + ":" + std::to_string(row.line) +
                       ": unknown basis \"" + basis + "\"");
    }
    if (seen[idx]) {
      throw InputError(path + ":" + std::to_string(row.line) +
                       ": duplicate basis \"" + basis + "\"");
    }
    seen[idx] = true;
  }
  for (bool s : seen) {
    if (!s) throw InputError(path + ": needs one row per basis e l + - +i -i");
  }
  return c;
}

// Writes a table with a '#'-prefixed single-line header. Cells are written
// space-delimited with reproducible formatting.
inline void write_table(const std::string& path,
                        const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "#";
  for (const std::string& h : header) out << " " << h;
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << " ";
      out << detail::format_number(row[i]);
    }
    out << "\n";
  }
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace tsim
