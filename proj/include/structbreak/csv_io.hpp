#pragma once
// CSV ingestion (header row, UTF-8) into a balanced PanelDataset, plus
// break-point parsing against the dataset's time grid.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "structbreak/panel_data.hpp"
#include "structbreak/partition.hpp"

namespace structbreak {

struct CsvRoles {
  std::string unit;  // empty: the file is a single time series
  std::string time;  // required
};

namespace detail {

// One CSV record; handles quoted fields with doubled quotes and trims CR.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::string trim_ws(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double* out) {
  const std::string t = trim_ws(s);
  if (t.empty()) return false;
  size_t pos = 0;
  try {
    *out = std::stod(t, &pos);
  } catch (...) {
    return false;
  }
  return pos == t.size();
}

inline bool parse_longlong(const std::string& s, long long* out) {
  const std::string t = trim_ws(s);
  if (t.empty()) return false;
  size_t pos = 0;
  try {
    *out = std::stoll(t, &pos);
  } catch (...) {
    return false;
  }
  return pos == t.size();
}

}  // namespace detail

// Reads a header-row CSV into a balanced panel.  The time column either
// holds integers, which become the (sorted, gap-checked) time grid with
// their digits as labels, or opaque labels, in which case every unit must
// list the same labels in the same order and that order becomes the grid.
// Rows are reordered internally by (unit, time); every non-role column must
// be numeric.  Without a unit role the file is one time series.
inline PanelDataset load_csv(const std::string& path, const CsvRoles& roles) {
  if (roles.time.empty()) throw error("a time column is required");
  std::ifstream in(path);
  if (!in) throw error("cannot open data file " + path);

  std::string line;
  if (!std::getline(in, line)) throw error(path + " is empty");
  const std::vector<std::string> header = detail::split_csv_line(line);
  std::map<std::string, size_t> col_of;
  for (size_t c = 0; c < header.size(); ++c) {
    const std::string name = detail::trim_ws(header[c]);
    if (name.empty())
      throw error(path + ": header column " + std::to_string(c + 1) +
                  " has no name");
    if (!col_of.emplace(name, c).second)
      throw error(path + ": duplicate header column '" + name + "'");
  }
  auto require_col = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it == col_of.end())
      throw error(path + " has no column named '" + name + "'");
    return it->second;
  };
  const size_t time_c = require_col(roles.time);
  const bool has_unit = !roles.unit.empty();
  const size_t unit_c = has_unit ? require_col(roles.unit) : 0;

  struct RawRow {
    std::string unit, time_label;
    long long time_value = 0;
    std::vector<double> values;  // data columns in header order
    int file_row = 0;
  };
  std::vector<std::string> data_names;
  std::vector<size_t> data_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    const std::string name = detail::trim_ws(header[c]);
    if (c == time_c || (has_unit && c == unit_c)) continue;
    data_names.push_back(name);
    data_cols.push_back(c);
  }
  if (data_names.empty()) throw error(path + " has no data columns");

  std::vector<RawRow> rows;
  bool numeric_time = true;
  int file_row = 1;
  while (std::getline(in, line)) {
    ++file_row;
    if (detail::trim_ws(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw error(path + " row " + std::to_string(file_row) + " has " +
                  std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(header.size()));
    RawRow r;
    r.file_row = file_row;
    r.unit = has_unit ? detail::trim_ws(fields[unit_c]) : "1";
    r.time_label = detail::trim_ws(fields[time_c]);
    if (r.time_label.empty())
      throw error(path + " row " + std::to_string(file_row) +
                  " has an empty time value");
    if (numeric_time && !detail::parse_longlong(r.time_label, &r.time_value))
      numeric_time = false;
    r.values.resize(data_cols.size());
    for (size_t k = 0; k < data_cols.size(); ++k) {
      if (!detail::parse_double(fields[data_cols[k]], &r.values[k]))
        throw error(path + " row " + std::to_string(file_row) +
                    ": non-numeric value '" +
                    detail::trim_ws(fields[data_cols[k]]) + "' in column '" +
                    data_names[k] + "'");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw error(path + " has a header but no data rows");
  if (numeric_time)
    for (auto& r : rows) detail::parse_longlong(r.time_label, &r.time_value);

  // Units in order of first appearance.
  std::vector<std::string> unit_ids;
  std::map<std::string, int> unit_pos;
  for (const auto& r : rows)
    if (unit_pos.emplace(r.unit, static_cast<int>(unit_ids.size())).second)
      unit_ids.push_back(r.unit);
  const int N = static_cast<int>(unit_ids.size());

  // The time grid: sorted integers, or the first unit's label order.
  std::vector<long long> time_index;
  std::vector<std::string> time_labels;
  std::map<std::string, int> label_pos;
  if (numeric_time) {
    std::set<long long> times;
    for (const auto& r : rows) times.insert(r.time_value);
    time_index.assign(times.begin(), times.end());
    for (long long t : time_index)
      time_labels.push_back(std::to_string(t));
  } else {
    for (const auto& r : rows) {
      if (unit_pos[r.unit] != 0) break;
      time_labels.push_back(r.time_label);
    }
    for (long long t = 1; t <= static_cast<long long>(time_labels.size()); ++t)
      time_index.push_back(t);
  }
  for (size_t t = 0; t < time_labels.size(); ++t)
    if (!label_pos.emplace(time_labels[t], static_cast<int>(t)).second)
      throw error(path + ": duplicate time value '" + time_labels[t] +
                  "' on the time grid");
  const int T = static_cast<int>(time_index.size());

  // Place rows, catching duplicates, then check balance cell by cell.
  std::map<std::string, Eigen::MatrixXd> columns;
  for (const auto& name : data_names)
    columns.emplace(name, Eigen::MatrixXd::Constant(
                              N, T, std::numeric_limits<double>::quiet_NaN()));
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(N, T);
  for (const auto& r : rows) {
    const int i = unit_pos[r.unit];
    const std::string key =
        numeric_time ? std::to_string(r.time_value) : r.time_label;
    auto it = label_pos.find(key);
    if (it == label_pos.end())
      throw error(path + " row " + std::to_string(r.file_row) + ": time '" +
                  r.time_label + "' does not appear for the first unit; all "
                  "units must share one time grid");
    const int t = it->second;
    if (seen(i, t))
      throw error(path + ": duplicate observation for unit '" + r.unit +
                  "' at time '" + r.time_label + "' (rows " +
                  std::to_string(seen(i, t)) + " and " +
                  std::to_string(r.file_row) + ")");
    seen(i, t) = r.file_row;
    for (size_t k = 0; k < data_names.size(); ++k)
      columns[data_names[k]](i, t) = r.values[k];
  }
  for (int i = 0; i < N; ++i)
    for (int t = 0; t < T; ++t)
      if (!seen(i, t))
        throw error(path + ": panel is unbalanced; unit '" +
                    unit_ids[static_cast<size_t>(i)] +
                    "' has no observation at time '" +
                    time_labels[static_cast<size_t>(t)] + "'");

  // PanelDataset validates the regular-grid requirement and reports gaps.
  return PanelDataset(std::move(unit_ids), std::move(time_index),
                      std::move(columns), std::move(time_labels));
}

enum class BreakpointMode { Index, Label };

// Resolves user-supplied break dates against the dataset's grid and checks
// trimming feasibility.  Index mode takes 1-based positions; label mode
// matches grid labels verbatim.
inline BreakPartition parse_breakpoints(const std::vector<std::string>& values,
                                        BreakpointMode mode,
                                        const PanelDataset& data,
                                        double trimming) {
  if (values.empty()) throw error("no break points given");
  const int T = data.n_periods();
  std::vector<int> idx;
  idx.reserve(values.size());
  for (const auto& v : values) {
    if (mode == BreakpointMode::Index) {
      long long p = 0;
      if (!detail::parse_longlong(v, &p))
        throw error("break point '" + v + "' is not an integer index");
      if (p < 1 || p > T - 1)
        throw error("break index " + v + " is out of range 1.." +
                    std::to_string(T - 1));
      idx.push_back(static_cast<int>(p));
    } else {
      idx.push_back(data.position_of_label(v));
    }
  }
  std::vector<int> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != idx)
    throw error("break points must be given in increasing time order");
  BreakPartition part(idx, T);
  if (!part.feasible(trimming)) {
    const int h = min_segment_length(trimming, T);
    throw error("break points violate the trimming bound: every regime "
                "needs at least " + std::to_string(h) + " of the " +
                std::to_string(T) + " periods");
  }
  return part;
}

}  // namespace structbreak
