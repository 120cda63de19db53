// SPDX-License-Identifier: MIT
#pragma once

/// @file csv.hpp
/// @brief RFC-4180 CSV emission and the tabulated-marginal CSV reader.
///
/// All floating-point fields are printed with 17 significant digits so that
/// repeated runs diff bit-exactly.  Files use UTF-8 with `\n` line endings;
/// fields containing separators or quotes are quoted per RFC 4180 (numeric
/// output never needs it, but headers pass through the same writer).

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smot/errors.hpp"

namespace smot {

/// Quotes a field when it contains a comma, quote or newline.
[[nodiscard]] inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// 17-significant-digit decimal rendering (round-trips a double exactly).
[[nodiscard]] inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Line-oriented CSV writer over an std::ostream-like file.
class csv_writer {
 public:
  explicit csv_writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) {
      throw validation_error("csv_writer: cannot open '" + path +
                             "' for writing");
    }
  }

  void row(const std::vector<std::string>& fields) {
    bool first = true;
    for (const auto& f : fields) {
      if (!first) out_ << ',';
      out_ << csv_escape(f);
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<std::string> fields) {
    row(std::vector<std::string>(fields));
  }

  void numeric_row(const std::vector<double>& values) {
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) fields.push_back(csv_num(v));
    row(fields);
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

/// Parsed contents of a `t,x,f` marginal table: one density sample per row,
/// grouped by time slice with both the x-grid and the density values sorted
/// by x (the family builder requires increasing grids per slice).
struct marginal_table {
  std::vector<double> times;
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> fs;
};

/// Reads a marginal table CSV with the exact header `t,x,f`.  Rows may
/// appear in any order; they are grouped by identical t values.
[[nodiscard]] inline marginal_table read_marginal_table(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw validation_error("read_marginal_table: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw validation_error("read_marginal_table: '" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto strip = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  {
    std::istringstream hs(line);
    std::string col;
    const char* want[3] = {"t", "x", "f"};
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(hs, col, ',') || strip(col) != want[i]) {
        throw validation_error("read_marginal_table: '" + path +
                               "' must start with header 't,x,f' (got '" +
                               line + "')");
      }
    }
  }

  std::map<double, std::vector<std::pair<double, double>>> slices;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    std::istringstream ls(line);
    double vals[3];
    std::string cell;
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ls, cell, ',')) {
        throw validation_error("read_marginal_table: '" + path + "' line " +
                               std::to_string(line_no) +
                               ": expected three fields t,x,f");
      }
      try {
        std::size_t used = 0;
        vals[i] = std::stod(strip(cell), &used);
      } catch (const std::exception&) {
        throw validation_error("read_marginal_table: '" + path + "' line " +
                               std::to_string(line_no) +
                               ": field '" + cell + "' is not a number");
      }
    }
    slices[vals[0]].emplace_back(vals[1], vals[2]);
  }
  if (slices.size() < 2) {
    throw validation_error("read_marginal_table: '" + path +
                           "' needs at least two distinct time slices");
  }

  marginal_table tab;
  for (auto& [t, rows] : slices) {
    std::sort(rows.begin(), rows.end());
    tab.times.push_back(t);
    std::vector<double> xs, fs;
    xs.reserve(rows.size());
    fs.reserve(rows.size());
    for (const auto& [x, f] : rows) {
      xs.push_back(x);
      fs.push_back(f);
    }
    tab.xs.push_back(std::move(xs));
    tab.fs.push_back(std::move(fs));
  }
  return tab;
}

}  // namespace smot
