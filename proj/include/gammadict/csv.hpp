// Copyright 2026 The gammadict Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV matrices: comma-separated cells, one row per line, no header.
// Values are written with 17 significant digits so a write/read cycle
// reproduces every double bit for bit.

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gammadict/errors.hpp"
#include "gammadict/matrix.hpp"

namespace gammadict {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double_cell(std::string_view cell, std::size_t line, std::size_t col) {
  cell = trim(cell);
  // from_chars rejects a leading '+'; accept it for hand-written files.
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw parse_error("csv: line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": not a number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace detail

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline Matrix parse_csv_matrix(std::istream& in) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      data.push_back(detail::parse_double_cell(rest.substr(0, comma), line_no, count + 1));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw parse_error("csv: line " + std::to_string(line_no) + " has " +
                        std::to_string(count) + " cells, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw parse_error("csv: no data rows");
  return Matrix(rows, cols, std::move(data));
}

inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  try {
    return parse_csv_matrix(in);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline void write_csv_matrix(std::ostream& out, const Matrix& A) {
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(A(i, j));
    }
    out << '\n';
  }
}

inline void write_csv_matrix(const std::string& path, const Matrix& A) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_csv_matrix(out, A);
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace gammadict
