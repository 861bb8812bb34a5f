// Copyright 2026 The foakit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Feature matrices on disk.
//
// Binary: "FKMATRX1", u64 rows, u64 cols, rows*cols little-endian f64 in
// row-major order. Text: one vector per line, values separated by
// whitespace and/or commas; blank lines and lines starting with '#' are
// skipped.

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "foakit/binary_io.hpp"
#include "foakit/error.hpp"

namespace foakit {

inline const binary::Magic kMatrixMagic = binary::make_magic("FKMATRX1");

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  binary::write_magic(out, kMatrixMagic);
  binary::write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  binary::write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  binary::write_doubles(out, rm.data(), static_cast<std::size_t>(rm.size()));
}

inline Eigen::MatrixXd read_matrix(std::istream& in) {
  binary::expect_magic(in, kMatrixMagic, "matrix");
  const auto rows = binary::read_pod<std::uint64_t>(in, "matrix");
  const auto cols = binary::read_pod<std::uint64_t>(in, "matrix");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 32;
  if (rows >= kLimit || cols >= kLimit || (cols != 0 && rows > (kLimit << 4) / cols)) {
    detail::fail(ErrorCode::ParseError, "matrix: implausible dimensions at byte offset 8");
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  binary::read_doubles(in, rm.data(), static_cast<std::size_t>(rm.size()), "matrix");
  return rm;
}

/// Parses the text layout; errors name the 1-based line.
inline Eigen::MatrixXd parse_text_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::vector<double> row;
    const char* p = line.c_str();
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (*p == '\0') break;
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(p, &end);
      if (end == p || errno == ERANGE || !std::isfinite(v) ||
          (*end != '\0' && *end != ' ' && *end != '\t' && *end != '\r')) {
        detail::fail(ErrorCode::ParseError,
                     "line " + std::to_string(lineno) + ": malformed number");
      }
      row.push_back(v);
      p = end;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      detail::fail(ErrorCode::ParseError,
                   "line " + std::to_string(lineno) + ": expected " +
                       std::to_string(rows.front().size()) + " values, got " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

inline void write_text_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  const auto old = out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
  out.precision(old);
}

/// Loads either layout, chosen by the leading magic bytes.
inline Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  binary::Magic head{};
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  const bool is_binary = in.gcount() == 8 && head == kMatrixMagic;
  in.clear();
  in.seekg(0);
  try {
    return is_binary ? read_matrix(in) : parse_text_matrix(in);
  } catch (const Error& e) {
    detail::fail(e.code(), path + ": " + e.detail());
  }
}

inline void save_matrix(const std::string& path, const Eigen::MatrixXd& m,
                        bool text = false) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) detail::fail(ErrorCode::IoFailure, "cannot create '" + path + "'");
  if (text) {
    write_text_matrix(out, m);
  } else {
    write_matrix(out, m);
  }
  if (!out) detail::fail(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

}  // namespace foakit
