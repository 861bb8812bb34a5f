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

// Frame files: binary PGM/PPM (P5/P6, maxval 255 or 65535) and a raw
// container "FKFRAME1", u64 height, u64 width, u64 channels, then
// little-endian f64 pixels in H x W x C order.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "foakit/binary_io.hpp"
#include "foakit/error.hpp"
#include "foakit/pano.hpp"

namespace foakit {

inline const binary::Magic kFrameMagic = binary::make_magic("FKFRAME1");

inline void write_raw_frame(std::ostream& out, const Frame& f) {
  binary::write_magic(out, kFrameMagic);
  binary::write_pod<std::uint64_t>(out, f.height());
  binary::write_pod<std::uint64_t>(out, f.width());
  binary::write_pod<std::uint64_t>(out, f.channels());
  binary::write_doubles(out, f.pixels().data(), f.pixels().size());
}

inline Frame read_raw_frame(std::istream& in) {
  binary::expect_magic(in, kFrameMagic, "frame");
  const auto h = binary::read_pod<std::uint64_t>(in, "frame");
  const auto w = binary::read_pod<std::uint64_t>(in, "frame");
  const auto c = binary::read_pod<std::uint64_t>(in, "frame");
  if (h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20) || (c != 1 && c != 3)) {
    detail::fail(ErrorCode::ParseError, "frame: implausible dimensions at byte offset 8");
  }
  std::vector<double> px(h * w * c);
  binary::read_doubles(in, px.data(), px.size(), "frame");
  return Frame(h, w, c, std::move(px));
}

namespace detail {

inline std::size_t pnm_header_field(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  const std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (value > (1u << 24)) break;
    ++pos;
  }
  if (pos == start || value > (1u << 24)) {
    fail(ErrorCode::ParseError,
         "image: malformed header at byte offset " + std::to_string(start));
  }
  return value;
}

}  // namespace detail

/// Decodes P5 (grey) or P6 (RGB); 16-bit samples are big-endian.
inline Frame decode_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    detail::fail(ErrorCode::UnsupportedFormat, "image: only binary PGM/PPM (P5/P6) is supported");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const std::size_t w = detail::pnm_header_field(bytes, pos);
  const std::size_t h = detail::pnm_header_field(bytes, pos);
  const std::size_t maxval = detail::pnm_header_field(bytes, pos);
  if (maxval != 255 && maxval != 65535) {
    detail::fail(ErrorCode::UnsupportedFormat,
                 "image: maxval " + std::to_string(maxval) + " (need 255 or 65535)");
  }
  if (w == 0 || h == 0) detail::fail(ErrorCode::ParseError, "image: zero dimension");
  ++pos;  // single whitespace byte before the raster
  const std::size_t bps = maxval == 255 ? 1 : 2;
  const std::size_t count = w * h * channels;
  if (pos > bytes.size() || bytes.size() - pos < count * bps) {
    detail::fail(ErrorCode::ParseError, "image: raster truncated");
  }
  std::vector<double> px(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bps == 1 ? p[i] : (unsigned{p[2 * i]} << 8) | p[2 * i + 1];
    px[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return Frame(h, w, channels, std::move(px));
}

/// Encodes with values clamped to [0, 1] and rounded to the nearest level.
inline std::string encode_pnm(const Frame& f, bool sixteen_bit = false) {
  const unsigned maxval = sixteen_bit ? 65535 : 255;
  std::string out = (f.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(f.width()) +
                    " " + std::to_string(f.height()) + "\n" + std::to_string(maxval) + "\n";
  for (double v : f.pixels()) {
    const auto q = static_cast<unsigned>(
        std::lround(std::clamp(v, 0.0, 1.0) * static_cast<double>(maxval)));
    if (sixteen_bit) out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xFF));
  }
  return out;
}

/// Reads a raw frame container or a PGM/PPM file, chosen by magic bytes.
inline Frame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    if (bytes.size() >= 8 && std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin())) {
      std::istringstream s(bytes);
      return read_raw_frame(s);
    }
    return decode_pnm(bytes);
  } catch (const Error& e) {
    detail::fail(e.code(), path + ": " + e.detail());
  }
}

/// Writes by extension: .pgm/.ppm (8-bit, or 16-bit when requested),
/// anything else as a raw frame container.
inline void save_frame(const std::string& path, const Frame& f,
                       bool sixteen_bit = false) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) detail::fail(ErrorCode::IoFailure, "cannot create '" + path + "'");
  const auto ext = path.size() >= 4 ? path.substr(path.size() - 4) : std::string();
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    const std::string bytes = encode_pnm(f, sixteen_bit);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  } else {
    write_raw_frame(out, f);
  }
  if (!out) detail::fail(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

}  // namespace foakit
