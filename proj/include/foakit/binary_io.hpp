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

// Little-endian primitives shared by the binary containers (feature
// matrices, raw frames, model checkpoints).

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "foakit/error.hpp"

namespace foakit::binary {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

using Magic = std::array<char, 8>;

inline Magic make_magic(std::string_view s) {
  Magic m{};
  std::memcpy(m.data(), s.data(), std::min<std::size_t>(s.size(), 8));
  return m;
}

inline void write_magic(std::ostream& out, const Magic& m) {
  out.write(m.data(), static_cast<std::streamsize>(m.size()));
}

inline void expect_magic(std::istream& in, const Magic& m,
                         std::string_view what) {
  Magic got{};
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != m) {
    detail::fail(ErrorCode::ParseError,
                 std::string(what) + ": bad magic bytes at offset 0");
  }
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, std::string_view what) {
  T value{};
  const auto offset = in.tellg();
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    detail::fail(ErrorCode::ParseError,
                 std::string(what) + ": truncated at byte offset " +
                     std::to_string(static_cast<long long>(offset)));
  }
  return value;
}

inline void write_doubles(std::ostream& out, const double* data,
                          std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_doubles(std::istream& in, double* data, std::size_t count,
                         std::string_view what) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) {
    detail::fail(ErrorCode::ParseError,
                 std::string(what) + ": payload truncated");
  }
}

}  // namespace foakit::binary
