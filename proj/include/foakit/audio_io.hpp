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

// RIFF/WAVE reading and writing (16-bit PCM and 32-bit IEEE float, 1, 2
// or 4 channels).
//
// Four-channel files hold W, X, Y, Z in that order with W = s / sqrt(2).
// The `ambix` switch converts from/to ACN channel order with SN3D
// normalisation (W, Y, Z, X; W = s) at the file boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "foakit/error.hpp"
#include "foakit/foa.hpp"

namespace foakit {

enum class WavEncoding { kPcm16, kFloat32 };

inline std::string_view encoding_name(WavEncoding e) {
  return e == WavEncoding::kPcm16 ? "pcm16" : "float32";
}

inline WavEncoding parse_encoding(std::string_view name) {
  if (name == "pcm16") return WavEncoding::kPcm16;
  if (name == "float32") return WavEncoding::kFloat32;
  detail::fail(ErrorCode::InvalidArgument,
               "unknown encoding '" + std::string(name) + "'");
}

struct WavSpec {
  int channels = 1;
  int sample_rate = 44100;
  WavEncoding encoding = WavEncoding::kFloat32;
};

/// Decoded samples of any supported file, one vector per channel in file
/// order.
struct AudioBuffer {
  WavSpec spec;
  std::vector<std::vector<double>> channels;

  std::size_t frames() const { return channels.empty() ? 0 : channels[0].size(); }
};

using AudioSignal = std::variant<MonoSignal, StereoSignal, FoaSignal>;

namespace detail {

inline constexpr std::uint16_t kFormatPcm = 1;
inline constexpr std::uint16_t kFormatFloat = 3;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline void check_channels(int channels) {
  if (channels != 1 && channels != 2 && channels != 4) {
    fail(ErrorCode::ChannelCountUnsupported,
         std::to_string(channels) + " channels; supported are 1, 2 and 4");
  }
}

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

/// Round half away from zero, saturating to the 16-bit range.
inline std::int16_t quantize_pcm16(double v) {
  const double scaled = std::round(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

}  // namespace detail

inline AudioBuffer decode_wav(std::string_view bytes, std::string_view what) {
  using detail::load_le;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  const std::string where(what);
  if (n < 12) detail::fail(ErrorCode::CorruptHeader, where + ": shorter than a RIFF header");
  if (std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    detail::fail(ErrorCode::UnsupportedFormat, where + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, block_align = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char* chunk = p + pos;
    const auto size = load_le<std::uint32_t>(chunk + 4);
    if (size > n - pos - 8) {
      detail::fail(ErrorCode::CorruptHeader,
                   where + ": chunk at offset " + std::to_string(pos) +
                       " runs past end of file");
    }
    const unsigned char* body = chunk + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) detail::fail(ErrorCode::CorruptHeader, where + ": fmt chunk too small");
      format = load_le<std::uint16_t>(body);
      channels = load_le<std::uint16_t>(body + 2);
      rate = load_le<std::uint32_t>(body + 4);
      block_align = load_le<std::uint16_t>(body + 12);
      bits = load_le<std::uint16_t>(body + 14);
      if (format == detail::kFormatExtensible) {
        if (size < 40) {
          detail::fail(ErrorCode::CorruptHeader, where + ": extensible fmt chunk too small");
        }
        // First two bytes of the sub-format GUID carry the format tag.
        format = load_le<std::uint16_t>(body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }

  if (!have_fmt) detail::fail(ErrorCode::CorruptHeader, where + ": missing fmt chunk");
  if (data == nullptr) detail::fail(ErrorCode::CorruptHeader, where + ": missing data chunk");

  WavEncoding enc;
  if (format == detail::kFormatPcm && bits == 16) {
    enc = WavEncoding::kPcm16;
  } else if (format == detail::kFormatFloat && bits == 32) {
    enc = WavEncoding::kFloat32;
  } else {
    detail::fail(ErrorCode::UnsupportedFormat,
                 where + ": format tag " + std::to_string(format) + " with " +
                     std::to_string(bits) + " bits per sample");
  }
  detail::check_channels(channels);
  if (rate == 0) detail::fail(ErrorCode::CorruptHeader, where + ": zero sample rate");
  if (block_align != channels * (bits / 8)) {
    detail::fail(ErrorCode::CorruptHeader, where + ": block alignment inconsistent with format");
  }
  if (data_size % block_align != 0) {
    detail::fail(ErrorCode::CorruptHeader, where + ": data size is not a whole number of frames");
  }

  AudioBuffer out;
  out.spec = {channels, static_cast<int>(rate), enc};
  const std::size_t frames = data_size / block_align;
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + f * block_align + c * (bits / 8);
      out.channels[c][f] =
          enc == WavEncoding::kPcm16
              ? static_cast<double>(load_le<std::int16_t>(s)) / 32768.0
              : static_cast<double>(load_le<float>(s));
    }
  }
  return out;
}

inline std::string encode_wav(const AudioBuffer& audio) {
  using detail::append_le;
  const WavSpec& spec = audio.spec;
  detail::check_channels(spec.channels);
  detail::require(static_cast<int>(audio.channels.size()) == spec.channels,
                  ErrorCode::SpecMismatch,
                  "channel vectors differ from the declared channel count");
  detail::require(spec.sample_rate > 0, ErrorCode::SpecMismatch,
                  "sample rate must be positive");
  const std::size_t frames = audio.frames();
  for (const auto& ch : audio.channels) {
    detail::require(ch.size() == frames, ErrorCode::LengthMismatch,
                    "channels differ in length");
  }
  const std::uint16_t bits = spec.encoding == WavEncoding::kPcm16 ? 16 : 32;
  const auto block = static_cast<std::uint16_t>(spec.channels * bits / 8);
  const std::uint64_t data_size = static_cast<std::uint64_t>(frames) * block;
  detail::require(data_size + 36 <= 0xFFFFFFFFu, ErrorCode::IoFailure,
                  "audio too long for a RIFF container");

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(36 + data_size));
  out.append("WAVEfmt ");
  append_le<std::uint32_t>(out, 16);
  append_le<std::uint16_t>(out, spec.encoding == WavEncoding::kPcm16
                                    ? detail::kFormatPcm
                                    : detail::kFormatFloat);
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(spec.channels));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.sample_rate));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.sample_rate) * block);
  append_le<std::uint16_t>(out, block);
  append_le<std::uint16_t>(out, bits);
  out.append("data");
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(data_size));
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& ch : audio.channels) {
      if (spec.encoding == WavEncoding::kPcm16) {
        append_le<std::int16_t>(out, detail::quantize_pcm16(ch[f]));
      } else {
        append_le<float>(out, static_cast<float>(ch[f]));
      }
    }
  }
  return out;
}

inline AudioBuffer read_wav_buffer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) detail::fail(ErrorCode::IoFailure, "read failed for '" + path + "'");
  return decode_wav(bytes, path);
}

inline void write_wav_buffer(const AudioBuffer& audio, const std::string& path) {
  const std::string bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) detail::fail(ErrorCode::IoFailure, "cannot create '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) detail::fail(ErrorCode::IoFailure, "write failed for '" + path + "'");
}

namespace detail {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

inline std::vector<double> scaled(std::span<const double> v, double k) {
  std::vector<double> out(v.begin(), v.end());
  for (double& s : out) s *= k;
  return out;
}

}  // namespace detail

inline AudioSignal to_signal(AudioBuffer audio, bool ambix = false) {
  const int rate = audio.spec.sample_rate;
  auto& ch = audio.channels;
  switch (ch.size()) {
    case 1:
      return MonoSignal(std::move(ch[0]), rate);
    case 2:
      return StereoSignal(std::move(ch[0]), std::move(ch[1]), rate);
    case 4:
      if (ambix) {
        return FoaSignal(detail::scaled(ch[0], 1.0 / detail::kSqrt2),
                         std::move(ch[3]), std::move(ch[1]), std::move(ch[2]),
                         rate);
      }
      return FoaSignal(std::move(ch[0]), std::move(ch[1]), std::move(ch[2]),
                       std::move(ch[3]), rate);
    default:
      detail::check_channels(static_cast<int>(ch.size()));
  }
  detail::fail(ErrorCode::ChannelCountUnsupported, "unreachable");
}

inline AudioBuffer to_buffer(const AudioSignal& signal, WavEncoding encoding,
                             bool ambix = false) {
  AudioBuffer out;
  out.spec.encoding = encoding;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        out.spec.sample_rate = s.sample_rate();
        if constexpr (std::is_same_v<T, MonoSignal>) {
          out.channels = {{s.samples().begin(), s.samples().end()}};
        } else if constexpr (std::is_same_v<T, StereoSignal>) {
          out.channels = {{s.left().begin(), s.left().end()},
                          {s.right().begin(), s.right().end()}};
        } else if (ambix) {
          out.channels = {detail::scaled(s.w(), detail::kSqrt2),
                          {s.y().begin(), s.y().end()},
                          {s.z().begin(), s.z().end()},
                          {s.x().begin(), s.x().end()}};
        } else {
          out.channels = {{s.w().begin(), s.w().end()},
                          {s.x().begin(), s.x().end()},
                          {s.y().begin(), s.y().end()},
                          {s.z().begin(), s.z().end()}};
        }
      },
      signal);
  out.spec.channels = static_cast<int>(out.channels.size());
  return out;
}

inline AudioSignal read_wav(const std::string& path, bool ambix = false) {
  return to_signal(read_wav_buffer(path), ambix);
}

/// Writes `signal` with `spec`; the declared channel count and sample rate
/// must match the signal.
inline void write_wav(const AudioSignal& signal, const std::string& path,
                      const WavSpec& spec, bool ambix = false) {
  AudioBuffer buf = to_buffer(signal, spec.encoding, ambix);
  if (buf.spec.channels != spec.channels || buf.spec.sample_rate != spec.sample_rate) {
    detail::fail(ErrorCode::SpecMismatch,
                 "spec declares " + std::to_string(spec.channels) + " ch @ " +
                     std::to_string(spec.sample_rate) + " Hz, signal has " +
                     std::to_string(buf.spec.channels) + " ch @ " +
                     std::to_string(buf.spec.sample_rate) + " Hz");
  }
  write_wav_buffer(buf, path);
}

template <typename T>
T expect_signal(AudioSignal signal, std::string_view what) {
  if (auto* s = std::get_if<T>(&signal)) return std::move(*s);
  detail::fail(ErrorCode::ChannelCountUnsupported,
               std::string(what) + ": unexpected channel count for this operation");
}

}  // namespace foakit
