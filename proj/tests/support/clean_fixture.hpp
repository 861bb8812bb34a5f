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

// Synthetic cleaning manifest. Every entry is generated from a small design
// record (how many windows are quiet, how many frame comparisons move, the
// scores), and the expected verdicts are derived from that record alone.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "foakit/data_pipeline.hpp"

namespace cleanfix {

inline constexpr int kRate = 8000;
inline constexpr std::size_t kWindow = 160;   // 20 ms at 8 kHz
inline constexpr std::size_t kWindows = 50;   // 1 s of audio
inline constexpr std::size_t kKeyFrames = 8;  // frames 0, 8, ..., 56
inline constexpr std::size_t kFrameStride = 8;

struct Design {
  std::string id;
  bool has_audio = true;
  std::size_t quiet_windows = 0;  // of kWindows
  bool has_frames = true;
  bool short_frames = false;      // too few frames to compare
  std::size_t moving = 0;         // of kKeyFrames - 1 comparisons
  std::optional<long long> words;
  std::optional<double> alignment;
};

inline std::vector<Design> designs(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> quiet{0, 10, 44, 45, 46, 48, 50};
  const std::vector<std::size_t> moving{0, 1, 2, 3, 7};
  const std::vector<double> align{0.5, 0.99, 1.0, 1.5, 2.0, 2.5};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<Design> out;
  for (std::size_t i = 0; i < count; ++i) {
    Design d;
    d.id = "clip" + std::to_string(1000 + i);
    d.has_audio = pick(10) != 0;
    d.quiet_windows = quiet[pick(quiet.size())];
    d.has_frames = pick(5) != 0;
    d.short_frames = d.has_frames && pick(10) == 0;
    d.moving = moving[pick(moving.size())];
    if (pick(8) != 0) d.words = static_cast<long long>(pick(10));
    if (pick(8) != 0) d.alignment = align[pick(align.size())];
    out.push_back(d);
  }
  return out;
}

inline foakit::ClipManifestEntry entry(const Design& d) {
  foakit::ClipManifestEntry e;
  e.id = d.id;
  e.audio_path = d.has_audio ? d.id + ".wav" : "";
  if (d.has_frames) e.frames_pattern = d.id + "/*.pgm";
  e.fps = 8.0;
  e.duration = 1.0;
  e.sample_rate = kRate;
  e.word_count = d.words;
  e.alignment_score = d.alignment;
  return e;
}

/// Four channels; quiet windows sit at -40 dBFS, the others peak at -6 dBFS
/// on a single channel. Quiet windows are spread with a stride pattern.
inline foakit::AudioBuffer audio(const Design& d) {
  foakit::AudioBuffer a;
  a.spec = {4, kRate, foakit::WavEncoding::kFloat32};
  a.channels.assign(4, std::vector<double>(kWindow * kWindows, 0.0));
  for (std::size_t w = 0; w < kWindows; ++w) {
    const bool quiet = (w * 7) % kWindows < d.quiet_windows;
    for (std::size_t i = 0; i < kWindow; ++i) {
      const double s = (i % 2 == 0) ? 1.0 : -1.0;
      a.channels[w % 4][w * kWindow + i] = quiet ? 0.01 * s : 0.5 * s;
    }
  }
  return a;
}

/// Key frame k (frame 8k) moves relative to key frame k-1 for the first
/// `moving` comparisons; in-between frames are noise.
inline std::vector<foakit::Frame> frames(const Design& d) {
  const std::size_t n = d.short_frames ? 12 : kKeyFrames * kFrameStride;
  std::vector<foakit::Frame> out;
  double level = 0.25;
  for (std::size_t f = 0; f < n; ++f) {
    if (f % kFrameStride == 0 && f > 0) {
      const std::size_t k = f / kFrameStride;
      if (k <= d.moving) level = level < 0.5 ? 0.75 : 0.25;
    }
    const double v = f % kFrameStride == 0 ? level : std::fmod(0.37 * static_cast<double>(f), 1.0);
    out.emplace_back(4, 8, 1, v);
  }
  return out;
}

inline foakit::ClipLoaders loaders(const std::vector<Design>& ds) {
  auto table = std::make_shared<std::map<std::string, Design>>();
  for (const auto& d : ds) (*table)[d.id] = d;
  foakit::ClipLoaders l;
  l.audio = [table](const foakit::ClipManifestEntry& e) { return audio(table->at(e.id)); };
  l.frames = [table](const foakit::ClipManifestEntry& e) { return frames(table->at(e.id)); };
  return l;
}

/// Expected removal reasons from the design record alone.
inline std::vector<std::string> expected_reasons(const Design& d, double min_alignment = 1.0) {
  std::vector<std::string> r;
  const std::size_t comparisons = kKeyFrames - 1;
  if (d.has_frames && !d.short_frames &&
      static_cast<double>(comparisons - d.moving) / comparisons > 0.85) {
    r.emplace_back("stationary");
  }
  if (d.has_audio && static_cast<double>(d.quiet_windows) / kWindows > 0.90) {
    r.emplace_back("silent");
  }
  if (d.words && *d.words > 5) r.emplace_back("speech");
  if (d.alignment && *d.alignment < min_alignment) r.emplace_back("misaligned");
  return r;
}

}  // namespace cleanfix
