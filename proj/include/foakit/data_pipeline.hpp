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

// Dataset cleaning over clip manifests: stationary video, silent audio,
// speech-heavy clips and poorly aligned clips are removed, in that order.
// Every comparison is strict ("below", "exceeds"), so boundary values keep.

#pragma once

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "foakit/audio_io.hpp"
#include "foakit/error.hpp"
#include "foakit/image_io.hpp"
#include "foakit/manifest.hpp"
#include "foakit/numeric.hpp"
#include "foakit/pano.hpp"

namespace foakit {

/// Alignment threshold of the stricter cleaning preset.
inline constexpr double kStrictAlignment = 2.0;

struct FilterThresholds {
  double silence_dbfs = -35.0;
  double silence_ratio = 0.90;
  double stationary_ratio = 0.85;
  long long max_words = 5;
  double min_alignment = 1.0;
  double window_ms = 20.0;
  /// Hop between silence windows; 0 means hop = window.
  double hop_ms = 0.0;
  double stationary_mse = 1e-3;
  /// Seconds between compared frames; converted with each entry's fps.
  double stationary_interval_s = 1.0;

  void validate() const {
    detail::require(silence_ratio >= 0.0 && silence_ratio <= 1.0 &&
                        stationary_ratio >= 0.0 && stationary_ratio <= 1.0,
                    ErrorCode::InvalidArgument, "ratios must lie in [0, 1]");
    detail::require(window_ms > 0.0 && hop_ms >= 0.0, ErrorCode::InvalidArgument,
                    "window_ms must be > 0 and hop_ms >= 0");
    detail::require(stationary_mse > 0.0 && stationary_interval_s > 0.0,
                    ErrorCode::InvalidArgument,
                    "stationarity threshold and interval must be > 0");
    detail::require(max_words >= 0, ErrorCode::InvalidArgument, "max_words must be >= 0");
  }
};

inline constexpr double kSilentWindowDbfs = -std::numeric_limits<double>::infinity();

/// Peak level per window across all channels, 20 log10(max |x|). Windows
/// are non-overlapping unless hop_ms is given; a trailing partial window is
/// dropped unless the whole signal is shorter than one window.
inline std::vector<double> window_dbfs(std::span<const std::vector<double>> channels,
                                       double window_ms, int sample_rate,
                                       double hop_ms = 0.0) {
  detail::require(!channels.empty() && !channels.front().empty(),
                  ErrorCode::EmptySignal, "signal is empty");
  detail::require(sample_rate > 0, ErrorCode::InvalidArgument, "sample rate must be > 0");
  detail::require(window_ms * sample_rate >= 1000.0, ErrorCode::InvalidArgument,
                  "window shorter than one sample");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    detail::require(ch.size() == n, ErrorCode::LengthMismatch, "channels differ in length");
  }
  const auto win = static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
  const std::size_t hop =
      hop_ms > 0.0 ? std::max<std::size_t>(
                         1, static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0)))
                   : win;
  std::vector<double> out;
  auto level = [&](std::size_t begin, std::size_t end) {
    double peak = 0.0;
    for (const auto& ch : channels) {
      for (std::size_t i = begin; i < end; ++i) peak = std::max(peak, std::fabs(ch[i]));
    }
    return peak > 0.0 ? 20.0 * std::log10(peak) : kSilentWindowDbfs;
  };
  if (n < win) {
    out.push_back(level(0, n));
    return out;
  }
  for (std::size_t start = 0; start + win <= n; start += hop) {
    out.push_back(level(start, start + win));
  }
  return out;
}

struct SilenceVerdict {
  bool silent = false;
  double ratio = 0.0;
  std::size_t windows = 0;
};

inline SilenceVerdict silence_verdict(std::span<const std::vector<double>> channels,
                                      int sample_rate, const FilterThresholds& th) {
  const auto levels = window_dbfs(channels, th.window_ms, sample_rate, th.hop_ms);
  const auto quiet = std::count_if(levels.begin(), levels.end(),
                                   [&](double d) { return d < th.silence_dbfs; });
  SilenceVerdict v;
  v.windows = levels.size();
  v.ratio = static_cast<double>(quiet) / static_cast<double>(levels.size());
  v.silent = v.ratio > th.silence_ratio;
  return v;
}

enum class FilterDecision { kKeep, kRemove };

inline FilterDecision speech_filter(const ClipManifestEntry& e, long long max_words = 5) {
  if (!e.word_count) {
    detail::fail(ErrorCode::MissingScore, "entry '" + e.id + "' has no word_count");
  }
  return *e.word_count > max_words ? FilterDecision::kRemove : FilterDecision::kKeep;
}

inline FilterDecision alignment_filter(const ClipManifestEntry& e, double min_alignment) {
  if (!e.alignment_score) {
    detail::fail(ErrorCode::MissingScore, "entry '" + e.id + "' has no alignment_score");
  }
  return *e.alignment_score < min_alignment ? FilterDecision::kRemove
                                            : FilterDecision::kKeep;
}

struct ClipSpan {
  std::size_t index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::size_t start_sample = 0;
  std::size_t sample_count = 0;
};

/// Consecutive [10k, 10k + 10) second spans; the remainder is dropped.
inline std::vector<ClipSpan> segment_clips(const ClipManifestEntry& e,
                                           double clip_seconds = 10.0) {
  detail::require(e.duration > 0.0, ErrorCode::InvalidArgument, "duration must be > 0");
  detail::require(clip_seconds > 0.0, ErrorCode::InvalidArgument, "clip length must be > 0");
  const auto count = static_cast<std::size_t>(std::floor(e.duration / clip_seconds));
  const auto samples =
      static_cast<std::size_t>(std::llround(clip_seconds * e.sample_rate));
  std::vector<ClipSpan> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({k, static_cast<double>(k) * clip_seconds,
                   static_cast<double>(k + 1) * clip_seconds, k * samples, samples});
  }
  return out;
}

/// Sources of clip content. Tests substitute synthetic providers; the
/// defaults read files relative to a base directory.
struct ClipLoaders {
  std::function<AudioBuffer(const ClipManifestEntry&)> audio;
  std::function<std::vector<Frame>(const ClipManifestEntry&)> frames;
};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() || base.empty()) ? p : (base / path).string();
}

/// Sorted matches of a shell glob.
inline std::vector<std::string> glob_paths(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) fail(ErrorCode::IoFailure, "glob failed for '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline ClipLoaders file_loaders(const std::filesystem::path& base_dir) {
  ClipLoaders l;
  l.audio = [base_dir](const ClipManifestEntry& e) {
    return read_wav_buffer(detail::resolve_path(base_dir, e.audio_path));
  };
  l.frames = [base_dir](const ClipManifestEntry& e) {
    const auto paths = detail::glob_paths(detail::resolve_path(base_dir, *e.frames_pattern));
    if (paths.empty()) {
      detail::fail(ErrorCode::IoFailure,
                   "frames_pattern '" + *e.frames_pattern + "' matched no files");
    }
    std::vector<Frame> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths) frames.push_back(load_frame(p));
    return frames;
  };
  return l;
}

/// Removal reasons, in evaluation order.
inline constexpr const char* kReasonStationary = "stationary";
inline constexpr const char* kReasonSilent = "silent";
inline constexpr const char* kReasonSpeech = "speech";
inline constexpr const char* kReasonMisaligned = "misaligned";

struct EntryOutcome {
  std::string id;
  std::vector<std::string> reasons;
  /// "<filter>:skipped" when inputs are absent, "<filter>:unscored" when an
  /// external score is missing.
  std::vector<std::string> notes;
  std::optional<double> stationary_ratio;
  std::optional<double> silent_ratio;

  bool kept() const { return reasons.empty(); }
};

struct FilterReport {
  std::vector<EntryOutcome> entries;  // manifest order

  std::vector<std::string> kept() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
      if (e.kept()) out.push_back(e.id);
    }
    return out;
  }
  std::map<std::string, std::vector<std::string>> removed() const {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& e : entries) {
      if (!e.kept()) out[e.id] = e.reasons;
    }
    return out;
  }
  /// Entries flagged per reason, plus "unscored"/"skipped" note counts.
  std::map<std::string, std::size_t> counts() const {
    std::map<std::string, std::size_t> out{{kReasonStationary, 0},
                                           {kReasonSilent, 0},
                                           {kReasonSpeech, 0},
                                           {kReasonMisaligned, 0},
                                           {"unscored", 0},
                                           {"skipped", 0}};
    for (const auto& e : entries) {
      for (const auto& r : e.reasons) ++out[r];
      for (const auto& n : e.notes) {
        ++out[n.ends_with(":unscored") ? "unscored" : "skipped"];
      }
    }
    return out;
  }
};

inline EntryOutcome evaluate_entry(const ClipManifestEntry& e, const FilterThresholds& th,
                                   const ClipLoaders& loaders) {
  EntryOutcome o;
  o.id = e.id;

  if (e.frames_pattern && loaders.frames) {
    const std::vector<Frame> frames = loaders.frames(e);
    StationarityConfig cfg;
    cfg.interval = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(th.stationary_interval_s * e.fps)));
    cfg.mse_threshold = th.stationary_mse;
    cfg.ratio_threshold = th.stationary_ratio;
    try {
      const StationarityVerdict v = stationarity_verdict(frames, cfg);
      o.stationary_ratio = v.ratio;
      if (v.stationary) o.reasons.emplace_back(kReasonStationary);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::TooFewFrames) throw;
      o.notes.emplace_back("stationary:skipped");
    }
  } else {
    o.notes.emplace_back("stationary:skipped");
  }

  if (!e.audio_path.empty() && loaders.audio) {
    const AudioBuffer audio = loaders.audio(e);
    const SilenceVerdict v = silence_verdict(audio.channels, audio.spec.sample_rate, th);
    o.silent_ratio = v.ratio;
    if (v.silent) o.reasons.emplace_back(kReasonSilent);
  } else {
    o.notes.emplace_back("silent:skipped");
  }

  if (e.word_count) {
    if (speech_filter(e, th.max_words) == FilterDecision::kRemove) {
      o.reasons.emplace_back(kReasonSpeech);
    }
  } else {
    o.notes.emplace_back("speech:unscored");
  }

  if (e.alignment_score) {
    if (alignment_filter(e, th.min_alignment) == FilterDecision::kRemove) {
      o.reasons.emplace_back(kReasonMisaligned);
    }
  } else {
    o.notes.emplace_back("alignment:unscored");
  }
  return o;
}

/// Evaluates every entry against every applicable filter. The report keeps
/// manifest order whatever the number of jobs.
inline FilterReport run_pipeline(std::span<const ClipManifestEntry> manifest,
                                 const FilterThresholds& th, const ClipLoaders& loaders,
                                 std::size_t jobs = 1) {
  th.validate();
  FilterReport report;
  report.entries.resize(manifest.size());
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    report.entries[i] = evaluate_entry(manifest[i], th, loaders);
  });
  return report;
}

inline nlohmann::json outcome_to_json(const EntryOutcome& o) {
  nlohmann::json j{{"id", o.id}, {"kept", o.kept()}, {"reasons", o.reasons}, {"notes", o.notes}};
  j["stationary_ratio"] = o.stationary_ratio ? nlohmann::json(*o.stationary_ratio) : nlohmann::json();
  j["silent_ratio"] = o.silent_ratio ? nlohmann::json(*o.silent_ratio) : nlohmann::json();
  return j;
}

/// One JSON line per entry followed by a {"summary": ...} line.
inline void write_report(std::ostream& out, const FilterReport& r) {
  for (const auto& o : r.entries) out << outcome_to_json(o).dump() << '\n';
  nlohmann::json summary{{"entries", r.entries.size()}, {"kept", r.kept().size()},
                         {"removed", r.removed().size()}, {"counts", r.counts()}};
  out << nlohmann::json{{"summary", summary}}.dump() << '\n';
}

inline void print_report_table(std::ostream& out, const FilterReport& r) {
  out << std::left << std::setw(24) << "id" << std::setw(8) << "kept" << "reasons\n";
  for (const auto& o : r.entries) {
    std::string reasons;
    for (const auto& s : o.reasons) reasons += (reasons.empty() ? "" : ",") + s;
    out << std::left << std::setw(24) << o.id << std::setw(8) << (o.kept() ? "yes" : "no")
        << (reasons.empty() ? "-" : reasons) << '\n';
  }
}

}  // namespace foakit
