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

// Clip manifests: one JSON object per line (JSONL). Keys: id, audio_path,
// frames_pattern, fps, duration, sample_rate, labels, word_count,
// alignment_score. Blank lines are skipped; unknown keys are ignored.

#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "foakit/error.hpp"

namespace foakit {

struct ClipManifestEntry {
  std::string id;
  std::string audio_path;
  std::optional<std::string> frames_pattern;
  double fps = 8.0;
  double duration = 0.0;
  int sample_rate = 44100;
  std::vector<std::string> labels;
  std::optional<long long> word_count;
  std::optional<double> alignment_score;
};

namespace detail {

[[noreturn]] inline void manifest_fail(std::size_t line, const std::string& msg) {
  fail(ErrorCode::ManifestParseError, "line " + std::to_string(line) + ": " + msg);
}

inline ClipManifestEntry entry_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) manifest_fail(line, "record is not a JSON object");
  ClipManifestEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.audio_path = j.value("audio_path", std::string());
    if (j.contains("frames_pattern") && !j["frames_pattern"].is_null()) {
      e.frames_pattern = j["frames_pattern"].get<std::string>();
    }
    e.fps = j.value("fps", 8.0);
    e.duration = j.at("duration").get<double>();
    e.sample_rate = j.value("sample_rate", 44100);
    e.labels = j.value("labels", std::vector<std::string>{});
    if (j.contains("word_count") && !j["word_count"].is_null()) {
      e.word_count = j["word_count"].get<long long>();
    }
    if (j.contains("alignment_score") && !j["alignment_score"].is_null()) {
      e.alignment_score = j["alignment_score"].get<double>();
    }
  } catch (const nlohmann::json::exception& ex) {
    manifest_fail(line, ex.what());
  }
  if (e.id.empty()) manifest_fail(line, "empty id");
  if (!(e.duration > 0.0) || !std::isfinite(e.duration)) {
    manifest_fail(line, "duration must be > 0");
  }
  if (!(e.fps > 0.0)) manifest_fail(line, "fps must be > 0");
  if (e.sample_rate <= 0) manifest_fail(line, "sample_rate must be > 0");
  if (e.word_count && *e.word_count < 0) manifest_fail(line, "negative word_count");
  if (e.alignment_score && !std::isfinite(*e.alignment_score)) {
    manifest_fail(line, "alignment_score must be finite");
  }
  return e;
}

}  // namespace detail

inline nlohmann::json entry_to_json(const ClipManifestEntry& e) {
  nlohmann::json j{{"id", e.id},         {"audio_path", e.audio_path},
                   {"fps", e.fps},       {"duration", e.duration},
                   {"sample_rate", e.sample_rate}, {"labels", e.labels}};
  if (e.frames_pattern) j["frames_pattern"] = *e.frames_pattern;
  if (e.word_count) j["word_count"] = *e.word_count;
  if (e.alignment_score) j["alignment_score"] = *e.alignment_score;
  return j;
}

inline std::vector<ClipManifestEntry> parse_manifest(std::istream& in) {
  std::vector<ClipManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      detail::manifest_fail(lineno, ex.what());
    }
    ClipManifestEntry e = detail::entry_from_json(j, lineno);
    if (!ids.insert(e.id).second) detail::manifest_fail(lineno, "duplicate id '" + e.id + "'");
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ClipManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return parse_manifest(in);
}

inline void write_manifest(std::ostream& out, const std::vector<ClipManifestEntry>& entries) {
  for (const auto& e : entries) out << entry_to_json(e).dump() << '\n';
}

}  // namespace foakit
