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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foakit {

/// Every failure the library reports. The enumerator names double as the
/// machine-readable error names printed by the command-line tool.
enum class ErrorCode {
  InvalidArgument,
  ZeroEnergy,
  OutOfRange,
  DimensionMismatch,
  NumericalFailure,
  SupportViolation,
  LengthMismatch,
  EmptyBatch,
  ShapeMismatch,
  InfeasibleSpec,
  NoMaskedFrames,
  DivergenceDetected,
  ShrinkNotSupported,
  NotErpAspect,
  TooFewFrames,
  EmptySignal,
  MissingScore,
  ManifestParseError,
  ParseError,
  UnsupportedFormat,
  CorruptHeader,
  ChannelCountUnsupported,
  IoFailure,
  SpecMismatch,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroEnergy: return "ZeroEnergy";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::NoMaskedFrames: return "NoMaskedFrames";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::ShrinkNotSupported: return "ShrinkNotSupported";
    case ErrorCode::NotErpAspect: return "NotErpAspect";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::ManifestParseError: return "ManifestParseError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::ChannelCountUnsupported: return "ChannelCountUnsupported";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace detail
}  // namespace foakit
