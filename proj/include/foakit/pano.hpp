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

// Equirectangular (ERP) frame handling: square padding, gnomonic
// perspective cuts and frame-difference stationarity.
//
// ERP coordinates: u = (lon / 2pi + 0.5) W, v = (0.5 - lat / pi) H, with
// pixel k covering [k, k + 1). Longitude grows to the right of the image
// and yaw turns the camera the same way; pitch > 0 looks up.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "foakit/error.hpp"
#include "foakit/foa.hpp"
#include "foakit/numeric.hpp"

namespace foakit {

/// H x W x C image with values nominally in [0, 1], stored row-major with
/// interleaved channels.
class Frame {
 public:
  Frame() = default;
  Frame(std::size_t height, std::size_t width, std::size_t channels,
        double fill = 0.0)
      : height_(height), width_(width), channels_(channels),
        pixels_(height * width * channels, fill) {
    validate();
  }
  Frame(std::size_t height, std::size_t width, std::size_t channels,
        std::vector<double> pixels)
      : height_(height), width_(width), channels_(channels),
        pixels_(std::move(pixels)) {
    validate();
    detail::require(pixels_.size() == height_ * width_ * channels_,
                    ErrorCode::ShapeMismatch,
                    "pixel buffer size differs from H*W*C");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  const std::vector<double>& pixels() const noexcept { return pixels_; }
  std::vector<double>& pixels() noexcept { return pixels_; }

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return pixels_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return pixels_[(row * width_ + col) * channels_ + ch];
  }

  bool same_shape(const Frame& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  void validate() const {
    detail::require(height_ >= 1 && width_ >= 1, ErrorCode::InvalidArgument,
                    "frame dimensions must be >= 1");
    detail::require(channels_ == 1 || channels_ == 3, ErrorCode::InvalidArgument,
                    "frames have 1 or 3 channels");
  }

  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> pixels_;
};

struct CameraSpec {
  double yaw = 0.0;
  double pitch = 0.0;
  double hfov = deg_to_rad(120.0);
  std::size_t out_w = 512;
  std::size_t out_h = 512;

  void validate() const {
    detail::require(std::isfinite(yaw) && std::isfinite(pitch),
                    ErrorCode::InvalidArgument, "camera angles must be finite");
    detail::require(hfov > 0.0 && hfov < kPi, ErrorCode::InvalidArgument,
                    "hfov must lie in (0, pi)");
    detail::require(out_w >= 1 && out_h >= 1, ErrorCode::InvalidArgument,
                    "output dimensions must be >= 1");
  }
};

inline void require_erp_aspect(const Frame& f) {
  if (f.width() != 2 * f.height()) {
    detail::fail(ErrorCode::NotErpAspect,
                 "ERP frame must be exactly twice as wide as tall (" +
                     std::to_string(f.width()) + "x" +
                     std::to_string(f.height()) + ")");
  }
}

/// Zero-pads a 2:1 ERP frame to 2H x 2H; odd remainders go below.
inline Frame pad_to_square(const Frame& erp) {
  require_erp_aspect(erp);
  const std::size_t h = erp.height();
  const std::size_t side = erp.width();
  const std::size_t top = (side - h) / 2;
  Frame out(side, side, erp.channels());
  const std::size_t row_len = erp.width() * erp.channels();
  for (std::size_t r = 0; r < h; ++r) {
    std::copy_n(erp.pixels().begin() + static_cast<std::ptrdiff_t>(r * row_len),
                row_len,
                out.pixels().begin() +
                    static_cast<std::ptrdiff_t>((r + top) * row_len));
  }
  return out;
}

struct ErpCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Continuous ERP coordinate seen by output pixel (row, col) of `cam`;
/// u is wrapped into [0, W).
inline ErpCoord perspective_to_erp(const CameraSpec& cam, double row, double col,
                                   std::size_t erp_h, std::size_t erp_w) {
  const double focal =
      0.5 * static_cast<double>(cam.out_w) / std::tan(0.5 * cam.hfov);
  // Camera frame: forward, right, up.
  const double right = col + 0.5 - 0.5 * static_cast<double>(cam.out_w);
  const double up = 0.5 * static_cast<double>(cam.out_h) - (row + 0.5);
  double fwd = focal;

  // Pitch rotates forward towards up, then yaw turns towards the right.
  const double cp = std::cos(cam.pitch), sp = std::sin(cam.pitch);
  const double fwd_p = cp * fwd - sp * up;
  const double up_p = sp * fwd + cp * up;
  const double cy = std::cos(cam.yaw), sy = std::sin(cam.yaw);
  fwd = cy * fwd_p - sy * right;
  const double right_y = sy * fwd_p + cy * right;

  double lon = std::atan2(right_y, fwd);
  if (lon >= kPi) lon -= kTwoPi;
  const double lat = std::atan2(up_p, std::hypot(fwd, right_y));

  const double w = static_cast<double>(erp_w);
  double u = (lon / kTwoPi + 0.5) * w;
  u = std::fmod(u, w);
  if (u < 0.0) u += w;
  const double v = (0.5 - lat / kPi) * static_cast<double>(erp_h);
  return {u, v};
}

/// Bilinear lookup at a continuous ERP coordinate (pixel centres at k + 0.5)
/// with horizontal wraparound and vertical clamping.
inline double sample_erp(const Frame& erp, double u, double v, std::size_t ch) {
  const auto w = static_cast<long>(erp.width());
  const auto h = static_cast<long>(erp.height());
  const double x = u - 0.5;
  const double y = std::clamp(v - 0.5, 0.0, static_cast<double>(h - 1));
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double ax = x - fx;
  const double ay = y - fy;
  auto wrap = [w](long c) { return ((c % w) + w) % w; };
  const long x0 = wrap(static_cast<long>(fx));
  const long x1 = wrap(static_cast<long>(fx) + 1);
  const long y0 = static_cast<long>(fy);
  const long y1 = std::min(y0 + 1, h - 1);
  auto px = [&](long r, long c) {
    return erp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
  };
  // a + t (b - a) returns a exactly when a == b, so flat regions stay flat.
  auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
  const double top = lerp(px(y0, x0), px(y0, x1), ax);
  const double bottom = lerp(px(y1, x0), px(y1, x1), ax);
  return lerp(top, bottom, ay);
}

inline Frame erp_to_perspective(const Frame& erp, const CameraSpec& cam) {
  require_erp_aspect(erp);
  cam.validate();
  Frame out(cam.out_h, cam.out_w, erp.channels());
  for (std::size_t r = 0; r < cam.out_h; ++r) {
    for (std::size_t c = 0; c < cam.out_w; ++c) {
      const ErpCoord p = perspective_to_erp(cam, static_cast<double>(r),
                                            static_cast<double>(c),
                                            erp.height(), erp.width());
      for (std::size_t ch = 0; ch < erp.channels(); ++ch) {
        out.at(r, c, ch) = sample_erp(erp, p.u, p.v, ch);
      }
    }
  }
  return out;
}

enum class CutPreset { kFront, k2Cuts, k4Cuts, k6Cuts };

inline CutPreset parse_cut_preset(std::string_view name) {
  if (name == "front") return CutPreset::kFront;
  if (name == "2cuts") return CutPreset::k2Cuts;
  if (name == "4cuts") return CutPreset::k4Cuts;
  if (name == "6cuts") return CutPreset::k6Cuts;
  detail::fail(ErrorCode::InvalidArgument,
               "unknown cut preset '" + std::string(name) + "'");
}

struct NamedView {
  std::string name;
  double yaw;
  double pitch;
};

/// Camera orientations for a preset, in output order.
inline std::vector<NamedView> preset_views(CutPreset preset) {
  std::vector<NamedView> v{{"front", 0.0, 0.0}};
  if (preset == CutPreset::k2Cuts) v.push_back({"back", kPi, 0.0});
  if (preset == CutPreset::k4Cuts || preset == CutPreset::k6Cuts) {
    v.push_back({"right", kHalfPi, 0.0});
    v.push_back({"back", kPi, 0.0});
    v.push_back({"left", 1.5 * kPi, 0.0});
  }
  if (preset == CutPreset::k6Cuts) {
    v.push_back({"up", 0.0, kHalfPi});
    v.push_back({"down", 0.0, -kHalfPi});
  }
  return v;
}

inline std::vector<Frame> make_fov_cuts(const Frame& erp, CutPreset preset,
                                        double hfov, std::size_t out_w,
                                        std::size_t out_h, std::size_t jobs = 1) {
  const auto views = preset_views(preset);
  std::vector<Frame> out(views.size());
  parallel_for(views.size(), jobs, [&](std::size_t i) {
    out[i] = erp_to_perspective(
        erp, CameraSpec{views[i].yaw, views[i].pitch, hfov, out_w, out_h});
  });
  return out;
}

inline double frame_mse(const Frame& a, const Frame& b) {
  detail::require(a.same_shape(b), ErrorCode::ShapeMismatch,
                  "frames differ in shape");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    const double d = a.pixels()[i] - b.pixels()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels().size());
}

struct StationarityConfig {
  /// Frames between compared pairs (1 s at 8 fps).
  std::size_t interval = 8;
  double mse_threshold = 1e-3;
  double ratio_threshold = 0.85;
};

struct StationarityVerdict {
  bool stationary = false;
  double ratio = 0.0;
  std::size_t comparisons = 0;
};

/// Compares frames i and i + k for i = 0, k, 2k, ...; a pair is stationary
/// when its MSE is below the threshold, the clip when the stationary share
/// exceeds the ratio threshold.
inline StationarityVerdict stationarity_verdict(std::span<const Frame> frames,
                                                const StationarityConfig& cfg) {
  detail::require(cfg.interval >= 1, ErrorCode::InvalidArgument,
                  "comparison interval must be >= 1");
  StationarityVerdict out;
  std::size_t still = 0;
  for (std::size_t i = 0; i + cfg.interval < frames.size(); i += cfg.interval) {
    ++out.comparisons;
    if (frame_mse(frames[i], frames[i + cfg.interval]) < cfg.mse_threshold) {
      ++still;
    }
  }
  if (out.comparisons < 2) {
    detail::fail(ErrorCode::TooFewFrames,
                 "need at least two frame comparisons, got " +
                     std::to_string(out.comparisons));
  }
  out.ratio = static_cast<double>(still) / static_cast<double>(out.comparisons);
  out.stationary = out.ratio > cfg.ratio_threshold;
  return out;
}

}  // namespace foakit
