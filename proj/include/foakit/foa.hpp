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

// First-order ambisonics signal types, mono/stereo encoders and
// intensity-vector direction-of-arrival estimation.
//
// Channel convention is W, X, Y, Z with W = s / sqrt(2) (no SN3D/N3D
// renormalisation). X points front, Y points left, Z points up.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "foakit/error.hpp"

namespace foakit {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

/// Intensity magnitudes below this are treated as silence by estimate_doa.
inline constexpr double kZeroEnergyEpsilon = 1e-12;

/// Wraps an angle into (-pi, pi]. Angles already inside the interval are
/// returned unchanged.
inline double wrap_angle(double radians) {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Sound-source direction on the sphere. Azimuth is measured in the
/// horizontal plane (0 = front, +pi/2 = left); elevation is positive up.
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth, double elevation) {
    detail::require(std::isfinite(azimuth) && std::isfinite(elevation),
                    ErrorCode::InvalidArgument, "direction must be finite");
    if (elevation < -kHalfPi || elevation > kHalfPi) {
      detail::fail(ErrorCode::OutOfRange, "elevation outside [-pi/2, pi/2]");
    }
    azimuth_ = wrap_angle(azimuth);
    elevation_ = elevation;
  }

  double azimuth() const noexcept { return azimuth_; }
  double elevation() const noexcept { return elevation_; }

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

namespace detail {

inline void check_rate(int sample_rate) {
  require(sample_rate > 0, ErrorCode::InvalidArgument,
          "sample rate must be positive");
}

}  // namespace detail

class MonoSignal {
 public:
  MonoSignal(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    detail::require(!samples_.empty(), ErrorCode::EmptySignal,
                    "mono signal is empty");
    detail::check_rate(sample_rate_);
  }

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

class StereoSignal {
 public:
  StereoSignal(std::vector<double> left, std::vector<double> right,
               int sample_rate)
      : left_(std::move(left)), right_(std::move(right)),
        sample_rate_(sample_rate) {
    detail::require(!left_.empty(), ErrorCode::EmptySignal,
                    "stereo signal is empty");
    detail::require(left_.size() == right_.size(), ErrorCode::LengthMismatch,
                    "stereo channels differ in length");
    detail::check_rate(sample_rate_);
  }

  std::span<const double> left() const noexcept { return left_; }
  std::span<const double> right() const noexcept { return right_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return left_.size(); }

 private:
  std::vector<double> left_;
  std::vector<double> right_;
  int sample_rate_;
};

class FoaSignal {
 public:
  FoaSignal(std::vector<double> w, std::vector<double> x,
            std::vector<double> y, std::vector<double> z, int sample_rate)
      : w_(std::move(w)), x_(std::move(x)), y_(std::move(y)),
        z_(std::move(z)), sample_rate_(sample_rate) {
    detail::require(!w_.empty(), ErrorCode::EmptySignal, "FOA signal is empty");
    detail::require(x_.size() == w_.size() && y_.size() == w_.size() &&
                        z_.size() == w_.size(),
                    ErrorCode::LengthMismatch, "FOA channels differ in length");
    detail::check_rate(sample_rate_);
  }

  std::span<const double> w() const noexcept { return w_; }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> z() const noexcept { return z_; }

  /// Channel by index in W, X, Y, Z order.
  std::span<const double> channel(std::size_t index) const {
    switch (index) {
      case 0: return w_;
      case 1: return x_;
      case 2: return y_;
      case 3: return z_;
      default: detail::fail(ErrorCode::OutOfRange, "FOA channel index > 3");
    }
  }

  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return w_.size(); }

 private:
  std::vector<double> w_, x_, y_, z_;
  int sample_rate_;
};

struct IntensityVector {
  double ix = 0.0;
  double iy = 0.0;
  double iz = 0.0;

  double norm() const { return std::sqrt(ix * ix + iy * iy + iz * iz); }
};

inline FoaSignal spatialize_mono(const MonoSignal& mono, const Direction& dir) {
  const double theta = dir.azimuth();
  const double phi = dir.elevation();
  const double gx = std::cos(theta) * std::cos(phi);
  const double gy = std::sin(theta) * std::cos(phi);
  const double gz = std::sin(phi);

  const std::size_t n = mono.size();
  std::vector<double> w(n), x(n), y(n), z(n);
  const auto s = mono.samples();
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = s[i] / std::numbers::sqrt2;
    x[i] = gx * s[i];
    y[i] = gy * s[i];
    z[i] = gz * s[i];
  }
  return FoaSignal(std::move(w), std::move(x), std::move(y), std::move(z),
                   mono.sample_rate());
}

/// Lifts a two-channel recording into FOA: W = L + R, X = L - R, Y = Z = 0.
inline FoaSignal stereo_to_foa(const StereoSignal& st) {
  const std::size_t n = st.size();
  std::vector<double> w(n), x(n);
  const auto l = st.left();
  const auto r = st.right();
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = l[i] + r[i];
    x[i] = l[i] - r[i];
  }
  return FoaSignal(std::move(w), std::move(x), std::vector<double>(n, 0.0),
                   std::vector<double>(n, 0.0), st.sample_rate());
}

inline IntensityVector intensity_vector(const FoaSignal& foa) {
  const auto w = foa.w();
  const auto x = foa.x();
  const auto y = foa.y();
  const auto z = foa.z();
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < foa.size(); ++i) {
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sz += w[i] * z[i];
  }
  const double n = static_cast<double>(foa.size());
  return {sx / n, sy / n, sz / n};
}

/// Direction of an intensity vector. Azimuth uses atan2 so rear sources
/// are recovered; at zero horizontal magnitude the pole is returned with
/// azimuth 0.
inline Direction direction_from_intensity(const IntensityVector& iv) {
  if (!(iv.norm() >= kZeroEnergyEpsilon)) {
    detail::fail(ErrorCode::ZeroEnergy,
                 "intensity magnitude below 1e-12, direction undefined");
  }
  const double horizontal = std::hypot(iv.ix, iv.iy);
  if (horizontal == 0.0) {
    return Direction(0.0, std::copysign(kHalfPi, iv.iz));
  }
  return Direction(std::atan2(iv.iy, iv.ix), std::atan(iv.iz / horizontal));
}

inline Direction estimate_doa(const FoaSignal& foa) {
  return direction_from_intensity(intensity_vector(foa));
}

}  // namespace foakit
