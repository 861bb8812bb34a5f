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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "foakit/foa.hpp"
#include "support/oracles.hpp"

namespace foakit {
namespace {

MonoSignal noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> s(n);
  for (double& v : s) v = g(rng);
  return MonoSignal(std::move(s), 16000);
}

TEST(Direction, WrapsAzimuthAndRejectsBadElevation) {
  EXPECT_NEAR(Direction(3 * kPi / 2, 0.0).azimuth(), -kHalfPi, 1e-15);
  EXPECT_DOUBLE_EQ(Direction(kPi, 0.0).azimuth(), kPi);
  EXPECT_DOUBLE_EQ(Direction(-kPi, 0.0).azimuth(), kPi);
  EXPECT_THROW(Direction(0.0, kHalfPi + 1e-9), Error);
  try {
    Direction(0.0, 2.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(Signals, ValidateShape) {
  EXPECT_THROW(MonoSignal({}, 8000), Error);
  try {
    StereoSignal({1.0, 2.0}, {1.0}, 8000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    FoaSignal({}, {}, {}, {}, 8000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySignal);
  }
}

TEST(Spatialize, FrontUnitImpulse) {
  const FoaSignal f = spatialize_mono(MonoSignal({1.0}, 8000), Direction(0.0, 0.0));
  EXPECT_DOUBLE_EQ(f.w()[0], 1.0 / std::numbers::sqrt2);
  EXPECT_DOUBLE_EQ(f.x()[0], 1.0);
  EXPECT_DOUBLE_EQ(f.y()[0], 0.0);
  EXPECT_DOUBLE_EQ(f.z()[0], 0.0);
}

TEST(Spatialize, LeftIsPositiveY) {
  const FoaSignal f = spatialize_mono(MonoSignal({1.0}, 8000), Direction(kHalfPi, 0.0));
  EXPECT_NEAR(f.x()[0], 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(f.y()[0], 1.0);
}

TEST(Spatialize, ZeroInputGivesZeroEnergy) {
  const FoaSignal f = spatialize_mono(MonoSignal({0.0, 0.0, 0.0}, 8000), Direction(1.0, 0.2));
  try {
    estimate_doa(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroEnergy);
  }
}

TEST(StereoToFoa, SumAndDifference) {
  const FoaSignal f = stereo_to_foa(StereoSignal({0.5, 1.0}, {0.25, -1.0}, 8000));
  EXPECT_DOUBLE_EQ(f.w()[0], 0.75);
  EXPECT_DOUBLE_EQ(f.x()[0], 0.25);
  EXPECT_DOUBLE_EQ(f.w()[1], 0.0);
  EXPECT_DOUBLE_EQ(f.x()[1], 2.0);
  EXPECT_DOUBLE_EQ(f.y()[0], 0.0);
  EXPECT_DOUBLE_EQ(f.z()[1], 0.0);
}

TEST(StereoToFoa, IntensityFollowsPowerDifference) {
  const FoaSignal f = stereo_to_foa(StereoSignal({0.3, -0.2}, {0.1, 0.4}, 8000));
  // W = L + R, X = L - R: the intensity sign follows L^2 - R^2.
  const IntensityVector iv = intensity_vector(f);
  EXPECT_NEAR(iv.ix, ((0.09 - 0.01) + (0.04 - 0.16)) / 2.0, 1e-15);
}

TEST(Intensity, ClosedFormForImpulse) {
  // One sample s at (theta, phi): I = (s^2/sqrt2) * unit vector.
  const double th = 0.7, ph = -0.3;
  const FoaSignal f = spatialize_mono(MonoSignal({2.0}, 8000), Direction(th, ph));
  const IntensityVector iv = intensity_vector(f);
  const auto u = oracle::unit_vector(th, ph);
  const double k = 4.0 / std::numbers::sqrt2;
  EXPECT_NEAR(iv.ix, k * u[0], 1e-14);
  EXPECT_NEAR(iv.iy, k * u[1], 1e-14);
  EXPECT_NEAR(iv.iz, k * u[2], 1e-14);
}

TEST(Doa, PoleTieBreak) {
  const Direction up = direction_from_intensity({0.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(up.azimuth(), 0.0);
  EXPECT_DOUBLE_EQ(up.elevation(), kHalfPi);
  const Direction down = direction_from_intensity({0.0, 0.0, -3.0});
  EXPECT_DOUBLE_EQ(down.elevation(), -kHalfPi);
}

TEST(Doa, RearSourceUsesFullCircle) {
  const FoaSignal f = spatialize_mono(noise(256, 1), Direction(kPi, 0.0));
  const Direction d = estimate_doa(f);
  EXPECT_NEAR(oracle::circular_distance(d.azimuth(), kPi), 0.0, 1e-12);
}

TEST(Doa, RoundTripRandomDirections) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> az(-kPi, kPi);
  std::uniform_real_distribution<double> el(-kHalfPi + 1e-3, kHalfPi - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const double th = az(rng), ph = el(rng);
    const Direction d = estimate_doa(spatialize_mono(noise(64, i), Direction(th, ph)));
    EXPECT_LT(oracle::circular_distance(d.azimuth(), th), 1e-9);
    EXPECT_LT(std::fabs(d.elevation() - ph), 1e-9);
  }
}

TEST(Doa, AmplitudeScalingLeavesDirectionUnchanged) {
  const MonoSignal s = noise(128, 9);
  std::vector<double> scaled(s.samples().begin(), s.samples().end());
  for (double& v : scaled) v *= 1e-3;
  const Direction dir(-2.0, 0.4);
  const Direction a = estimate_doa(spatialize_mono(s, dir));
  const Direction b = estimate_doa(spatialize_mono(MonoSignal(scaled, 16000), dir));
  EXPECT_NEAR(a.azimuth(), b.azimuth(), 1e-12);
  EXPECT_NEAR(a.elevation(), b.elevation(), 1e-12);
}

}  // namespace
}  // namespace foakit
