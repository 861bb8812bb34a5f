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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "foakit/pano.hpp"

namespace foakit {
namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no foakit::Error thrown";
  return ErrorCode::InvalidArgument;
}

Frame noise_erp(std::size_t h, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Frame f(h, 2 * h, c);
  for (double& v : f.pixels()) v = u(rng);
  return f;
}

/// Longitude of equator-row pixel `col` for a level camera: the pinhole
/// offset angle added to the yaw, in [0, 2pi).
double level_longitude(double yaw, double col, std::size_t out_w, double hfov) {
  const double focal = 0.5 * out_w / std::tan(0.5 * hfov);
  const double lon = yaw + std::atan((col + 0.5 - 0.5 * out_w) / focal);
  return std::fmod(std::fmod(lon + kPi, kTwoPi) + kTwoPi, kTwoPi);
}

TEST(Frame, Validation) {
  EXPECT_EQ(code_of([] { Frame(2, 2, 2); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Frame(0, 2, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Frame(2, 2, 1, std::vector<double>(3)); }), ErrorCode::ShapeMismatch);
}

TEST(PadToSquare, CentresVertically) {
  Frame erp(3, 6, 1, 1.0);
  const Frame sq = pad_to_square(erp);
  ASSERT_EQ(sq.height(), 6u);
  ASSERT_EQ(sq.width(), 6u);
  // 3 padding rows: 1 above, 2 below.
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(sq.at(0, c, 0), 0.0);
    EXPECT_EQ(sq.at(1, c, 0), 1.0);
    EXPECT_EQ(sq.at(3, c, 0), 1.0);
    EXPECT_EQ(sq.at(4, c, 0), 0.0);
    EXPECT_EQ(sq.at(5, c, 0), 0.0);
  }
  EXPECT_EQ(code_of([] { pad_to_square(Frame(3, 5, 1)); }), ErrorCode::NotErpAspect);
}

TEST(Perspective, ConstantFrameIsPixelExact) {
  for (double yaw : {0.0, 1.0, kPi, 5.5}) {
    for (double pitch : {0.0, 0.7, kHalfPi, -kHalfPi}) {
      const Frame erp(16, 32, 3, 0.3);
      const Frame out = erp_to_perspective(erp, CameraSpec{yaw, pitch, deg_to_rad(120), 17, 9});
      for (double v : out.pixels()) ASSERT_EQ(v, 0.3);
    }
  }
}

TEST(Perspective, CentrePixelLooksForward) {
  // Odd output size puts a pixel centre on the optical axis.
  const CameraSpec cam{0.0, 0.0, deg_to_rad(90), 33, 33};
  const ErpCoord p = perspective_to_erp(cam, 16, 16, 100, 200);
  EXPECT_NEAR(p.u, 100.0, 0.5);
  EXPECT_NEAR(p.v, 50.0, 0.5);
  EXPECT_NEAR(p.u, 100.0, 1e-9);
  EXPECT_NEAR(p.v, 50.0, 1e-9);
}

TEST(Perspective, EquatorRowMatchesPinholeFormula) {
  const double hfov = deg_to_rad(100);
  for (double yaw : {0.0, 0.5, kPi, 4.0}) {
    const CameraSpec cam{yaw, 0.0, hfov, 40, 21};
    for (double col = 0; col < 40; col += 3) {
      const ErpCoord p = perspective_to_erp(cam, 10, col, 64, 128);
      const double u = level_longitude(yaw, col, 40, hfov) / kTwoPi * 128;
      EXPECT_NEAR(std::fmod(p.u - u + 192.0, 128.0) - 64.0, 0.0, 1e-9) << yaw << " " << col;
      EXPECT_NEAR(p.v, 32.0, 1e-9);
      EXPECT_GE(p.u, 0.0);
      EXPECT_LT(p.u, 128.0);
    }
  }
}

TEST(Perspective, PitchUpReachesPole) {
  const CameraSpec cam{0.0, kHalfPi, deg_to_rad(90), 33, 33};
  EXPECT_NEAR(perspective_to_erp(cam, 16, 16, 100, 200).v, 0.0, 1e-9);
  const CameraSpec down{0.0, -kHalfPi, deg_to_rad(90), 33, 33};
  EXPECT_NEAR(perspective_to_erp(down, 16, 16, 100, 200).v, 100.0, 1e-9);
  // Upper output rows look further up.
  const CameraSpec tilt{0.0, 0.3, deg_to_rad(90), 33, 33};
  EXPECT_LT(perspective_to_erp(tilt, 0, 16, 100, 200).v, perspective_to_erp(tilt, 32, 16, 100, 200).v);
}

TEST(Perspective, SeamWrapsAtYawPi) {
  // Left half 0, right half 1: looking back, the left of the view sees the
  // right edge of the ERP and the right of the view sees the left edge.
  Frame erp(32, 64, 1);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 32; c < 64; ++c) erp.at(r, c, 0) = 1.0;
  }
  const Frame out = erp_to_perspective(erp, CameraSpec{kPi, 0.0, deg_to_rad(90), 20, 10});
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_EQ(out.at(r, 2, 0), 1.0);
    EXPECT_EQ(out.at(r, 17, 0), 0.0);
  }
}

TEST(Perspective, YawPiEqualsHalfTurnRoll) {
  const Frame erp = noise_erp(24, 1, 5);
  Frame rolled(24, 48, 1);
  for (std::size_t r = 0; r < 24; ++r) {
    for (std::size_t c = 0; c < 48; ++c) rolled.at(r, (c + 24) % 48, 0) = erp.at(r, c, 0);
  }
  const Frame a = erp_to_perspective(erp, CameraSpec{kPi, 0.2, deg_to_rad(120), 15, 11});
  const Frame b = erp_to_perspective(rolled, CameraSpec{0.0, 0.2, deg_to_rad(120), 15, 11});
  for (std::size_t i = 0; i < a.pixels().size(); ++i) EXPECT_NEAR(a.pixels()[i], b.pixels()[i], 1e-9);
}

TEST(Perspective, ChannelsAreIndependent) {
  const Frame erp = noise_erp(8, 3, 6);
  const Frame out = erp_to_perspective(erp, CameraSpec{0.4, -0.1, deg_to_rad(80), 6, 5});
  Frame g(8, 16, 1);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 16; ++c) g.at(r, c, 0) = erp.at(r, c, 1);
  }
  const Frame mono = erp_to_perspective(g, CameraSpec{0.4, -0.1, deg_to_rad(80), 6, 5});
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(out.at(r, c, 1), mono.at(r, c, 0));
  }
}

TEST(Perspective, RejectsBadCamera) {
  const Frame erp(4, 8, 1);
  EXPECT_EQ(code_of([&] { erp_to_perspective(erp, CameraSpec{0, 0, kPi, 4, 4}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { erp_to_perspective(Frame(4, 4, 1), CameraSpec{}); }), ErrorCode::NotErpAspect);
}

TEST(Cuts, PresetCountsAndOrder) {
  EXPECT_EQ(preset_views(CutPreset::kFront).size(), 1u);
  EXPECT_EQ(preset_views(CutPreset::k2Cuts).size(), 2u);
  EXPECT_EQ(preset_views(CutPreset::k4Cuts).size(), 4u);
  const auto six = preset_views(CutPreset::k6Cuts);
  ASSERT_EQ(six.size(), 6u);
  EXPECT_EQ(six[4].name, "up");
  EXPECT_EQ(six[5].pitch, -kHalfPi);
  EXPECT_EQ(parse_cut_preset("6cuts"), CutPreset::k6Cuts);
  EXPECT_EQ(code_of([] { parse_cut_preset("8cuts"); }), ErrorCode::InvalidArgument);
}

TEST(Cuts, JobCountDoesNotChangeOutput) {
  const Frame erp = noise_erp(16, 3, 7);
  const auto a = make_fov_cuts(erp, CutPreset::k6Cuts, deg_to_rad(120), 12, 12, 1);
  const auto b = make_fov_cuts(erp, CutPreset::k6Cuts, deg_to_rad(120), 12, 12, 4);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a, b);
}

std::vector<Frame> clip(std::size_t n, std::size_t moving_pairs) {
  // Key frames every 8; the first `moving_pairs` comparisons see a change.
  std::vector<Frame> out;
  double level = 0.2;
  for (std::size_t f = 0; f < n; ++f) {
    if (f % 8 == 0 && f > 0 && f / 8 <= moving_pairs) level = 1.0 - level;
    out.emplace_back(2, 4, 1, f % 8 == 0 ? level : 0.5);
  }
  return out;
}

TEST(Stationarity, RatioThresholdIsStrict) {
  const StationarityConfig cfg;
  // 11 key frames -> 10 comparisons; 9 still -> 0.9 > 0.85.
  const StationarityVerdict v = stationarity_verdict(clip(81, 1), cfg);
  EXPECT_EQ(v.comparisons, 10u);
  EXPECT_DOUBLE_EQ(v.ratio, 0.9);
  EXPECT_TRUE(v.stationary);
  // 20 comparisons, 17 still -> exactly 0.85, not stationary.
  const StationarityVerdict edge = stationarity_verdict(clip(161, 3), cfg);
  EXPECT_EQ(edge.comparisons, 20u);
  EXPECT_DOUBLE_EQ(edge.ratio, 0.85);
  EXPECT_FALSE(edge.stationary);
}

TEST(Stationarity, Errors) {
  EXPECT_EQ(code_of([] { stationarity_verdict(clip(16, 0), {}); }), ErrorCode::TooFewFrames);
  EXPECT_NO_THROW(stationarity_verdict(clip(17, 0), {}));
  std::vector<Frame> mixed{Frame(2, 2, 1), Frame(2, 2, 1), Frame(2, 3, 1)};
  EXPECT_EQ(code_of([&] { stationarity_verdict(mixed, StationarityConfig{1}); }), ErrorCode::ShapeMismatch);
}

}  // namespace
}  // namespace foakit
