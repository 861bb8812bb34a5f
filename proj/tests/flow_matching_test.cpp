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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "foakit/flow_matching.hpp"

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

LatentSeq filled(Eigen::Index t, Eigen::Index d, double v) {
  return LatentSeq(RowMatrix::Constant(t, d, v));
}

TEST(Interpolate, EndpointsAndMidpoint) {
  Rng rng(1);
  const LatentSeq a = LatentSeq::standard_normal(3, 2, rng);
  const LatentSeq b = LatentSeq::standard_normal(3, 2, rng);
  EXPECT_EQ(interpolate(a, b, 0.0).data(), a.data());
  EXPECT_EQ(interpolate(a, b, 1.0).data(), b.data());
  const RowMatrix mid = interpolate(a, b, 0.5).data();
  for (Eigen::Index i = 0; i < mid.size(); ++i) {
    EXPECT_NEAR(mid.data()[i], 0.5 * (a.data().data()[i] + b.data().data()[i]), 1e-15);
  }
  EXPECT_EQ(code_of([&] { interpolate(a, b, 1.5); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { interpolate(a, filled(2, 2, 0.0), 0.5); }), ErrorCode::ShapeMismatch);
}

TEST(VelocityTarget, IsDerivativeOfPath) {
  Rng rng(2);
  const LatentSeq a = LatentSeq::standard_normal(4, 3, rng);
  const LatentSeq b = LatentSeq::standard_normal(4, 3, rng);
  const double h = 1e-6, t = 0.3;
  const RowMatrix fd = (interpolate(a, b, t + h).data() - interpolate(a, b, t - h).data()) / (2 * h);
  EXPECT_LT((fd - velocity_target(a, b).data()).cwiseAbs().maxCoeff(), 1e-8);
  const FlowSample s = make_flow_sample(a, b, t);
  EXPECT_EQ(s.t, t);
  EXPECT_EQ(s.u.data(), velocity_target(a, b).data());
}

TEST(LatentSeq, RejectsNonFinite) {
  RowMatrix m = RowMatrix::Zero(2, 2);
  m(1, 1) = NAN;
  EXPECT_EQ(code_of([&] { LatentSeq{m}; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { LatentSeq{RowMatrix(0, 3)}; }), ErrorCode::InvalidArgument);
}

TEST(TimeSampler, LogitNormalIsInsideAndCentred) {
  Rng rng(3);
  const TimeSampler s = TimeSampler::logit_normal();
  std::vector<double> draws(20000);
  for (double& t : draws) {
    t = sample_time(s, rng);
    ASSERT_GT(t, 0.0);
    ASSERT_LT(t, 1.0);
  }
  std::nth_element(draws.begin(), draws.begin() + 10000, draws.end());
  EXPECT_NEAR(draws[10000], 0.5, 0.02);
  // P(t < sigmoid(1)) = Phi(1) for the standard logit-normal.
  const double cut = 1.0 / (1.0 + std::exp(-1.0));
  const auto below = std::count_if(draws.begin(), draws.end(), [&](double t) { return t < cut; });
  EXPECT_NEAR(static_cast<double>(below) / 20000.0, 0.8413, 0.01);
  EXPECT_EQ(code_of([] { TimeSampler::logit_normal(0.0, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(TimeSampler, ExtremeDrawsStayInside) {
  Rng rng(4);
  const TimeSampler s = TimeSampler::logit_normal(0.0, 200.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = sample_time(s, rng);
    ASSERT_GT(t, 0.0);
    ASSERT_LT(t, 1.0);
  }
}

TEST(Mask, PartialFractionAndSpans) {
  Rng rng(5);
  MaskSpec spec;
  spec.p_cond = 0.1;
  spec.n_mask = 3;
  spec.l_mask = 4;
  std::size_t partial = 0;
  for (int i = 0; i < 10000; ++i) {
    const MaskDraw d = make_mask(64, spec, rng);
    ASSERT_EQ(d.mask.size(), 64u);
    if (d.full) {
      ASSERT_EQ(d.masked_count(), 64u);
      continue;
    }
    ++partial;
    const auto runs = mask_runs(d.mask);
    ASSERT_EQ(runs.size(), 3u);
    for (const auto& [b, e] : runs) ASSERT_GE(e - b, 4u);
  }
  EXPECT_NEAR(static_cast<double>(partial) / 10000.0, 0.10, 0.01);
}

TEST(Mask, TightFitUsesEveryFrame) {
  // 2 spans of 3 plus one separator fill 7 frames exactly.
  Rng rng(6);
  MaskSpec spec{1.0, 2, 3};
  for (int i = 0; i < 50; ++i) {
    const MaskDraw d = make_mask(7, spec, rng);
    EXPECT_EQ(d.mask, (std::vector<bool>{true, true, true, false, true, true, true}));
  }
}

TEST(Mask, Errors) {
  Rng rng(7);
  EXPECT_EQ(code_of([&] { make_mask(6, MaskSpec{1.0, 2, 3}, rng); }), ErrorCode::InfeasibleSpec);
  EXPECT_EQ(code_of([&] { make_mask(6, MaskSpec{1.5, 1, 1}, rng); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { make_mask(6, MaskSpec{0.1, 0, 1}, rng); }), ErrorCode::InvalidArgument);
}

TEST(MaskedLatent, ConditionViewZeroesHiddenFrames) {
  const MaskedLatent m(filled(3, 2, 4.0), {false, true, false});
  const RowMatrix v = m.condition_view();
  EXPECT_EQ(v(0, 0), 4.0);
  EXPECT_EQ(v(1, 0), 0.0);
  EXPECT_EQ(v(1, 1), 0.0);
  EXPECT_EQ(v(2, 1), 4.0);
  EXPECT_EQ(code_of([] { MaskedLatent(filled(3, 2, 0.0), {true}); }), ErrorCode::ShapeMismatch);
}

TEST(Cfg, ScaleOneAndZeroAreExact) {
  Rng rng(8);
  const LatentSeq vc = LatentSeq::standard_normal(5, 3, rng);
  const LatentSeq vu = LatentSeq::standard_normal(5, 3, rng);
  EXPECT_EQ(cfg_velocity(vc, vu, {1.0}).data(), vc.data());
  EXPECT_EQ(cfg_velocity(vc, vu, {0.0}).data(), vu.data());
  const RowMatrix five = cfg_velocity(vc, vu, {5.0}).data();
  EXPECT_LT((five - (vu.data() + 5.0 * (vc.data() - vu.data()))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(CfgSpec{}.scale, 5.0);
  EXPECT_EQ(code_of([&] { cfg_velocity(vc, vu, {-1.0}); }), ErrorCode::InvalidArgument);
}

TEST(Euler, ConstantFieldIsExact) {
  const auto field = [](double, const RowMatrix&, const LatentSeq& x) {
    return LatentSeq(RowMatrix::Constant(x.frames(), x.dim(), 2.0));
  };
  const LatentSeq out = euler_sample(field, RowMatrix(2, 0), filled(2, 3, 1.0), 8);
  EXPECT_LT((out.data().array() - 3.0).abs().maxCoeff(), 1e-14);
}

TEST(Euler, LinearFieldMatchesClosedFormStepping) {
  // dx/dt = -x with N Euler steps gives x0 (1 - 1/N)^N.
  const auto field = [](double, const RowMatrix&, const LatentSeq& x) { return LatentSeq(-x.data()); };
  const LatentSeq out = euler_sample(field, RowMatrix(1, 0), filled(1, 1, 1.0), 50);
  EXPECT_NEAR(out.data()(0, 0), std::pow(1.0 - 1.0 / 50.0, 50), 1e-14);
}

TEST(Euler, GuidanceUsesZeroCondition) {
  // v = cond column; the unconditional branch sees zeros.
  const auto field = [](double, const RowMatrix& c, const LatentSeq& x) {
    return LatentSeq(RowMatrix::Constant(x.frames(), x.dim(), c(0, 0)));
  };
  const RowMatrix cond = RowMatrix::Constant(1, 1, 1.0);
  const LatentSeq g = euler_sample(field, cond, filled(1, 1, 0.0), 4, CfgSpec{3.0});
  EXPECT_NEAR(g.data()(0, 0), 3.0, 1e-14);
  const LatentSeq one = euler_sample(field, cond, filled(1, 1, 0.0), 4, CfgSpec{1.0});
  const LatentSeq plain = euler_sample(field, cond, filled(1, 1, 0.0), 4);
  EXPECT_EQ(one.data(), plain.data());
  EXPECT_EQ(code_of([&] { euler_sample(field, cond, filled(1, 1, 0.0), 0); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace foakit
