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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "foakit/fixtures.hpp"
#include "foakit/training.hpp"
#include "foakit/velocity_model.hpp"
#include "support/oracles.hpp"

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

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  return LatentSeq::standard_normal(r, c, rng).data();
}

TEST(VelocityModel, ForwardMatchesScalarLoops) {
  const VelocityModel m(3, 2, {5, 4}, 11);
  Rng rng(1);
  const LatentSeq x = LatentSeq::standard_normal(4, 3, rng);
  const RowMatrix cond = random_matrix(4, 2, rng);
  const LatentSeq v = m(0.37, cond, x);
  const RowMatrix input = m.build_input(0.37, cond, x);
  for (Eigen::Index r = 0; r < 4; ++r) {
    EXPECT_EQ(input(r, 5), 0.37);
    std::vector<double> in(input.row(r).data(), input.row(r).data() + input.cols());
    const auto ref = oracle::mlp_forward(m.params(), in);
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(v.data()(r, k), ref[k], 1e-13);
  }
}

TEST(VelocityModel, Shapes) {
  const VelocityModel m(2, 3, {8}, 0);
  EXPECT_EQ(m.widths(), (std::vector<std::size_t>{6, 8, 2}));
  EXPECT_EQ(m.params().parameter_count(), 6u * 8 + 8 + 8 * 2 + 2);
  Rng rng(2);
  const LatentSeq x = LatentSeq::standard_normal(2, 2, rng);
  EXPECT_EQ(code_of([&] { m(0.1, RowMatrix::Zero(2, 2), x); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { m(0.1, RowMatrix::Zero(3, 3), x); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { VelocityModel(2, 0, {}, 0); }), ErrorCode::InvalidArgument);
}

TEST(VelocityModel, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const VelocityModel m(2, 1, {6, 5}, 100 + trial);
    const RowMatrix input = random_matrix(7, 4, rng);
    const RowMatrix target = random_matrix(7, 2, rng);
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(7, 0.1, 1.0);
    const LossResult lr = m.weighted_loss(input, target, w);
    EXPECT_NEAR(lr.loss, oracle::weighted_loss(m.params(), input, target, w), 1e-12);
    const auto fd = oracle::fd_gradient(m.params(), input, target, w, 1e-5);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double a = lr.grad.at(i);
      EXPECT_LT(std::fabs(a - fd[i]) / std::max({std::fabs(a), std::fabs(fd[i]), 1e-6}), 1e-4)
          << "parameter " << i;
    }
  }
}

TEST(VelocityModel, FrameWeightsAndMaskedLoss) {
  const VelocityModel m(2, 0, {4}, 1);
  const Eigen::VectorXd all = m.frame_weights(4, {});
  // Rows carry 1/(T D); each row sums D squared errors, so the loss is a mean.
  EXPECT_DOUBLE_EQ(all.sum(), 0.5);
  const Eigen::VectorXd some = m.frame_weights(4, {true, false, false, true});
  EXPECT_DOUBLE_EQ(some[0], 0.25);
  EXPECT_DOUBLE_EQ(some[1], 0.0);
  EXPECT_EQ(code_of([&] { m.frame_weights(2, {false, false}); }), ErrorCode::NoMaskedFrames);
  EXPECT_EQ(code_of([&] { m.frame_weights(2, {true}); }), ErrorCode::ShapeMismatch);
}

TEST(CfmLoss, HiddenFramesOnly) {
  // With the condition built from the masked latent, changing the target on
  // a visible frame must not change the masked-only loss.
  const VelocityModel m(2, 2, {6}, 4);
  Rng rng(5);
  const LatentSeq x0 = LatentSeq::standard_normal(3, 2, rng);
  RowMatrix a = random_matrix(3, 2, rng);
  const std::vector<bool> mask{false, true, false};
  const MaskedLatent masked(LatentSeq(a), mask);
  const double base = cfm_loss(m, x0, LatentSeq(a), 0.4, masked).loss;
  RowMatrix b = a;
  b(0, 0) += 10.0;
  EXPECT_NEAR(cfm_loss(m, x0, LatentSeq(b), 0.4, masked).loss, base, 1e-12);
  EXPECT_NE(cfm_loss(m, x0, LatentSeq(b), 0.4, masked, nullptr, false).loss,
            cfm_loss(m, x0, LatentSeq(a), 0.4, masked, nullptr, false).loss);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = oracle::scratch_dir("ckpt");
  const VelocityModel m(2, 4, {7, 3}, 9);
  const std::string path = (dir / "m.fkv").string();
  m.save(path);
  const VelocityModel back = VelocityModel::load(path);
  EXPECT_EQ(back.widths(), m.widths());
  EXPECT_EQ(back.cond_dim(), 4u);
  for (std::size_t i = 0; i < m.params().parameter_count(); ++i) {
    ASSERT_EQ(back.params().at(i), m.params().at(i));
  }
  {
    std::ofstream out(dir / "bad.fkv", std::ios::binary);
    out << "FKVELO01";
  }
  EXPECT_EQ(code_of([&] { VelocityModel::load((dir / "bad.fkv").string()); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { VelocityModel::load((dir / "none.fkv").string()); }), ErrorCode::IoFailure);
  std::filesystem::remove_all(dir);
}

TEST(Train, PointMassCollapsesLoss) {
  const auto data = fixtures::point_mass({1.5, -0.5});
  TrainConfig cfg;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 128;
  cfg.steps = 2000;
  cfg.seed = 1;
  const TrainResult r = train(VelocityModel(2, 0, {32, 32, 32}, 0), data, cfg);
  const auto mean = [](auto b, auto e) { return std::accumulate(b, e, 0.0) / std::distance(b, e); };
  const double lead = mean(r.loss_trace.begin(), r.loss_trace.begin() + 100);
  const double trail = mean(r.loss_trace.end() - 100, r.loss_trace.end());
  EXPECT_LT(trail, 0.1 * lead);

  Rng rng(2);
  const LatentSeq out = euler_sample(r.model, RowMatrix(1, 0), LatentSeq::standard_normal(1, 2, rng), 50);
  EXPECT_NEAR(out.data()(0, 0), 1.5, 0.2);
  EXPECT_NEAR(out.data()(0, 1), -0.5, 0.2);
}

TEST(Train, DeterministicForSeed) {
  const auto data = fixtures::GaussianMixture::dataset(20, 1);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 8;
  cfg.seed = 5;
  cfg.cond_drop = 0.3;
  const TrainResult a = train(VelocityModel(2, 4, {8}, 0), data, cfg);
  const TrainResult b = train(VelocityModel(2, 4, {8}, 0), data, cfg);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Train, DivergenceIsReported) {
  const auto data = fixtures::point_mass({1e6, -1e6});
  TrainConfig cfg;
  cfg.learning_rate = 1e6;
  cfg.steps = 200;
  EXPECT_EQ(code_of([&] { train(VelocityModel(2, 0, {4}, 0), data, cfg); }), ErrorCode::DivergenceDetected);
}

TEST(Train, MaskedPretrainingRuns) {
  // Four-frame latents with masked-span conditioning.
  std::vector<TrainExample> data;
  Rng rng(9);
  for (int i = 0; i < 16; ++i) data.push_back({LatentSeq::standard_normal(4, 2, rng), RowMatrix(4, 0)});
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 4;
  cfg.mask = MaskSpec{0.5, 1, 2};
  const TrainResult r = train(VelocityModel(2, 2, {8}, 0), data, cfg);
  EXPECT_EQ(r.loss_trace.size(), 10u);
  EXPECT_TRUE(std::all_of(r.loss_trace.begin(), r.loss_trace.end(), [](double l) { return std::isfinite(l); }));
}

}  // namespace
}  // namespace foakit
