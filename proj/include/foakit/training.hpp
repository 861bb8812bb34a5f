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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "foakit/error.hpp"
#include "foakit/flow_matching.hpp"
#include "foakit/velocity_model.hpp"

namespace foakit {

/// One training pair: a target latent and its external condition
/// (T x E, zero columns when unconditioned).
struct TrainExample {
  LatentSeq x1;
  RowMatrix external;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::size_t steps = 3000;
  std::uint64_t seed = 0;
  TimeSampler time_sampler = TimeSampler::logit_normal();
  /// Masked-latent conditioning (pre-training). Without it the model sees
  /// only the external condition.
  std::optional<MaskSpec> mask;
  /// Restrict the loss to hidden frames when masking is enabled.
  bool masked_loss = true;
  /// Probability of replacing the external condition with zeros, which
  /// trains the unconditional branch used by guidance. Off by default: the
  /// dropped examples raise the loss floor of small fixtures noticeably.
  double cond_drop = 0.0;

  void validate() const {
    detail::require(learning_rate > 0.0 && std::isfinite(learning_rate),
                    ErrorCode::InvalidArgument, "learning rate must be > 0");
    detail::require(batch_size >= 1 && steps >= 1, ErrorCode::InvalidArgument,
                    "batch size and steps must be >= 1");
    detail::require(cond_drop >= 0.0 && cond_drop <= 1.0,
                    ErrorCode::InvalidArgument, "cond_drop must lie in [0, 1]");
    if (mask) mask->validate();
  }
};

struct TrainResult {
  VelocityModel model;
  std::vector<double> loss_trace;  // mean batch loss per step
};

/// Plain SGD on the flow-matching objective. Each batch element draws an
/// example, x0 ~ N(0, I), t from the configured sampler, a mask (when
/// enabled) and the condition-drop coin, in that order, from a single
/// generator seeded with cfg.seed.
inline TrainResult train(VelocityModel model,
                         std::span<const TrainExample> dataset,
                         const TrainConfig& cfg) {
  cfg.validate();
  detail::require(!dataset.empty(), ErrorCode::InvalidArgument,
                  "training set is empty");
  Rng rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::bernoulli_distribution drop(cfg.cond_drop);

  TrainResult result{std::move(model), {}};
  result.loss_trace.reserve(cfg.steps);
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);

  std::vector<RowMatrix> inputs, targets;
  std::vector<Eigen::VectorXd> weights;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    inputs.clear();
    targets.clear();
    weights.clear();
    Eigen::Index rows = 0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const TrainExample& ex = dataset[pick(rng)];
      const LatentSeq x0 =
          LatentSeq::standard_normal(ex.x1.frames(), ex.x1.dim(), rng);
      const double t = sample_time(cfg.time_sampler, rng);

      std::optional<MaskedLatent> masked;
      if (cfg.mask) {
        MaskDraw draw =
            make_mask(static_cast<std::size_t>(ex.x1.frames()), *cfg.mask, rng);
        masked.emplace(ex.x1, std::move(draw.mask));
      }
      RowMatrix external = ex.external;
      if (drop(rng)) external.setZero();

      const RowMatrix cond = assemble_condition(
          masked ? &*masked : nullptr, &external, ex.x1.frames());
      const LatentSeq xt = interpolate(x0, ex.x1, t);
      inputs.push_back(result.model.build_input(t, cond, xt));
      targets.push_back(velocity_target(x0, ex.x1).data());
      weights.push_back(inv_batch *
                        result.model.frame_weights(
                            ex.x1.frames(), (masked && cfg.masked_loss)
                                                ? masked->mask()
                                                : std::vector<bool>{}));
      rows += ex.x1.frames();
    }

    // Frames are independent under a per-frame network, so the batch is
    // evaluated as one stacked matrix with per-row loss weights.
    RowMatrix input(rows, inputs.front().cols());
    RowMatrix target(rows, targets.front().cols());
    Eigen::VectorXd weight(rows);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Eigen::Index n = inputs[i].rows();
      input.middleRows(r, n) = inputs[i];
      target.middleRows(r, n) = targets[i];
      weight.segment(r, n) = weights[i];
      r += n;
    }
    const LossResult lr = result.model.weighted_loss(input, target, weight);
    if (!std::isfinite(lr.loss)) {
      detail::fail(ErrorCode::DivergenceDetected,
                   "loss became non-finite at step " + std::to_string(step));
    }
    result.loss_trace.push_back(lr.loss);
    result.model.params().axpy(-cfg.learning_rate, lr.grad);
  }
  return result;
}

inline void write_loss_trace(std::ostream& out, std::span<const double> trace) {
  out << "step\tloss\n";
  out.precision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << '\t' << trace[i] << '\n';
  }
}

}  // namespace foakit
