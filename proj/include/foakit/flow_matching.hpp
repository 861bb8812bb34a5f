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

// Conditional flow matching on small latent sequences: the straight-line
// probability path, its velocity target, time samplers, masked-span
// conditioning, classifier-free guidance and a fixed-step Euler sampler.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "foakit/error.hpp"

namespace foakit {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

/// T x D latent sequence (T frames, D latent dimensions).
class LatentSeq {
 public:
  LatentSeq() = default;
  explicit LatentSeq(RowMatrix data) : data_(std::move(data)) {
    detail::require(data_.rows() >= 1 && data_.cols() >= 1,
                    ErrorCode::InvalidArgument, "latent must be at least 1x1");
    detail::require(data_.allFinite(), ErrorCode::InvalidArgument,
                    "latent contains non-finite values");
  }

  static LatentSeq zeros(Eigen::Index frames, Eigen::Index dim) {
    return LatentSeq(RowMatrix::Zero(frames, dim));
  }

  static LatentSeq standard_normal(Eigen::Index frames, Eigen::Index dim,
                                   Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix m(frames, dim);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return LatentSeq(std::move(m));
  }

  const RowMatrix& data() const noexcept { return data_; }
  Eigen::Index frames() const noexcept { return data_.rows(); }
  Eigen::Index dim() const noexcept { return data_.cols(); }

  bool same_shape(const LatentSeq& other) const noexcept {
    return frames() == other.frames() && dim() == other.dim();
  }

 private:
  RowMatrix data_;
};

namespace detail {

inline void require_same_shape(const LatentSeq& a, const LatentSeq& b) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "latent shapes differ");
}

}  // namespace detail

inline LatentSeq interpolate(const LatentSeq& x0, const LatentSeq& x1,
                             double t) {
  detail::require_same_shape(x0, x1);
  detail::require(t >= 0.0 && t <= 1.0, ErrorCode::OutOfRange,
                  "t must lie in [0, 1]");
  return LatentSeq(t * x1.data() + (1.0 - t) * x0.data());
}

/// Velocity of the straight path from x0 to x1; constant in t.
inline LatentSeq velocity_target(const LatentSeq& x0, const LatentSeq& x1) {
  detail::require_same_shape(x0, x1);
  return LatentSeq(x1.data() - x0.data());
}

struct FlowSample {
  LatentSeq x0, x1, xt, u;
  double t = 0.0;
};

inline FlowSample make_flow_sample(LatentSeq x0, LatentSeq x1, double t) {
  FlowSample s;
  s.xt = interpolate(x0, x1, t);
  s.u = velocity_target(x0, x1);
  s.x0 = std::move(x0);
  s.x1 = std::move(x1);
  s.t = t;
  return s;
}

// ---------------------------------------------------------------------------
// Time samplers

struct TimeSampler {
  enum class Kind { kUniform, kLogitNormal };

  Kind kind = Kind::kLogitNormal;
  double mu = 0.0;
  double sigma = 1.0;

  static TimeSampler uniform() { return {Kind::kUniform, 0.0, 1.0}; }
  static TimeSampler logit_normal(double mu = 0.0, double sigma = 1.0) {
    detail::require(sigma > 0.0 && std::isfinite(mu) && std::isfinite(sigma),
                    ErrorCode::InvalidArgument,
                    "logit-normal sigma must be positive");
    return {Kind::kLogitNormal, mu, sigma};
  }
};

inline double sample_time(const TimeSampler& s, Rng& rng) {
  if (s.kind == TimeSampler::Kind::kUniform) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  const double z = std::normal_distribution<double>(s.mu, s.sigma)(rng);
  // Keep the draw strictly inside (0, 1) even for |z| large enough that the
  // sigmoid rounds to an endpoint.
  const double t = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(t, 1e-12, 1.0 - 1e-12);
}

// ---------------------------------------------------------------------------
// Masked-span conditioning

/// With probability p_cond the condition is a partially masked latent with
/// exactly n_mask separate spans of at least l_mask frames; otherwise every
/// frame is hidden.
struct MaskSpec {
  double p_cond = 0.1;
  std::size_t n_mask = 1;
  std::size_t l_mask = 1;
  /// Success probability of the geometric extra length added to each span.
  double extra_length_p = 0.2;

  void validate() const {
    detail::require(p_cond >= 0.0 && p_cond <= 1.0, ErrorCode::InvalidArgument,
                    "p_cond must lie in [0, 1]");
    detail::require(n_mask >= 1 && l_mask >= 1, ErrorCode::InvalidArgument,
                    "n_mask and l_mask must be >= 1");
    detail::require(extra_length_p > 0.0 && extra_length_p <= 1.0,
                    ErrorCode::InvalidArgument,
                    "extra_length_p must lie in (0, 1]");
  }

  /// Spans must be separated by at least one visible frame to stay distinct.
  bool fits(std::size_t frames) const {
    return n_mask * l_mask + (n_mask - 1) <= frames;
  }
};

struct MaskDraw {
  std::vector<bool> mask;  // true = hidden
  bool full = false;

  std::size_t masked_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  }
};

/// Maximal runs of hidden frames as [begin, end) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> mask_runs(
    const std::vector<bool>& mask) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j]) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

/// Span placement is uniform over all legal layouts of the drawn lengths
/// (stars and bars over the free frames).
inline MaskDraw make_mask(std::size_t frames, const MaskSpec& spec, Rng& rng) {
  spec.validate();
  if (!spec.fits(frames)) {
    detail::fail(ErrorCode::InfeasibleSpec,
                 "n_mask spans of length l_mask do not fit in " +
                     std::to_string(frames) + " frames");
  }
  MaskDraw draw;
  const bool partial = std::bernoulli_distribution(spec.p_cond)(rng);
  if (!partial) {
    draw.mask.assign(frames, true);
    draw.full = true;
    return draw;
  }

  const std::size_t n = spec.n_mask;
  std::size_t budget = frames - (n * spec.l_mask + (n - 1));
  std::geometric_distribution<std::size_t> extra(spec.extra_length_p);
  std::vector<std::size_t> lengths(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t e = std::min(extra(rng), budget);
    lengths[k] = spec.l_mask + e;
    budget -= e;
  }

  // `budget` free frames go into n + 1 gaps; choose n bar positions among
  // budget + n slots.
  std::vector<std::size_t> slots(budget + n);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::vector<std::size_t> bars;
  bars.reserve(n);
  std::sample(slots.begin(), slots.end(), std::back_inserter(bars), n, rng);
  std::sort(bars.begin(), bars.end());

  draw.mask.assign(frames, false);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t gap = bars[k] - (k == 0 ? 0 : bars[k - 1] + 1);
    pos += gap + (k == 0 ? 0 : 1);
    for (std::size_t i = 0; i < lengths[k]; ++i) draw.mask[pos + i] = true;
    pos += lengths[k];
  }
  draw.full = false;
  return draw;
}

/// A latent paired with its hidden-frame mask.
class MaskedLatent {
 public:
  MaskedLatent(LatentSeq latent, std::vector<bool> mask)
      : latent_(std::move(latent)), mask_(std::move(mask)) {
    detail::require(mask_.size() == static_cast<std::size_t>(latent_.frames()),
                    ErrorCode::ShapeMismatch, "mask length differs from T");
  }

  const LatentSeq& latent() const noexcept { return latent_; }
  const std::vector<bool>& mask() const noexcept { return mask_; }

  /// What the model is allowed to see: the latent with hidden frames zeroed.
  RowMatrix condition_view() const {
    RowMatrix v = latent_.data();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (mask_[static_cast<std::size_t>(i)]) v.row(i).setZero();
    }
    return v;
  }

 private:
  LatentSeq latent_;
  std::vector<bool> mask_;
};

// ---------------------------------------------------------------------------
// Guidance and sampling

struct CfgSpec {
  double scale = 5.0;
};

/// v_uncond + scale (v_cond - v_uncond), evaluated as
/// scale v_cond + (1 - scale) v_uncond so scale 1 and 0 are exact.
inline LatentSeq cfg_velocity(const LatentSeq& v_cond, const LatentSeq& v_uncond,
                              const CfgSpec& spec) {
  detail::require_same_shape(v_cond, v_uncond);
  detail::require(std::isfinite(spec.scale) && spec.scale >= 0.0,
                  ErrorCode::InvalidArgument, "CFG scale must be finite, >= 0");
  return LatentSeq(spec.scale * v_cond.data() +
                   (1.0 - spec.scale) * v_uncond.data());
}

/// Anything evaluating v(t, condition, x) on a T x D latent.
template <typename F>
concept VelocityField = requires(const F& f, double t, const RowMatrix& cond,
                                 const LatentSeq& x) {
  { f(t, cond, x) } -> std::convertible_to<LatentSeq>;
};

/// Fixed-step Euler integration from t = 0 to 1 starting at `x0`. With a
/// guidance spec the field is evaluated twice per step, once with `cond`
/// and once with the all-zero (fully masked) condition.
template <VelocityField Field>
LatentSeq euler_sample(const Field& field, const RowMatrix& cond,
                       LatentSeq x0, std::size_t steps,
                       std::optional<CfgSpec> guidance = std::nullopt) {
  detail::require(steps >= 1, ErrorCode::InvalidArgument, "steps must be >= 1");
  const RowMatrix uncond = RowMatrix::Zero(cond.rows(), cond.cols());
  const double dt = 1.0 / static_cast<double>(steps);
  RowMatrix x = x0.data();
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps);
    const LatentSeq current(x);
    LatentSeq v = field(t, cond, current);
    if (guidance) v = cfg_velocity(v, field(t, uncond, current), *guidance);
    detail::require_same_shape(v, current);
    x += dt * v.data();
  }
  return LatentSeq(std::move(x));
}

template <VelocityField Field>
LatentSeq euler_sample(const Field& field, const RowMatrix& cond,
                       Eigen::Index frames, Eigen::Index dim, std::size_t steps,
                       std::optional<CfgSpec> guidance, Rng& rng) {
  return euler_sample(field, cond, LatentSeq::standard_normal(frames, dim, rng),
                      steps, guidance);
}

}  // namespace foakit
