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

// Dual-branch conditioning: local (perspective) features are stretched to
// the latent timeline and added to it; global (panoramic) features are
// max-pooled over time into one vector.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "foakit/error.hpp"
#include "foakit/flow_matching.hpp"

namespace foakit {

/// F x C feature sequence, one frame per row.
class FeatureSeq {
 public:
  explicit FeatureSeq(RowMatrix data) : data_(std::move(data)) {
    detail::require(data_.rows() >= 1 && data_.cols() >= 1,
                    ErrorCode::InvalidArgument,
                    "feature sequence must be at least 1x1");
  }

  const RowMatrix& data() const noexcept { return data_; }
  Eigen::Index frames() const noexcept { return data_.rows(); }
  Eigen::Index channels() const noexcept { return data_.cols(); }

 private:
  RowMatrix data_;
};

struct GlobalCond {
  Eigen::VectorXd data;
};

enum class UpsampleMode { kNearest, kLinear };

/// Source frame for output frame i under nearest-neighbour stretching.
inline Eigen::Index nearest_source_index(Eigen::Index i, Eigen::Index source,
                                         Eigen::Index target) {
  return (i * source) / target;
}

inline FeatureSeq upsample_features(const FeatureSeq& f, Eigen::Index target_len,
                                    UpsampleMode mode = UpsampleMode::kNearest) {
  const Eigen::Index src = f.frames();
  if (target_len < src) {
    detail::fail(ErrorCode::ShrinkNotSupported,
                 "target length shorter than feature sequence");
  }
  RowMatrix out(target_len, f.channels());
  if (mode == UpsampleMode::kNearest) {
    for (Eigen::Index i = 0; i < target_len; ++i) {
      out.row(i) = f.data().row(nearest_source_index(i, src, target_len));
    }
    return FeatureSeq(std::move(out));
  }
  // Linear: endpoints aligned, so first and last frames are reproduced.
  for (Eigen::Index i = 0; i < target_len; ++i) {
    if (src == 1 || target_len == 1) {
      out.row(i) = f.data().row(0);
      continue;
    }
    const double pos = static_cast<double>(i) * static_cast<double>(src - 1) /
                       static_cast<double>(target_len - 1);
    const auto lo = static_cast<Eigen::Index>(pos);
    const Eigen::Index hi = std::min(lo + 1, src - 1);
    const double frac = pos - static_cast<double>(lo);
    out.row(i) = (1.0 - frac) * f.data().row(lo) + frac * f.data().row(hi);
  }
  return FeatureSeq(std::move(out));
}

inline LatentSeq fuse_local(const FeatureSeq& upsampled, const LatentSeq& latent) {
  detail::require(upsampled.frames() == latent.frames() &&
                      upsampled.channels() == latent.dim(),
                  ErrorCode::ShapeMismatch,
                  "local features and latent differ in shape");
  return LatentSeq(upsampled.data() + latent.data());
}

/// Per-channel maximum over time.
inline GlobalCond pool_global(const FeatureSeq& f) {
  return {f.data().colwise().maxCoeff().transpose()};
}

/// Offset between the channel values of consecutive class ids.
inline constexpr double kSynthClassSpacing = 1.5;
/// Half-width of the uniform jitter around each class offset.
inline constexpr double kSynthJitter = 0.25;

/// Deterministic stand-in for image-encoder features: every entry is
/// class_id * 1.5 plus uniform jitter in [-0.25, 0.25], so channel means of
/// different classes differ by at least 1.0.
inline FeatureSeq synth_features(std::uint64_t seed, Eigen::Index frames,
                                 Eigen::Index channels, int class_id) {
  detail::require(frames >= 1 && channels >= 1, ErrorCode::InvalidArgument,
                  "feature dimensions must be >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(class_id)};
  Rng rng(seq);
  std::uniform_real_distribution<double> jitter(-kSynthJitter, kSynthJitter);
  RowMatrix m(frames, channels);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = kSynthClassSpacing * class_id + jitter(rng);
  }
  return FeatureSeq(std::move(m));
}

}  // namespace foakit
