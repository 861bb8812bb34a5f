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

// Synthetic training sets for the desk-scale flow-matching engine.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "foakit/conditioning.hpp"
#include "foakit/flow_matching.hpp"
#include "foakit/training.hpp"

namespace foakit::fixtures {

/// Every example is the same single-frame latent `c`; no conditioning.
inline std::vector<TrainExample> point_mass(const std::vector<double>& c) {
  RowMatrix m(1, static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    m(0, static_cast<Eigen::Index>(i)) = c[i];
  }
  return {TrainExample{LatentSeq(m), RowMatrix(1, 0)}};
}

/// Two isotropic 2-D Gaussians, one per class, conditioned on pooled
/// synthetic image features.
struct GaussianMixture {
  static constexpr Eigen::Index kDim = 2;
  static constexpr Eigen::Index kFeatureFrames = 4;
  static constexpr Eigen::Index kFeatureChannels = 4;
  static constexpr double kStd = 0.05;
  static constexpr std::array<std::array<double, 2>, 2> kMeans{
      {{-3.0, -3.0}, {3.0, 3.0}}};

  /// 1 x kFeatureChannels condition for `class_id`, drawn from the pooled
  /// synthetic features with the given seed.
  static RowMatrix condition(int class_id, std::uint64_t seed) {
    const FeatureSeq f =
        synth_features(seed, kFeatureFrames, kFeatureChannels, class_id);
    return pool_global(f).data.transpose();
  }

  static std::vector<TrainExample> dataset(std::size_t per_class,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, kStd);
    std::vector<TrainExample> out;
    out.reserve(2 * per_class);
    for (std::size_t i = 0; i < per_class; ++i) {
      for (int k = 0; k < 2; ++k) {
        RowMatrix x(1, kDim);
        x(0, 0) = kMeans[k][0] + noise(rng);
        x(0, 1) = kMeans[k][1] + noise(rng);
        const std::uint64_t feature_seed = seed * 1000003u + 2 * i + k;
        out.push_back({LatentSeq(std::move(x)), condition(k, feature_seed)});
      }
    }
    return out;
  }
};

}  // namespace foakit::fixtures
