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

// Spatial-angle errors between directions of arrival, plus the two
// distributional metrics (Frechet distance over embedding sets and KL
// divergence over label distributions).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "foakit/error.hpp"
#include "foakit/foa.hpp"
#include "foakit/numeric.hpp"

namespace foakit {

struct AngleErrors {
  double d_theta = 0.0;
  double d_phi = 0.0;
  double d_angular = 0.0;
};

/// Circular azimuth difference, in [0, pi].
inline double theta_error(double gt, double est) {
  detail::require(std::isfinite(gt) && std::isfinite(est),
                  ErrorCode::InvalidArgument, "azimuths must be finite");
  const double d = std::fabs(std::fmod(gt - est, kTwoPi));
  return std::min(d, kTwoPi - d);
}

inline double phi_error(double gt, double est) {
  auto in_range = [](double v) { return v >= -kHalfPi && v <= kHalfPi; };
  if (!in_range(gt) || !in_range(est)) {
    detail::fail(ErrorCode::OutOfRange, "elevation outside [-pi/2, pi/2]");
  }
  return std::fabs(gt - est);
}

/// Great-circle angle between two directions (haversine form).
inline double spatial_angle_error(const Direction& gt, const Direction& est) {
  const double d_theta = theta_error(gt.azimuth(), est.azimuth());
  const double d_phi = gt.elevation() - est.elevation();
  const double s_phi = std::sin(0.5 * d_phi);
  const double s_theta = std::sin(0.5 * d_theta);
  double a = s_phi * s_phi + std::cos(gt.elevation()) *
                                 std::cos(est.elevation()) * s_theta * s_theta;
  a = std::clamp(a, 0.0, 1.0);
  return 2.0 * std::fabs(std::atan2(std::sqrt(a), std::sqrt(1.0 - a)));
}

inline AngleErrors angle_errors(const Direction& gt, const Direction& est) {
  return {theta_error(gt.azimuth(), est.azimuth()),
          phi_error(gt.elevation(), est.elevation()),
          spatial_angle_error(gt, est)};
}

// ---------------------------------------------------------------------------
// Frechet distance

/// n x d embedding matrix, one sample per row.
class FeatureSet {
 public:
  explicit FeatureSet(Eigen::MatrixXd vectors) : vectors_(std::move(vectors)) {
    detail::require(vectors_.rows() >= 2, ErrorCode::InvalidArgument,
                    "feature set needs at least two samples");
    detail::require(vectors_.cols() >= 1, ErrorCode::InvalidArgument,
                    "feature set needs at least one dimension");
    detail::require(vectors_.allFinite(), ErrorCode::InvalidArgument,
                    "feature set contains non-finite values");
  }

  const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }
  Eigen::Index size() const noexcept { return vectors_.rows(); }
  Eigen::Index dim() const noexcept { return vectors_.cols(); }

 private:
  Eigen::MatrixXd vectors_;
};

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Sample mean and unbiased (n - 1) covariance.
inline GaussianFit fit_gaussian(const FeatureSet& set) {
  const auto& v = set.vectors();
  GaussianFit fit;
  fit.mean = v.colwise().mean().transpose();
  const Eigen::MatrixXd centered = v.rowwise() - fit.mean.transpose();
  fit.cov = (centered.transpose() * centered) /
            static_cast<double>(set.size() - 1);
  return fit;
}

namespace detail {

/// Eigenvalues of a symmetric PSD matrix, with round-off negatives clamped.
inline Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& m,
                                       Eigen::MatrixXd* vectors = nullptr) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericalFailure, "eigendecomposition did not converge");
  }
  Eigen::VectorXd values = solver.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      if (values[i] < -1e-10 * scale) {
        fail(ErrorCode::NumericalFailure,
             "matrix is not positive semi-definite");
      }
      values[i] = 0.0;
    }
  }
  if (vectors) *vectors = solver.eigenvectors();
  return values;
}

}  // namespace detail

/// Tr((A B)^{1/2}) for covariance matrices A, B, computed through the
/// symmetric product A^{1/2} B A^{1/2} which shares the spectrum of A B.
inline double trace_sqrt_product(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  Eigen::MatrixXd vectors;
  const Eigen::VectorXd values = detail::psd_eigenvalues(a, &vectors);
  const Eigen::MatrixXd sqrt_a =
      vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
  const Eigen::VectorXd product = detail::psd_eigenvalues(sqrt_a * b * sqrt_a);
  return product.cwiseSqrt().sum();
}

inline double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  detail::require(a.mean.size() == b.mean.size(), ErrorCode::DimensionMismatch,
                  "feature dimensions differ");
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.cov.trace() + b.cov.trace() -
                            2.0 * trace_sqrt_product(a.cov, b.cov);
  return std::max(0.0, mean_term + trace_term);
}

inline double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
  detail::require(a.dim() == b.dim(), ErrorCode::DimensionMismatch,
                  "feature dimensions differ");
  return frechet_distance(fit_gaussian(a), fit_gaussian(b));
}

// ---------------------------------------------------------------------------
// KL divergence

class LabelDist {
 public:
  explicit LabelDist(std::vector<double> probabilities)
      : p_(std::move(probabilities)) {
    detail::require(!p_.empty(), ErrorCode::InvalidArgument,
                    "label distribution is empty");
    double total = 0.0;
    for (double v : p_) {
      detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                      "probabilities must be finite and non-negative");
      total += v;
    }
    detail::require(std::fabs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
                    "probabilities must sum to 1");
  }

  /// Rescales non-negative weights to sum to one.
  static LabelDist normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double v : weights) total += v;
    detail::require(total > 0.0 && std::isfinite(total),
                    ErrorCode::InvalidArgument,
                    "weights must have positive finite sum");
    for (double& v : weights) v /= total;
    return LabelDist(std::move(weights));
  }

  std::span<const double> probabilities() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }

 private:
  std::vector<double> p_;
};

/// KL(p || q) in nats.
inline double kl_divergence(const LabelDist& p, const LabelDist& q) {
  detail::require(p.size() == q.size(), ErrorCode::DimensionMismatch,
                  "distributions differ in length");
  const auto pp = p.probabilities();
  const auto qq = q.probabilities();
  double sum = 0.0;
  for (std::size_t i = 0; i < pp.size(); ++i) {
    if (pp[i] == 0.0) continue;
    if (qq[i] == 0.0) {
      detail::fail(ErrorCode::SupportViolation,
                   "q is zero where p has mass (index " + std::to_string(i) +
                       ")");
    }
    sum += pp[i] * std::log(pp[i] / qq[i]);
  }
  return std::max(0.0, sum);
}

// ---------------------------------------------------------------------------
// Batch DoA evaluation

struct DoaBatchResult {
  AngleErrors mean;
  std::size_t evaluated = 0;
  /// Pairs skipped because either signal had zero intensity.
  std::size_t excluded = 0;
};

/// Per-clip mean of the three angle errors. Pairs where either side raises
/// ZeroEnergy are excluded and counted. The result is independent of `jobs`.
inline DoaBatchResult eval_doa_batch(
    std::span<const std::pair<FoaSignal, FoaSignal>> pairs,
    std::size_t jobs = 1) {
  detail::require(!pairs.empty(), ErrorCode::EmptyBatch, "no pairs to evaluate");
  std::vector<std::optional<AngleErrors>> per_pair(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    try {
      const Direction gt = estimate_doa(pairs[i].first);
      const Direction est = estimate_doa(pairs[i].second);
      per_pair[i] = angle_errors(gt, est);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroEnergy) throw;
    }
  });

  std::vector<double> th, ph, an;
  for (const auto& e : per_pair) {
    if (!e) continue;
    th.push_back(e->d_theta);
    ph.push_back(e->d_phi);
    an.push_back(e->d_angular);
  }
  DoaBatchResult result;
  result.evaluated = th.size();
  result.excluded = pairs.size() - th.size();
  if (result.evaluated == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    result.mean = {nan, nan, nan};
    return result;
  }
  const double n = static_cast<double>(result.evaluated);
  result.mean = {pairwise_sum(th) / n, pairwise_sum(ph) / n,
                 pairwise_sum(an) / n};
  return result;
}

}  // namespace foakit
