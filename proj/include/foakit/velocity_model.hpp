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

// A per-frame tanh MLP velocity field v(t, condition, x) with exact
// reverse-mode gradients of the flow-matching loss, and its flat binary
// checkpoint format:
//
//   bytes 0..7   magic "FKVELO01"
//   u64          latent dimension D
//   u64          number of widths L + 1
//   u64 x (L+1)  layer widths, input first (input = D + cond_dim + 1)
//   per layer    weights (out x in, row-major f64) then bias (out f64)
//
// All integers and floats are little-endian.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "foakit/binary_io.hpp"
#include "foakit/error.hpp"
#include "foakit/flow_matching.hpp"

namespace foakit {

struct DenseLayer {
  RowMatrix weight;  // out x in
  Eigen::VectorXd bias;
};

/// Parameter-shaped container, used for both weights and their gradients.
struct ModelParams {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
      n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    }
    return n;
  }

  /// Flat view by index: weights of layer 0 (row-major), bias of layer 0,
  /// weights of layer 1, ...
  double& at(std::size_t index) {
    for (auto& l : layers) {
      const auto nw = static_cast<std::size_t>(l.weight.size());
      if (index < nw) return l.weight.data()[index];
      index -= nw;
      const auto nb = static_cast<std::size_t>(l.bias.size());
      if (index < nb) return l.bias[static_cast<Eigen::Index>(index)];
      index -= nb;
    }
    detail::fail(ErrorCode::OutOfRange, "parameter index out of range");
  }

  double at(std::size_t index) const {
    return const_cast<ModelParams*>(this)->at(index);
  }

  /// this += scale * other
  void axpy(double scale, const ModelParams& other) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += scale * other.layers[i].weight;
      layers[i].bias += scale * other.layers[i].bias;
    }
  }

  ModelParams zeros_like() const {
    ModelParams z;
    for (const auto& l : layers) {
      z.layers.push_back({RowMatrix::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
    }
    return z;
  }
};

struct LossResult {
  double loss = 0.0;
  ModelParams grad;
};

class VelocityModel {
 public:
  /// `hidden` lists the hidden-layer widths (at least one).
  VelocityModel(std::size_t latent_dim, std::size_t cond_dim,
                std::vector<std::size_t> hidden, std::uint64_t seed)
      : latent_dim_(latent_dim), cond_dim_(cond_dim) {
    detail::require(latent_dim >= 1, ErrorCode::InvalidArgument,
                    "latent dimension must be >= 1");
    detail::require(!hidden.empty(), ErrorCode::InvalidArgument,
                    "velocity model needs at least one hidden layer");
    widths_.push_back(latent_dim + cond_dim + 1);
    for (std::size_t h : hidden) {
      detail::require(h >= 1, ErrorCode::InvalidArgument,
                      "hidden widths must be >= 1");
      widths_.push_back(h);
    }
    widths_.push_back(latent_dim);

    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const auto in = static_cast<Eigen::Index>(widths_[l]);
      const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> uni(-limit, limit);
      DenseLayer layer{RowMatrix(out, in), Eigen::VectorXd::Zero(out)};
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
        layer.weight.data()[i] = uni(rng);
      }
      params_.layers.push_back(std::move(layer));
    }
  }

  /// Builds a model from explicit parameters; shapes are validated.
  VelocityModel(std::size_t latent_dim, ModelParams params)
      : latent_dim_(latent_dim), params_(std::move(params)) {
    detail::require(params_.layers.size() >= 2, ErrorCode::InvalidArgument,
                    "velocity model needs at least one hidden layer");
    widths_.push_back(
        static_cast<std::size_t>(params_.layers.front().weight.cols()));
    for (const auto& l : params_.layers) {
      detail::require(static_cast<std::size_t>(l.weight.cols()) == widths_.back(),
                      ErrorCode::ShapeMismatch, "layer widths do not chain");
      detail::require(l.bias.size() == l.weight.rows(), ErrorCode::ShapeMismatch,
                      "bias length differs from layer output width");
      widths_.push_back(static_cast<std::size_t>(l.weight.rows()));
    }
    detail::require(widths_.back() == latent_dim, ErrorCode::ShapeMismatch,
                    "output width differs from latent dimension");
    detail::require(widths_.front() >= latent_dim + 1, ErrorCode::ShapeMismatch,
                    "input width too small for latent and time");
    cond_dim_ = widths_.front() - latent_dim - 1;
  }

  std::size_t latent_dim() const noexcept { return latent_dim_; }
  std::size_t cond_dim() const noexcept { return cond_dim_; }
  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  const ModelParams& params() const noexcept { return params_; }
  ModelParams& params() noexcept { return params_; }

  /// v(t, cond, x). `cond` is T x cond_dim (any row count when cond_dim is 0).
  LatentSeq operator()(double t, const RowMatrix& cond,
                       const LatentSeq& x) const {
    std::vector<RowMatrix> acts;
    return LatentSeq(forward(build_input(t, cond, x), acts));
  }

  /// Per-frame network input rows [x | cond | t].
  RowMatrix build_input(double t, const RowMatrix& cond,
                        const LatentSeq& x) const {
    const Eigen::Index frames = x.frames();
    const auto d = static_cast<Eigen::Index>(latent_dim_);
    const auto c = static_cast<Eigen::Index>(cond_dim_);
    detail::require(x.dim() == d, ErrorCode::ShapeMismatch,
                    "latent dimension differs from model");
    detail::require(cond.cols() == c && (c == 0 || cond.rows() == frames),
                    ErrorCode::ShapeMismatch,
                    "condition shape differs from model");
    RowMatrix input(frames, d + c + 1);
    input.leftCols(d) = x.data();
    if (c > 0) input.middleCols(d, c) = cond;
    input.col(d + c).setConstant(t);
    return input;
  }

  /// Weighted squared error sum_r w_r ||net(input_r) - target_r||^2 over
  /// stacked input rows, with its exact gradient.
  LossResult weighted_loss(const RowMatrix& input, const RowMatrix& target,
                           const Eigen::VectorXd& row_weight) const {
    detail::require(input.cols() == static_cast<Eigen::Index>(widths_.front()),
                    ErrorCode::ShapeMismatch, "input width differs from model");
    detail::require(target.rows() == input.rows() &&
                        target.cols() == static_cast<Eigen::Index>(latent_dim_) &&
                        row_weight.size() == input.rows(),
                    ErrorCode::ShapeMismatch, "target shape differs from input");
    std::vector<RowMatrix> acts;
    const RowMatrix out = forward(input, acts);
    const RowMatrix delta = out - target;

    LossResult result;
    result.loss = (delta.rowwise().squaredNorm().array() * row_weight.array()).sum();

    // Reverse pass; `g` holds dLoss/dZ for the current layer.
    result.grad = params_.zeros_like();
    RowMatrix g = 2.0 * (row_weight.asDiagonal() * delta);
    for (std::size_t l = params_.layers.size(); l-- > 0;) {
      result.grad.layers[l].weight.noalias() = g.transpose() * acts[l];
      result.grad.layers[l].bias = g.colwise().sum().transpose();
      if (l > 0) {
        RowMatrix back = g * params_.layers[l].weight;
        back.array() *= 1.0 - acts[l].array().square();
        g = std::move(back);
      }
    }
    return result;
  }

  /// Flow-matching loss and its exact gradient. The squared error
  /// ||v(t, cond, x_t) - (x1 - x0)||^2 is averaged over the frames selected
  /// by `loss_frames` (all frames when empty) and the latent dimensions.
  LossResult loss_and_grad(const LatentSeq& x0, const LatentSeq& x1, double t,
                           const RowMatrix& cond,
                           const std::vector<bool>& loss_frames = {}) const {
    const LatentSeq xt = interpolate(x0, x1, t);
    const Eigen::VectorXd weight = frame_weights(xt.frames(), loss_frames);
    return weighted_loss(build_input(t, cond, xt),
                         velocity_target(x0, x1).data(), weight);
  }

  /// Row weights 1 / (selected frames * D) on selected frames, 0 elsewhere.
  Eigen::VectorXd frame_weights(Eigen::Index frames,
                                const std::vector<bool>& loss_frames) const {
    detail::require(loss_frames.empty() ||
                        loss_frames.size() == static_cast<std::size_t>(frames),
                    ErrorCode::ShapeMismatch, "loss mask length differs from T");
    Eigen::VectorXd w(frames);
    std::size_t selected = 0;
    for (Eigen::Index i = 0; i < frames; ++i) {
      const bool on =
          loss_frames.empty() || loss_frames[static_cast<std::size_t>(i)];
      w[i] = on ? 1.0 : 0.0;
      if (on) ++selected;
    }
    if (selected == 0) {
      detail::fail(ErrorCode::NoMaskedFrames, "loss mask selects no frames");
    }
    return w / static_cast<double>(selected * latent_dim_);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) detail::fail(ErrorCode::IoFailure, "cannot open " + path);
    binary::write_magic(out, magic());
    binary::write_pod<std::uint64_t>(out, latent_dim_);
    binary::write_pod<std::uint64_t>(out, widths_.size());
    for (std::size_t w : widths_) binary::write_pod<std::uint64_t>(out, w);
    for (const auto& l : params_.layers) {
      binary::write_doubles(out, l.weight.data(),
                            static_cast<std::size_t>(l.weight.size()));
      binary::write_doubles(out, l.bias.data(),
                            static_cast<std::size_t>(l.bias.size()));
    }
    if (!out) detail::fail(ErrorCode::IoFailure, "write failed for " + path);
  }

  static VelocityModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) detail::fail(ErrorCode::IoFailure, "cannot open " + path);
    constexpr std::string_view what = "velocity checkpoint";
    binary::expect_magic(in, magic(), what);
    const auto latent = binary::read_pod<std::uint64_t>(in, what);
    const auto count = binary::read_pod<std::uint64_t>(in, what);
    if (count < 3 || count > 64) {
      detail::fail(ErrorCode::ParseError,
                   "velocity checkpoint: implausible layer count " +
                       std::to_string(count));
    }
    std::vector<std::size_t> widths(count);
    for (auto& w : widths) {
      w = binary::read_pod<std::uint64_t>(in, what);
      if (w == 0 || w > (1u << 20)) {
        detail::fail(ErrorCode::ParseError,
                     "velocity checkpoint: implausible layer width");
      }
    }
    ModelParams params;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const auto in_w = static_cast<Eigen::Index>(widths[l]);
      const auto out_w = static_cast<Eigen::Index>(widths[l + 1]);
      DenseLayer layer{RowMatrix(out_w, in_w), Eigen::VectorXd(out_w)};
      binary::read_doubles(in, layer.weight.data(),
                           static_cast<std::size_t>(layer.weight.size()), what);
      binary::read_doubles(in, layer.bias.data(),
                           static_cast<std::size_t>(layer.bias.size()), what);
      params.layers.push_back(std::move(layer));
    }
    return VelocityModel(latent, std::move(params));
  }

 private:
  static binary::Magic magic() { return binary::make_magic("FKVELO01"); }

  RowMatrix forward(const RowMatrix& input,
                    std::vector<RowMatrix>& acts) const {
    acts.clear();
    acts.push_back(input);
    const std::size_t last = params_.layers.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
      const auto& layer = params_.layers[l];
      RowMatrix z = acts.back() * layer.weight.transpose();
      z.rowwise() += layer.bias.transpose();
      if (l == last) return z;
      acts.push_back(z.array().tanh().matrix());
    }
    return {};
  }

  std::size_t latent_dim_ = 0;
  std::size_t cond_dim_ = 0;
  std::vector<std::size_t> widths_;
  ModelParams params_;
};

/// Assembles the per-frame condition matrix fed to the model: the visible
/// part of a masked latent (if any) followed by external features (if any).
inline RowMatrix assemble_condition(const MaskedLatent* masked,
                                    const RowMatrix* external,
                                    Eigen::Index frames) {
  const Eigen::Index dm = masked ? masked->latent().dim() : 0;
  const Eigen::Index de = external ? external->cols() : 0;
  RowMatrix cond(frames, dm + de);
  if (masked) {
    detail::require(masked->latent().frames() == frames,
                    ErrorCode::ShapeMismatch, "masked latent length differs");
    cond.leftCols(dm) = masked->condition_view();
  }
  if (external && de > 0) {
    detail::require(external->rows() == frames, ErrorCode::ShapeMismatch,
                    "external condition length differs");
    cond.rightCols(de) = *external;
  }
  return cond;
}

/// Loss under a masked-latent condition: the model sees the visible frames
/// of `masked` (plus `external`), and the loss covers the hidden frames only
/// when `masked_only` is set.
inline LossResult cfm_loss(const VelocityModel& model, const LatentSeq& x0,
                           const LatentSeq& x1, double t,
                           const MaskedLatent& masked,
                           const RowMatrix* external = nullptr,
                           bool masked_only = true) {
  const RowMatrix cond = assemble_condition(&masked, external, x1.frames());
  if (!masked_only) return model.loss_and_grad(x0, x1, t, cond);
  return model.loss_and_grad(x0, x1, t, cond, masked.mask());
}

}  // namespace foakit
