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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "foakit/error.hpp"
#include "foakit/foa.hpp"

namespace foakit {

struct StftConfig {
  std::vector<std::size_t> window_sizes{512, 1024, 2048};
  double hop_fraction = 0.25;

  void validate() const {
    detail::require(!window_sizes.empty(), ErrorCode::InvalidArgument,
                    "at least one STFT window size required");
    for (std::size_t i = 0; i < window_sizes.size(); ++i) {
      detail::require(window_sizes[i] >= 2, ErrorCode::InvalidArgument,
                      "STFT window sizes must be >= 2");
      if (i > 0) {
        detail::require(window_sizes[i] > window_sizes[i - 1],
                        ErrorCode::InvalidArgument,
                        "STFT window sizes must be strictly increasing");
      }
    }
    detail::require(hop_fraction > 0.0 && hop_fraction <= 1.0,
                    ErrorCode::InvalidArgument, "hop fraction must be in (0, 1]");
  }

  std::size_t hop(std::size_t window) const {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(hop_fraction * window)));
  }
};

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

/// Magnitude spectrogram, frames x (window/2 + 1) stored row-major.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> magnitude;

  double at(std::size_t frame, std::size_t bin) const {
    return magnitude[frame * bins + bin];
  }
};

/// Centered STFT magnitude: the signal is zero-padded by window/2 on both
/// sides so every sample falls strictly inside at least one frame.
inline Spectrogram magnitude_spectrogram(std::span<const double> signal,
                                         std::size_t window, std::size_t hop) {
  detail::require(window >= 2 && hop >= 1, ErrorCode::InvalidArgument,
                  "invalid STFT geometry");
  const std::size_t pad = window / 2;
  std::vector<double> padded(signal.size() + 2 * pad, 0.0);
  std::copy(signal.begin(), signal.end(), padded.begin() + pad);

  Spectrogram spec;
  spec.bins = window / 2 + 1;
  spec.frames = padded.size() < window ? 1 : 1 + (padded.size() - window) / hop;
  if (padded.size() < window) padded.resize(window, 0.0);
  spec.magnitude.resize(spec.frames * spec.bins);

  const std::vector<double> win = hann_window(window);
  Eigen::FFT<double> fft;
  std::vector<double> frame(window);
  std::vector<std::complex<double>> bins;
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < window; ++i) frame[i] = padded[start + i] * win[i];
    fft.fwd(bins, frame);
    for (std::size_t k = 0; k < spec.bins; ++k) {
      spec.magnitude[f * spec.bins + k] = std::abs(bins[k]);
    }
  }
  return spec;
}

/// Spectral convergence plus mean absolute log-magnitude difference between
/// two single-channel signals at one resolution; `reference` normalises the
/// convergence term.
inline double single_resolution_distance(std::span<const double> estimate,
                                         std::span<const double> reference,
                                         std::size_t window, std::size_t hop) {
  constexpr double kLogFloor = 1e-7;
  constexpr double kNormFloor = 1e-12;
  const Spectrogram a = magnitude_spectrogram(estimate, window, hop);
  const Spectrogram b = magnitude_spectrogram(reference, window, hop);

  double diff_sq = 0.0, ref_sq = 0.0, log_l1 = 0.0;
  for (std::size_t i = 0; i < a.magnitude.size(); ++i) {
    const double d = a.magnitude[i] - b.magnitude[i];
    diff_sq += d * d;
    ref_sq += b.magnitude[i] * b.magnitude[i];
    log_l1 += std::fabs(std::log(a.magnitude[i] + kLogFloor) -
                        std::log(b.magnitude[i] + kLogFloor));
  }
  const double convergence =
      diff_sq == 0.0 ? 0.0
                     : std::sqrt(diff_sq) / std::max(std::sqrt(ref_sq), kNormFloor);
  return convergence + log_l1 / static_cast<double>(a.magnitude.size());
}

/// Multi-resolution STFT distance between two FOA signals: per channel the
/// mean over resolutions, then channels weighted 1/4 each.
inline double multires_stft_distance(const FoaSignal& estimate,
                                     const FoaSignal& reference,
                                     const StftConfig& cfg = {}) {
  cfg.validate();
  if (estimate.size() != reference.size()) {
    detail::fail(ErrorCode::LengthMismatch, "signals differ in length");
  }
  if (estimate.sample_rate() != reference.sample_rate()) {
    detail::fail(ErrorCode::LengthMismatch, "signals differ in sample rate");
  }
  double total = 0.0;
  for (std::size_t ch = 0; ch < 4; ++ch) {
    double per_channel = 0.0;
    for (std::size_t window : cfg.window_sizes) {
      per_channel += single_resolution_distance(
          estimate.channel(ch), reference.channel(ch), window, cfg.hop(window));
    }
    total += 0.25 * per_channel / static_cast<double>(cfg.window_sizes.size());
  }
  return total;
}

}  // namespace foakit
