// Copyright 2026 The WHIS Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whis/errors.hpp"

namespace whis {

inline constexpr double kDefaultSplRef = 94.0;  // RMS 1.0 == 1 Pa

inline bool supported_rate(double fs) {
  for (double r : {16000.0, 22050.0, 24000.0, 44100.0, 48000.0}) {
    if (fs == r) return true;
  }
  return false;
}

// Samples whose RMS of 1.0 corresponds to spl_ref dB SPL.
struct CalibratedSignal {
  std::vector<double> samples;
  double fs = 48000.0;
  double spl_ref = kDefaultSplRef;
  std::optional<double> target_leq;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / fs; }

  void validate() const {
    if (!supported_rate(fs)) {
      throw ProcessingError("uncalibrated signal: unsupported sample rate " +
                            std::to_string(fs));
    }
    if (!std::isfinite(spl_ref)) {
      throw ProcessingError("uncalibrated signal: SPL reference not finite");
    }
    for (double v : samples) {
      if (!std::isfinite(v)) {
        throw ProcessingError("uncalibrated signal: non-finite sample");
      }
    }
  }
};

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

// Equivalent continuous level in dB SPL.
inline double leq(const CalibratedSignal& s) {
  const double r = rms(s.samples);
  if (r <= 0.0) return -INFINITY;
  return 20.0 * std::log10(r) + s.spl_ref;
}

inline CalibratedSignal set_leq(CalibratedSignal s, double target_db) {
  const double r = rms(s.samples);
  if (!(r > 0.0)) throw ProcessingError("set_leq: signal is silent");
  const double gain = std::pow(10.0, (target_db - s.spl_ref) / 20.0) / r;
  for (double& v : s.samples) v *= gain;
  s.target_leq = target_db;
  return s;
}

// Channel x frame matrix with frame timing; rows are filterbank channels.
struct FrameMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double frame_shift = 0.0005;
  double frame_len = 0.001;
  double t0 = 0.0;
  std::vector<double> row_freqs;  // fp1 per channel

  FrameMatrix() = default;
  FrameMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  double frame_time(std::size_t c) const { return t0 + frame_shift * c; }
  double max() const {
    return data.empty() ? -INFINITY : *std::max_element(data.begin(), data.end());
  }
};

using ExcitationPattern = FrameMatrix;

}  // namespace whis
