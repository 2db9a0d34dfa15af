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

// Hanning-windowed frame RMS (signal rate -> frame rate) and the reverse
// mapping of frame-rate dB values to per-sample linear gains.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "whis/errors.hpp"

namespace whis {

inline constexpr double kFloorDb = -100.0;

// Frame k is centered on t0 + k * frame_shift seconds.
struct FrameSeries {
  std::vector<double> values;
  double frame_shift = 0.0005;
  double frame_len = 0.001;
  double t0 = 0.0;

  std::size_t size() const { return values.size(); }
  double center(std::size_t k) const { return t0 + frame_shift * k; }
};

struct FrameLayout {
  std::size_t len = 0;  // samples
  std::size_t hop = 0;  // samples
  double fs = 0.0;

  static FrameLayout make(double fs, double frame_len_s, double frame_shift_s) {
    if (!(fs >= 8000.0)) throw DomainError("frame layout: fs must be >= 8000");
    FrameLayout l;
    l.fs = fs;
    l.len = static_cast<std::size_t>(std::lround(frame_len_s * fs));
    l.hop = static_cast<std::size_t>(std::lround(frame_shift_s * fs));
    if (l.len < 2) throw DomainError("frame layout: frame_len below 2 samples");
    if (l.hop < 1) throw DomainError("frame layout: frame_shift below 1 sample");
    return l;
  }

  std::size_t frames_for(std::size_t n_samples) const {
    return n_samples == 0 ? 0 : (n_samples - 1) / hop + 1;
  }
  double shift_seconds() const { return static_cast<double>(hop) / fs; }
  double len_seconds() const { return static_cast<double>(len) / fs; }
};

inline std::vector<double> hanning(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
  }
  return w;
}

// Normalized so that a constant signal of amplitude a yields a.
inline FrameSeries frame_rms(std::span<const double> x, const FrameLayout& l) {
  FrameSeries s;
  s.frame_shift = l.shift_seconds();
  s.frame_len = l.len_seconds();
  s.t0 = 0.0;
  const std::size_t n_frames = l.frames_for(x.size());
  s.values.resize(n_frames);
  const auto w = hanning(l.len);
  double w2sum = 0.0;
  for (double v : w) w2sum += v * v;
  const auto half = static_cast<std::ptrdiff_t>(l.len / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(k * l.hop) - half;
    double acc = 0.0;
    for (std::size_t i = 0; i < l.len; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx < 0 || idx >= n) continue;
      const double v = w[i] * x[static_cast<std::size_t>(idx)];
      acc += v * v;
    }
    s.values[k] = std::sqrt(acc / w2sum);
  }
  return s;
}

inline FrameSeries frame_rms(std::span<const double> x, double fs,
                             double frame_len = 0.001,
                             double frame_shift = 0.0005) {
  return frame_rms(x, FrameLayout::make(fs, frame_len, frame_shift));
}

// 20 log10(rms) + reference, clipped at the floor.
inline double amplitude_to_db(double rms, double ref_db = 0.0,
                              double floor_db = kFloorDb) {
  if (!(rms > 0.0)) return floor_db;
  return std::max(20.0 * std::log10(rms) + ref_db, floor_db);
}

inline FrameSeries to_db(FrameSeries s, double ref_db = 0.0,
                         double floor_db = kFloorDb) {
  for (double& v : s.values) v = amplitude_to_db(v, ref_db, floor_db);
  return s;
}

// Piecewise-linear interpolation of dB values at sample times, held
// constant beyond the first and last frame centers, returned as linear gain.
inline std::vector<double> resample_gain(const FrameSeries& db, double fs,
                                         std::size_t n_samples) {
  if (db.values.empty()) throw DomainError("resample_gain: empty series");
  std::vector<double> g(n_samples);
  const std::size_t last = db.values.size() - 1;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double pos = (n / fs - db.t0) / db.frame_shift;
    double v;
    if (pos <= 0.0) {
      v = db.values.front();
    } else if (pos >= static_cast<double>(last)) {
      v = db.values.back();
    } else {
      const auto k = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(k);
      v = db.values[k] + frac * (db.values[k + 1] - db.values[k]);
    }
    g[n] = std::pow(10.0, v / 20.0);
  }
  return g;
}

}  // namespace whis
