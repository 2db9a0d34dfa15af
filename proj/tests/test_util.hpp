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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "whis.hpp"

namespace whis::testing {

// Default 48 kHz, 100-channel filterbank, built once per test binary.
inline const ChannelTable& default_table() {
  static const ChannelTable t = build_filterbank(GcfbConfig{});
  return t;
}

inline CalibratedSignal sine(double freq, double level_db, double seconds,
                             double fs = 48000.0, double ramp = 0.005) {
  return make_tone({freq, level_db, seconds, ramp}, fs);
}

inline double rms_db(std::span<const double> x, std::size_t from,
                     std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += x[i] * x[i];
  return 10.0 * std::log10(acc / static_cast<double>(to - from));
}

// Steady-state maximum of an EP row or matrix, skipping the onset.
inline double steady_max(const FrameMatrix& m, std::size_t row, std::size_t skip) {
  double v = -INFINITY;
  for (std::size_t k = skip; k + skip < m.cols; ++k) v = std::max(v, m.at(row, k));
  return v;
}

inline double steady_mean(const FrameMatrix& m, std::size_t row, std::size_t skip) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = skip; k + skip < m.cols; ++k, ++n) acc += m.at(row, k);
  return acc / static_cast<double>(n);
}

inline double matrix_steady_max(const FrameMatrix& m, std::size_t skip) {
  double v = -INFINITY;
  for (std::size_t r = 0; r < m.rows; ++r) v = std::max(v, steady_max(m, r, skip));
  return v;
}

}  // namespace whis::testing
