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

// CSV and JSON renderings of analysis results.

#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "whis/eval.hpp"
#include "whis/hl_model.hpp"
#include "whis/signal.hpp"

namespace whis {

// Header row holds the frame times; each row is led by the channel's fp1.
inline void write_matrix_csv(std::ostream& os, const FrameMatrix& m) {
  os.precision(10);
  os << "fp1_hz";
  for (std::size_t k = 0; k < m.cols; ++k) os << ',' << m.frame_time(k);
  os << '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    os << (r < m.row_freqs.size() ? m.row_freqs[r] : static_cast<double>(r));
    for (std::size_t k = 0; k < m.cols; ++k) os << ',' << m.at(r, k);
    os << '\n';
  }
}

inline void write_io_csv(std::ostream& os,
                         const std::vector<IoSweepResult>& sweeps) {
  os << "label,freq_hz,level_db,output_db\n";
  for (const auto& s : sweeps) {
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
      os << s.label << ',' << s.freq << ',' << s.levels[i] << ','
         << s.outputs[i] << '\n';
    }
  }
}

// Keeps every step-th channel and frame, taking the maximum over each block
// so short peaks stay visible.
inline FrameMatrix downsample_max(const FrameMatrix& m, std::size_t ch_step,
                                  std::size_t frame_step) {
  ch_step = std::max<std::size_t>(ch_step, 1);
  frame_step = std::max<std::size_t>(frame_step, 1);
  const std::size_t rows = (m.rows + ch_step - 1) / ch_step;
  const std::size_t cols = (m.cols + frame_step - 1) / frame_step;
  FrameMatrix out(rows, cols, -INFINITY);
  out.frame_shift = m.frame_shift * static_cast<double>(frame_step);
  out.frame_len = m.frame_len;
  out.t0 = m.t0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (r * ch_step < m.row_freqs.size()) out.row_freqs.push_back(m.row_freqs[r * ch_step]);
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t k = 0; k < m.cols; ++k) {
      double& o = out.at(r / ch_step, k / frame_step);
      o = std::max(o, m.at(r, k));
    }
  }
  return out;
}

inline nlohmann::json matrix_to_json(const FrameMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return {{"fp1_hz", m.row_freqs},   {"frame_shift_s", m.frame_shift},
          {"t0_s", m.t0},            {"channels", m.rows},
          {"frames", m.cols},        {"values_db", std::move(rows)}};
}

inline nlohmann::json io_curve_to_json(const IoCurve& c, double step_db) {
  nlohmann::json in = nlohmann::json::array();
  nlohmann::json out = nlohmann::json::array();
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(step_db / c.step)));
  for (std::size_t i = 0; i < c.p_out.size(); i += stride) {
    in.push_back(c.input_at(i));
    out.push_back(c.p_out[i]);
  }
  return {{"alpha", c.alpha}, {"input_db", in}, {"output_db", out}};
}

inline nlohmann::json split_to_json(const HlSplit& s) {
  return {{"hl_total", s.hl_total}, {"hl_act", s.hl_act},
          {"hl_pas", s.hl_pas},     {"alpha_requested", s.alpha_requested},
          {"alpha", s.alpha}};
}

}  // namespace whis
