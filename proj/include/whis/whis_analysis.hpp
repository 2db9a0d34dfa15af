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

// Input-referred loss field: the frame-by-frame attenuation that makes a
// normal-hearing excitation pattern approximate the impaired one.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <vector>

#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/framer.hpp"
#include "whis/gcfb.hpp"
#include "whis/hl_model.hpp"
#include "whis/parallel.hpp"
#include "whis/signal.hpp"

namespace whis {

struct LossField {
  FrameMatrix l_total;  // L_act + HL_pas, dB
  FrameMatrix l_act;
  std::vector<double> hl_pas;
  std::size_t clamped = 0;  // entries where a negative L_act was raised to 0

  std::size_t channels() const { return l_total.rows; }
  std::size_t frames() const { return l_total.cols; }

  FrameSeries row_series(std::size_t c, double sign = 1.0) const {
    FrameSeries s;
    s.frame_shift = l_total.frame_shift;
    s.frame_len = l_total.frame_len;
    s.t0 = l_total.t0;
    s.values.assign(l_total.row(c).begin(), l_total.row(c).end());
    for (double& v : s.values) v *= sign;
    return s;
  }
};

// L_act = Pc - F_NH^-1(F_HL(Pc)); L_total = L_act + HL_pas.
inline LossField frame_loss(const FrameMatrix& pc, const HearingSpec& spec,
                            const ListenerCurves& curves, double io_min,
                            double io_max) {
  if (spec.size() != pc.rows || curves.nh.size() != pc.rows ||
      curves.hl.size() != pc.rows) {
    throw DomainError("frame_loss: channel count mismatch between Pc (" +
                      std::to_string(pc.rows) + "), spec (" +
                      std::to_string(spec.size()) + ") and curves");
  }
  LossField lf;
  lf.l_total = pc;
  lf.l_act = pc;
  lf.hl_pas.resize(pc.rows);
  std::atomic<std::size_t> clamped{0};
  parallel_for(pc.rows, [&](std::size_t c) {
    const double hl_pas = spec.channels[c].hl_pas;
    lf.hl_pas[c] = hl_pas;
    std::size_t local = 0;
    for (std::size_t k = 0; k < pc.cols; ++k) {
      const double p = std::clamp(pc.at(c, k), io_min, io_max);
      double l_act = p - io_inverse(curves.nh[c], curves.hl[c].output_at(p)).p_in;
      if (l_act < 0.0) {
        if (l_act < -1e-9) ++local;
        l_act = 0.0;
      }
      lf.l_act.at(c, k) = l_act;
      lf.l_total.at(c, k) = l_act + hl_pas;
    }
    clamped += local;
  });
  lf.clamped = clamped.load();
  return lf;
}

inline LossField frame_loss(const FrameMatrix& pc, const HearingSpec& spec,
                            const ListenerCurves& curves,
                            const GcfbConfig& cfg) {
  return frame_loss(pc, spec, curves, cfg.io_min, cfg.io_max);
}

// Level estimation followed by the composite inverse-IO construction.
inline LossField analyze_loss(const CalibratedSignal& x,
                              const HearingSpec& spec,
                              const ChannelTable& table) {
  const FrameMatrix pc = estimate_level(x, table);
  return frame_loss(pc, spec, listener_curves(spec, table), table.config);
}

// Each channel's linear cascade output scaled sample-wise by -L_total.
inline std::vector<std::vector<double>> attenuated_channels(
    const CalibratedSignal& x, const CascadeBank& bank, const LossField& loss) {
  if (bank.size() != loss.channels()) {
    throw DomainError("attenuated_channels: bank/loss channel mismatch");
  }
  std::vector<std::vector<double>> out(bank.size());
  if (x.samples.empty()) return out;
  const std::size_t klen = bank.kernels.front().length();
  const auto blocks = block_spectra(x.samples, klen);
  parallel_for(bank.size(), [&](std::size_t c) {
    auto y = (*bank.conv)[c].apply(blocks);
    const auto g = resample_gain(loss.row_series(c, -1.0), x.fs, y.size());
    for (std::size_t n = 0; n < y.size(); ++n) y[n] *= g[n];
    out[c] = std::move(y);
  });
  return out;
}

}  // namespace whis
