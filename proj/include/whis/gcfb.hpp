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

// Frame-based gammachirp filterbank: two-path level estimation and
// excitation-pattern analysis for normal-hearing or impaired settings.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/filter_core.hpp"
#include "whis/framer.hpp"
#include "whis/hl_model.hpp"
#include "whis/parallel.hpp"
#include "whis/signal.hpp"

namespace whis {

inline void check_signal_for_table(const CalibratedSignal& x,
                                   const ChannelTable& table) {
  x.validate();
  if (x.fs != table.config.fs) {
    throw ProcessingError("signal rate " + std::to_string(x.fs) +
                          " Hz does not match filterbank rate " +
                          std::to_string(table.config.fs) + " Hz");
  }
}

inline FrameMatrix empty_frames(const ChannelTable& table, std::size_t n_frames,
                                double fill) {
  const auto layout = table.config.frame_layout();
  FrameMatrix m(table.size(), n_frames, fill);
  m.frame_shift = layout.shift_seconds();
  m.frame_len = layout.len_seconds();
  m.row_freqs.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    m.row_freqs[i] = table.channels[i].geom.fp1;
  }
  return m;
}

// Pc for one channel from the s1 (pGC) and s2 (shifted cascade) frame RMS.
inline void combine_levels(const FrameSeries& s1, const FrameSeries& s2,
                           double s2_gain_db, double spl_ref,
                           const GcfbConfig& cfg, std::span<double> out) {
  const double g2 = std::pow(10.0, -s2_gain_db / 20.0);
  const double wsum = cfg.w1 + cfg.w2;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double r1 = s1.values[k];
    const double r2 = s2.values[k] * g2;
    const double pw = (cfg.w1 * std::pow(r1 * r1, cfg.p) +
                       cfg.w2 * std::pow(r2 * r2, cfg.p)) /
                      wsum;
    out[k] = pw > 0.0
                 ? std::max(10.0 / cfg.p * std::log10(pw) + spl_ref, kFloorDb)
                 : kFloorDb;
  }
}

inline FrameMatrix estimate_level(const CalibratedSignal& x,
                                  const ChannelTable& table,
                                  const BlockSpectra& blocks) {
  const auto& cfg = table.config;
  const auto layout = cfg.frame_layout();
  FrameMatrix pc = empty_frames(table, layout.frames_for(x.size()), kFloorDb);
  if (x.samples.empty()) return pc;
  parallel_for(table.size(), [&](std::size_t c) {
    const auto y1 = table.pgc_conv[c].apply(blocks);
    const auto y2 = table.level2_conv[c].apply(blocks);
    combine_levels(frame_rms(y1, layout), frame_rms(y2, layout),
                   table.channels[c].level_gain_db, x.spl_ref, cfg, pc.row(c));
  });
  return pc;
}

// Pc: channel x frame estimated level, dB SPL.
inline FrameMatrix estimate_level(const CalibratedSignal& x,
                                  const ChannelTable& table) {
  check_signal_for_table(x, table);
  if (x.samples.empty()) return estimate_level(x, table, BlockSpectra{});
  return estimate_level(x, table,
                        block_spectra(x.samples, table.config.kernel_len));
}

// Analyzer bound to one listener; the signal-path kernels are designed once.
class Gcfb {
 public:
  Gcfb(const ChannelTable& table, HearingSpec spec)
      : table_(&table),
        spec_(std::move(spec)),
        bank_(make_cascade_bank(table, spec_.alphas())) {
    if (spec_.size() != table.size()) {
      throw DomainError("Gcfb: spec has " + std::to_string(spec_.size()) +
                        " channels, table has " + std::to_string(table.size()));
    }
  }

  explicit Gcfb(const ChannelTable& table)
      : Gcfb(table, HearingSpec::normal(table.size())) {}

  const ChannelTable& table() const { return *table_; }
  const HearingSpec& spec() const { return spec_; }
  const CascadeBank& bank() const { return bank_; }

  // Excitation pattern in dB re the NH absolute threshold of each channel.
  ExcitationPattern analyze(const CalibratedSignal& x) const {
    check_signal_for_table(x, *table_);
    const auto& cfg = table_->config;
    const auto layout = cfg.frame_layout();
    ExcitationPattern ep =
        empty_frames(*table_, layout.frames_for(x.size()), kFloorDb);
    if (x.samples.empty()) return ep;
    const auto blocks = block_spectra(x.samples, cfg.kernel_len);
    const FrameMatrix pc = estimate_level(x, *table_, blocks);
    parallel_for(table_->size(), [&](std::size_t c) {
      const auto& ch = table_->channels[c];
      const auto& hs = spec_.channels[c];
      const auto y = (*bank_.conv)[c].apply(blocks);
      const auto rms = frame_rms(y, layout);
      auto row = ep.row(c);
      for (std::size_t k = 0; k < row.size(); ++k) {
        const double level = amplitude_to_db(rms.values[k], x.spl_ref);
        if (level <= kFloorDb) continue;
        const double out =
            level + total_gain(pc.at(c, k), hs.alpha, hs.l_pas, ch.geom.fp1, cfg) -
            ch.k_norm;
        row[k] = std::max(out, kFloorDb);
      }
    });
    return ep;
  }

 private:
  const ChannelTable* table_;
  HearingSpec spec_;
  CascadeBank bank_;
};

inline ExcitationPattern analyze(const CalibratedSignal& x,
                                 const HearingSpec& spec,
                                 const ChannelTable& table) {
  return Gcfb(table, spec).analyze(x);
}

}  // namespace whis
