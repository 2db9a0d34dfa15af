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

// Filterbank layout (channel placement, per-channel linear kernels), the
// active gain function and the output normalization constant K.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "whis/auditory_scale.hpp"
#include "whis/errors.hpp"
#include "whis/filter_core.hpp"
#include "whis/framer.hpp"
#include "whis/hl0_table.hpp"
#include "whis/parallel.hpp"

namespace whis {

struct GcfbConfig {
  double fs = 48000.0;
  int n_ch = 100;
  double f_lo = 100.0;
  double f_hi = 8000.0;
  double p_gain0 = 100.0;

  // Level estimation: Pc = (1/p) 10 log10((w1 P1^p + w2 P2^p) / (w1 + w2)).
  double w1 = 0.5;
  double w2 = 0.5;
  double p = 1.0;
  double level_shift_erb = 1.0;  // s2 path sits this many Cam above fp1

  std::size_t kernel_len = 4096;
  std::size_t design_fft = 16384;
  double frame_len = 0.001;
  double frame_shift = 0.0005;

  // IO-function tabulation grid.
  double io_min = -30.0;
  double io_max = 130.0;
  double io_step = 0.1;

  GcParams gc;
  Hl0Table hl0;

  // Defaults for a sample rate: f_hi clipped to 0.45 fs, kernel length
  // scaled from 4096 taps at 48 kHz.
  static GcfbConfig for_rate(double fs) {
    GcfbConfig c;
    c.fs = fs;
    c.f_hi = std::min(8000.0, 0.45 * fs);
    c.kernel_len = static_cast<std::size_t>(std::lround(4096.0 * fs / 48000.0));
    return c;
  }

  FrameLayout frame_layout() const {
    return FrameLayout::make(fs, frame_len, frame_shift);
  }

  void validate() const {
    if (!(fs >= 8000.0)) throw ConfigError("GcfbConfig: fs must be >= 8000");
    if (n_ch < 2) throw ConfigError("GcfbConfig: n_ch must be >= 2");
    if (!(f_lo > 0.0 && f_lo < f_hi)) {
      throw ConfigError("GcfbConfig: need 0 < f_lo < f_hi");
    }
    if (f_hi > 0.45 * fs + 1e-9) {
      throw ConfigError("GcfbConfig: f_hi " + std::to_string(f_hi) +
                        " Hz exceeds 0.45 fs");
    }
    if (!(w1 >= 0.0 && w2 >= 0.0 && w1 + w2 > 0.0) || !(p > 0.0)) {
      throw ConfigError("GcfbConfig: level weights must be >= 0, p > 0");
    }
    if (kernel_len < 32 || kernel_len > design_fft) {
      throw ConfigError("GcfbConfig: kernel_len must be in [32, design_fft]");
    }
    if (fft::next_pow2(design_fft) != design_fft) {
      throw ConfigError("GcfbConfig: design_fft must be a power of two");
    }
    if (!(io_min < io_max) || !(io_step > 0.0)) {
      throw ConfigError("GcfbConfig: bad IO grid");
    }
    if (frat(io_min, gc) <= 0.0) {
      throw ConfigError("GcfbConfig: frat must stay positive over the IO grid");
    }
    gc.validate();
    hl0.validate();
  }
};

// HP-AF phase term evaluated at the channel peak for level P.
inline double hpaf_theta_at_peak(double level_db, double fp1,
                                 const GcParams& gc) {
  const double fr2 = frat(level_db, gc) * fp1;
  return std::atan((fp1 - fr2) / (gc.b2 * erb_of_freq(fr2, gc.erb)));
}

// Active gain in dB: HP-AF at fp1 for level Pc relative to its value at
// p_gain0. Pc is clamped to [io_min, p_gain0], so the gain is exactly 0 dB
// from p_gain0 upward.
inline double active_gain(double pc_db, double alpha, double fp1,
                          const GcfbConfig& cfg) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("active_gain: alpha must be in [0, 1]");
  }
  const double pc = std::clamp(pc_db, cfg.io_min, cfg.p_gain0);
  constexpr double kNeperToDb = 20.0 / std::numbers::ln10;
  return kNeperToDb * alpha * cfg.gc.c2_nh *
         (hpaf_theta_at_peak(pc, fp1, cfg.gc) -
          hpaf_theta_at_peak(cfg.p_gain0, fp1, cfg.gc));
}

inline double total_gain(double pc_db, double alpha, double l_pas_db,
                         double fp1, const GcfbConfig& cfg) {
  if (!(l_pas_db >= 0.0)) throw DomainError("total_gain: L_pas must be >= 0");
  return active_gain(pc_db, alpha, fp1, cfg) - l_pas_db;
}

struct Channel {
  ChannelGeometry geom;
  double erbnum = 0.0;
  ChannelGeometry level_geom;  // s2 path
  double level_gain_db = 0.0;  // s2 kernel gain at fp1
  double p_at = 0.0;           // HL-0-dB cochlear input level at fp1
  double k_norm = 0.0;         // G_act^NH(p_at) + p_at
  MinPhaseKernel pgc;
  MinPhaseKernel cascade_nh;
  MinPhaseKernel level2;
};

struct ChannelTable {
  GcfbConfig config;
  std::vector<Channel> channels;
  std::vector<Convolver> pgc_conv;
  std::vector<Convolver> level2_conv;
  std::shared_ptr<const std::vector<Convolver>> nh_conv;

  std::size_t size() const { return channels.size(); }

  std::vector<double> erbnums() const {
    std::vector<double> e(channels.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = channels[i].erbnum;
    return e;
  }

  std::size_t nearest_channel(double f_hz) const {
    std::size_t best = 0;
    double best_d = INFINITY;
    const double e = erbnum_of_freq(f_hz, config.gc.erb);
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const double d = std::abs(channels[i].erbnum - e);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }
};

// Gain (dB) of a kernel's design spectrum at frequency f, interpolated.
inline double spectrum_gain_db(const MagnitudeSpectrum& m, double f) {
  const double pos = f / m.bin_width();
  const auto k = std::min(static_cast<std::size_t>(pos), m.gains.size() - 2);
  const double t = pos - static_cast<double>(k);
  const double g = m.gains[k] + t * (m.gains[k + 1] - m.gains[k]);
  return 20.0 * std::log10(std::max(g, 1e-300));
}

inline Channel make_channel(double fp1, const GcfbConfig& cfg) {
  const GcParams& gc = cfg.gc;
  Channel ch;
  ch.geom = ChannelGeometry::from_peak(fp1, gc);
  ch.erbnum = erbnum_of_freq(ch.geom.fp1, gc.erb);
  const double f2 = freq_of_erbnum(ch.erbnum + cfg.level_shift_erb, gc.erb);
  ch.level_geom = ChannelGeometry::from_peak(f2, gc);
  ch.p_at = cfg.hl0.level_at(std::clamp(ch.geom.fp1, 20.0, 16000.0));
  ch.k_norm = active_gain(ch.p_at, 1.0, ch.geom.fp1, cfg) + ch.p_at;

  const auto pgc = pgc_spectrum(ch.geom, cfg.fs, cfg.design_fft, gc);
  const auto nh = cascade_spectrum(ch.geom, 1.0, cfg.fs, cfg.design_fft, gc);
  const auto lv =
      cascade_spectrum(ch.level_geom, 1.0, cfg.fs, cfg.design_fft, gc);
  ch.level_gain_db = spectrum_gain_db(lv, ch.geom.fp1);
  ch.pgc = design_minphase(pgc, cfg.kernel_len);
  ch.cascade_nh = design_minphase(nh, cfg.kernel_len);
  ch.level2 = design_minphase(lv, cfg.kernel_len);
  return ch;
}

// Channels with fp1 equally spaced in ERB-number over [f_lo, f_hi].
inline ChannelTable build_filterbank(const GcfbConfig& cfg) {
  cfg.validate();
  ChannelTable t;
  t.config = cfg;
  const double e_lo = erbnum_of_freq(cfg.f_lo, cfg.gc.erb);
  const double e_hi = erbnum_of_freq(cfg.f_hi, cfg.gc.erb);
  const auto n = static_cast<std::size_t>(cfg.n_ch);
  t.channels.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const double e = e_lo + (e_hi - e_lo) * static_cast<double>(i) /
                                static_cast<double>(n - 1);
    t.channels[i] = make_channel(freq_of_erbnum(e, cfg.gc.erb), cfg);
  });
  auto nh = std::make_shared<std::vector<Convolver>>();
  for (const auto& ch : t.channels) {
    t.pgc_conv.emplace_back(ch.pgc);
    t.level2_conv.emplace_back(ch.level2);
    nh->emplace_back(ch.cascade_nh);
  }
  t.nh_conv = std::move(nh);
  return t;
}

// Signal-path kernels for one listener (per-channel alpha).
struct CascadeBank {
  std::vector<double> alphas;
  std::vector<MinPhaseKernel> kernels;
  std::shared_ptr<const std::vector<Convolver>> conv;

  std::size_t size() const { return kernels.size(); }
};

inline CascadeBank make_cascade_bank(const ChannelTable& t,
                                     const std::vector<double>& alphas) {
  if (alphas.size() != t.size()) {
    throw DomainError("make_cascade_bank: one alpha per channel required");
  }
  CascadeBank b;
  b.alphas = alphas;
  b.kernels.resize(t.size());
  const bool all_nh =
      std::all_of(alphas.begin(), alphas.end(), [](double a) { return a == 1.0; });
  if (all_nh) {
    for (std::size_t i = 0; i < t.size(); ++i) b.kernels[i] = t.channels[i].cascade_nh;
    b.conv = t.nh_conv;
    return b;
  }
  const auto& cfg = t.config;
  parallel_for(t.size(), [&](std::size_t i) {
    if (alphas[i] == 1.0) {
      b.kernels[i] = t.channels[i].cascade_nh;
      return;
    }
    const auto m = cascade_spectrum(t.channels[i].geom, alphas[i], cfg.fs,
                                    cfg.design_fft, cfg.gc);
    b.kernels[i] = design_minphase(m, cfg.kernel_len);
  });
  auto conv = std::make_shared<std::vector<Convolver>>();
  conv->reserve(t.size());
  for (const auto& k : b.kernels) conv->emplace_back(k);
  b.conv = std::move(conv);
  return b;
}

inline CascadeBank nh_cascade_bank(const ChannelTable& t) {
  return make_cascade_bank(t, std::vector<double>(t.size(), 1.0));
}

}  // namespace whis
