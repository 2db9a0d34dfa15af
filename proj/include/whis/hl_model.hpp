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

// Audiograms, compression health, cochlear IO functions and the
// active/passive split of the total hearing loss.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "whis/auditory_scale.hpp"
#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/parallel.hpp"

namespace whis {

struct Audiogram {
  std::string name;
  std::vector<double> freqs_hz;
  std::vector<double> hl_db;

  void validate() const {
    if (freqs_hz.empty() || freqs_hz.size() != hl_db.size()) {
      throw ConfigError("audiogram '" + name +
                        "': freqs_hz and hl_db must be non-empty and of "
                        "equal length");
    }
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
      if (!(freqs_hz[i] > 0.0)) {
        throw ConfigError("audiogram '" + name + "': frequency " +
                          std::to_string(i) + " must be > 0");
      }
      if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])) {
        throw ConfigError("audiogram '" + name +
                          "': frequencies must be strictly increasing");
      }
      if (!(hl_db[i] >= -10.0 && hl_db[i] <= 120.0)) {
        throw ConfigError("audiogram '" + name + "': hearing level at " +
                          std::to_string(freqs_hz[i]) +
                          " Hz outside [-10, 120] dB HL");
      }
    }
  }

  static Audiogram flat(double level_db, std::string name = "flat") {
    return {std::move(name),
            {125, 250, 500, 1000, 2000, 4000, 8000},
            std::vector<double>(7, level_db)};
  }
};

// Average hearing level of 80-year-old males.
inline Audiogram audiogram_80yr_male() {
  return {"80yr-male",
          {125, 250, 500, 1000, 2000, 4000, 8000},
          {23.5, 24.3, 26.8, 27.9, 32.9, 48.3, 68.5}};
}

inline std::vector<Audiogram> preset_audiograms() {
  return {Audiogram::flat(0.0, "normal"), audiogram_80yr_male()};
}

inline std::optional<Audiogram> find_preset(const std::string& id) {
  for (auto& a : preset_audiograms()) {
    if (a.name == id) return a;
  }
  return std::nullopt;
}

// One alpha broadcast to all frequencies, or one per audiogram frequency.
struct AlphaProfile {
  std::vector<double> values{1.0};

  static AlphaProfile uniform(double a) { return {{a}}; }

  void validate(std::size_t n_freqs) const {
    if (values.empty() || (values.size() != 1 && values.size() != n_freqs)) {
      throw ConfigError("alpha: expected a scalar or one value per audiogram "
                        "frequency");
    }
    for (double a : values) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ConfigError("alpha: values must lie in [0, 1]");
      }
    }
  }

  double at(std::size_t i) const {
    return values.size() == 1 ? values.front() : values.at(i);
  }
};

// Linear interpolation on the ERB-number axis, constant outside the range.
inline double interp_on_erbnum(const std::vector<double>& freqs,
                               const std::vector<double>& vals, double f_hz,
                               const ErbScale& s = {}) {
  if (f_hz <= freqs.front()) return vals.front();
  if (f_hz >= freqs.back()) return vals.back();
  std::size_t i = 1;
  while (freqs[i] < f_hz) ++i;
  const double e0 = erbnum_of_freq(freqs[i - 1], s);
  const double e1 = erbnum_of_freq(freqs[i], s);
  const double t = (erbnum_of_freq(f_hz, s) - e0) / (e1 - e0);
  return vals[i - 1] + t * (vals[i] - vals[i - 1]);
}

// What split_hl and io_function need to know about a channel.
struct ChannelRef {
  double fp1 = 0.0;
  double k_norm = 0.0;

  static ChannelRef of(const Channel& ch) { return {ch.geom.fp1, ch.k_norm}; }

  // A virtual channel whose peak sits exactly at f_hz.
  static ChannelRef at_frequency(double f_hz, const GcfbConfig& cfg) {
    const double p_at = cfg.hl0.level_at(f_hz);
    return {f_hz, active_gain(p_at, 1.0, f_hz, cfg) + p_at};
  }
};

// P_out = G_act(P_in) + P_in - K on a uniform input grid.
struct IoCurve {
  double p_min = -30.0;
  double step = 0.1;
  double alpha = 1.0;
  std::vector<double> p_out;

  double p_max() const { return p_min + step * (p_out.size() - 1); }
  double input_at(std::size_t i) const { return p_min + step * i; }

  double output_at(double p_in) const {
    const double pos = (p_in - p_min) / step;
    if (pos <= 0.0) return p_out.front();
    const std::size_t last = p_out.size() - 1;
    if (pos >= static_cast<double>(last)) return p_out.back();
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return p_out[i] + t * (p_out[i + 1] - p_out[i]);
  }
};

struct IoInverse {
  double p_in = 0.0;
  bool saturated = false;
};

inline IoCurve io_function(double alpha, const ChannelRef& ch,
                           const GcfbConfig& cfg) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("io_function: alpha must be in [0, 1]");
  }
  IoCurve c;
  c.p_min = cfg.io_min;
  c.step = cfg.io_step;
  c.alpha = alpha;
  const auto n =
      static_cast<std::size_t>(std::lround((cfg.io_max - cfg.io_min) / cfg.io_step)) + 1;
  c.p_out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = c.input_at(i);
    c.p_out[i] = active_gain(p, alpha, ch.fp1, cfg) + p - ch.k_norm;
    if (i > 0 && !(c.p_out[i] > c.p_out[i - 1])) {
      throw ConfigError("io_function: IO curve not strictly increasing at " +
                        std::to_string(p) + " dB (fp1 " +
                        std::to_string(ch.fp1) + " Hz, alpha " +
                        std::to_string(alpha) + ")");
    }
  }
  return c;
}

// Piecewise-linear inverse; clamps to the grid ends and flags saturation.
inline IoInverse io_inverse(const IoCurve& c, double p_out) {
  const auto& y = c.p_out;
  if (p_out <= y.front()) return {c.p_min, p_out < y.front()};
  if (p_out >= y.back()) return {c.p_max(), p_out > y.back()};
  const auto it = std::upper_bound(y.begin(), y.end(), p_out);
  const auto i = static_cast<std::size_t>(it - y.begin()) - 1;
  const double t = (p_out - y[i]) / (y[i + 1] - y[i]);
  return {c.input_at(i) + t * c.step, false};
}

struct HlSplit {
  double hl_total = 0.0;
  double alpha_requested = 1.0;
  double alpha = 1.0;  // compensated
  double hl_act = 0.0;
  double hl_pas = 0.0;
  double l_pas = 0.0;  // vertical shift of the IO curve
};

inline HlSplit split_hl(double hl_total, double alpha_req, const ChannelRef& ch,
                        const GcfbConfig& cfg) {
  if (!(hl_total >= 0.0)) throw DomainError("split_hl: HL_total must be >= 0");
  if (!(alpha_req >= 0.0 && alpha_req <= 1.0)) {
    throw DomainError("split_hl: alpha must be in [0, 1]");
  }
  const IoCurve nh = io_function(1.0, ch, cfg);
  const double threshold_nh = io_inverse(nh, 0.0).p_in;
  if (threshold_nh + hl_total > cfg.io_max) {
    throw DomainError("split_hl: HL_total " + std::to_string(hl_total) +
                      " dB exceeds the representable input range");
  }
  auto hl_act_at = [&](double a) {
    return io_inverse(io_function(a, ch, cfg), 0.0).p_in - threshold_nh;
  };

  HlSplit s;
  s.hl_total = hl_total;
  s.alpha_requested = alpha_req;
  s.alpha = alpha_req;
  s.hl_act = hl_act_at(alpha_req);
  if (s.hl_act > hl_total) {
    // Smallest alpha whose active loss fits inside the total loss.
    double lo = alpha_req;
    double hi = 1.0;
    for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hl_act_at(mid) <= hl_total) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    s.alpha = hi;
    s.hl_act = std::min(hl_act_at(hi), hl_total);
  }
  s.hl_act = std::max(s.hl_act, 0.0);
  s.hl_pas = hl_total - s.hl_act;
  const IoCurve hl = io_function(s.alpha, ch, cfg);
  s.l_pas = std::max(0.0, hl.output_at(threshold_nh + hl_total));
  return s;
}

struct HearingSpec {
  std::string label = "NH";
  std::vector<HlSplit> channels;

  std::size_t size() const { return channels.size(); }

  std::vector<double> alphas() const {
    std::vector<double> a(channels.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = channels[i].alpha;
    return a;
  }

  static HearingSpec normal(std::size_t n_ch) {
    HearingSpec s;
    s.label = "NH";
    s.channels.resize(n_ch);
    return s;
  }
};

inline HearingSpec resolve_spec(const Audiogram& ag, const AlphaProfile& alpha,
                                const ChannelTable& table) {
  ag.validate();
  alpha.validate(ag.freqs_hz.size());
  std::vector<double> alphas(ag.freqs_hz.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) alphas[i] = alpha.at(i);

  const auto& cfg = table.config;
  HearingSpec spec;
  spec.label = ag.name;
  spec.channels.resize(table.size());
  parallel_for(table.size(), [&](std::size_t i) {
    const double f = table.channels[i].geom.fp1;
    const double hl =
        std::max(0.0, interp_on_erbnum(ag.freqs_hz, ag.hl_db, f, cfg.gc.erb));
    const double a = interp_on_erbnum(ag.freqs_hz, alphas, f, cfg.gc.erb);
    try {
      spec.channels[i] = split_hl(hl, a, ChannelRef::of(table.channels[i]), cfg);
    } catch (const std::exception& e) {
      throw DomainError("channel " + std::to_string(i) + " (" +
                        std::to_string(f) + " Hz): " + e.what());
    }
  });
  return spec;
}

// Split evaluated directly at the audiogram frequencies.
inline std::vector<HlSplit> split_at_audiogram(const Audiogram& ag,
                                               const AlphaProfile& alpha,
                                               const GcfbConfig& cfg) {
  ag.validate();
  alpha.validate(ag.freqs_hz.size());
  std::vector<HlSplit> out;
  for (std::size_t i = 0; i < ag.freqs_hz.size(); ++i) {
    out.push_back(split_hl(std::max(0.0, ag.hl_db[i]), alpha.at(i),
                           ChannelRef::at_frequency(ag.freqs_hz[i], cfg), cfg));
  }
  return out;
}

// Passive-free NH and listener IO curves per channel.
struct ListenerCurves {
  std::vector<IoCurve> nh;
  std::vector<IoCurve> hl;
};

inline ListenerCurves listener_curves(const HearingSpec& spec,
                                      const ChannelTable& table) {
  if (spec.size() != table.size()) {
    throw DomainError("listener_curves: spec/table channel count mismatch");
  }
  ListenerCurves c;
  c.nh.resize(table.size());
  c.hl.resize(table.size());
  parallel_for(table.size(), [&](std::size_t i) {
    const auto ref = ChannelRef::of(table.channels[i]);
    c.nh[i] = io_function(1.0, ref, table.config);
    c.hl[i] = io_function(spec.channels[i].alpha, ref, table.config);
  });
  return c;
}

}  // namespace whis
