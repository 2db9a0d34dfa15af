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

// Quantitative evaluation: IO sweeps with tones, cascade bandwidth versus
// compression health, normalized spectral distance with a time-shift search,
// and pink-noise references at a given SNR.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "whis/auditory_scale.hpp"
#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/fft.hpp"
#include "whis/filter_core.hpp"
#include "whis/framer.hpp"
#include "whis/gcfb.hpp"
#include "whis/signal.hpp"

namespace whis {

struct ToneSpec {
  double freq = 1000.0;
  double level_db = 60.0;  // SPL of the steady part
  double duration = 0.2;
  double ramp = 0.005;     // raised-cosine on- and offset
};

inline CalibratedSignal make_tone(const ToneSpec& t, double fs,
                                  double spl_ref = kDefaultSplRef) {
  if (!(t.freq > 0.0 && t.freq < fs / 2) || !(t.duration > 0.0) ||
      t.ramp < 0.0 || 2 * t.ramp > t.duration) {
    throw DomainError("make_tone: invalid tone parameters");
  }
  CalibratedSignal s;
  s.fs = fs;
  s.spl_ref = spl_ref;
  const auto n = static_cast<std::size_t>(std::lround(t.duration * fs));
  const auto nr = static_cast<std::size_t>(std::lround(t.ramp * fs));
  const double amp = std::sqrt(2.0) * std::pow(10.0, (t.level_db - spl_ref) / 20.0);
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double g = 1.0;
    if (nr > 0 && i < nr) {
      g = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / nr);
    } else if (nr > 0 && i >= n - nr) {
      g = 0.5 - 0.5 * std::cos(std::numbers::pi * (n - i - 0.5) / nr);
    }
    s.samples[i] = g * amp * std::sin(2.0 * std::numbers::pi * t.freq * i / fs);
  }
  return s;
}

inline std::vector<double> default_io_levels() {
  std::vector<double> v;
  for (int l = -10; l <= 100; l += 10) v.push_back(l);
  return v;
}

struct IoSweepResult {
  double freq = 0.0;
  std::string label;
  std::vector<double> levels;
  std::vector<double> outputs;  // max EP, dB
  std::optional<double> zero_cross;
  bool flagged = false;  // no crossing of 0 dB inside the level grid
};

// First upward crossing of 0 dB, linearly interpolated.
inline std::optional<double> zero_crossing(std::span<const double> levels,
                                           std::span<const double> outputs) {
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const double a = outputs[i];
    const double b = outputs[i + 1];
    if (a < 0.0 && b >= 0.0) {
      return levels[i] + (levels[i + 1] - levels[i]) * (-a) / (b - a);
    }
  }
  if (!outputs.empty() && outputs.front() == 0.0) return levels.front();
  return std::nullopt;
}

template <typename Analyzer>
IoSweepResult sweep_io_at(double freq, const Analyzer& gcfb,
                          std::span<const double> levels,
                          const std::string& label = {},
                          const ToneSpec& shape = {}) {
  const auto& cfg = gcfb.table().config;
  if (!(freq >= cfg.f_lo * 0.5 && freq <= std::min(2.0 * cfg.f_hi, cfg.fs / 2))) {
    throw DomainError("sweep_io: frequency " + std::to_string(freq) +
                      " Hz outside the filterbank range");
  }
  IoSweepResult r;
  r.freq = freq;
  r.label = label;
  r.levels.assign(levels.begin(), levels.end());
  for (double level : levels) {
    ToneSpec t = shape;
    t.freq = freq;
    t.level_db = level;
    r.outputs.push_back(gcfb.analyze(make_tone(t, cfg.fs)).max());
  }
  r.zero_cross = zero_crossing(r.levels, r.outputs);
  r.flagged = !r.zero_cross.has_value();
  return r;
}

template <typename Analyzer>
std::vector<IoSweepResult> sweep_io(std::span<const double> freqs,
                                    const Analyzer& gcfb,
                                    const std::string& label = {},
                                    std::span<const double> levels = {}) {
  const auto lv = levels.empty() ? default_io_levels()
                                 : std::vector<double>(levels.begin(), levels.end());
  std::vector<IoSweepResult> out;
  for (double f : freqs) out.push_back(sweep_io_at(f, gcfb, lv, label));
  return out;
}

struct BandwidthResult {
  double freq = 0.0;
  double fp1 = 0.0;
  double alpha = 1.0;
  double erb = 0.0;
  double ratio_alpha1 = 1.0;
  double ratio_erbn = 0.0;
};

inline BandwidthResult measure_bandwidth(double freq, double alpha,
                                         const ChannelTable& table) {
  const auto& cfg = table.config;
  const auto& ch = table.channels[table.nearest_channel(freq)];
  const double e =
      equivalent_rectangular_bandwidth(cascade_spectrum(ch.geom, alpha, cfg.fs, cfg.design_fft, cfg.gc));
  const double e1 =
      alpha == 1.0
          ? e
          : equivalent_rectangular_bandwidth(cascade_spectrum(ch.geom, 1.0, cfg.fs, cfg.design_fft, cfg.gc));
  BandwidthResult r;
  r.freq = freq;
  r.fp1 = ch.geom.fp1;
  r.alpha = alpha;
  r.erb = e;
  r.ratio_alpha1 = e / e1;
  r.ratio_erbn = e / erb_of_freq(ch.geom.fp1, cfg.gc.erb);
  return r;
}

// ---------------------------------------------------------------------------
// Spectral distance

inline constexpr double kDistanceFloorDb = -100.0;

struct DistanceResult {
  double d_sp = kDistanceFloorDb;
  int shift = 0;  // frames; S_test(tau + shift) is compared with S_ref(tau)
  bool floored = false;
};

inline FrameMatrix ep_to_linear(FrameMatrix ep) {
  for (double& v : ep.data) v = std::pow(10.0, v / 20.0);
  return ep;
}

// Both matrices in linear amplitude. Every shift is scored on the same
// interior reference frames [R, n - R).
inline DistanceResult spectral_distance_linear(const FrameMatrix& test,
                                               const FrameMatrix& ref,
                                               int search_frames) {
  if (test.rows != ref.rows) {
    throw DomainError("spectral_distance: channel counts differ (" +
                      std::to_string(test.rows) + " vs " +
                      std::to_string(ref.rows) + ")");
  }
  if (search_frames < 0) throw DomainError("spectral_distance: negative range");
  const auto r = static_cast<std::size_t>(search_frames);
  const std::size_t n = std::min(test.cols, ref.cols);
  if (n <= 2 * r) throw DomainError("spectral_distance: empty overlap");

  double den = 0.0;
  for (std::size_t c = 0; c < ref.rows; ++c) {
    for (std::size_t t = r; t < n - r; ++t) den += ref.at(c, t) * ref.at(c, t);
  }
  if (!(den > 0.0)) throw DomainError("spectral_distance: reference is zero");

  DistanceResult best;
  double best_num = INFINITY;
  for (int s = -search_frames; s <= search_frames; ++s) {
    double num = 0.0;
    for (std::size_t c = 0; c < ref.rows; ++c) {
      for (std::size_t t = r; t < n - r; ++t) {
        const double d = test.at(c, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + s)) -
                         ref.at(c, t);
        num += d * d;
      }
    }
    if (num < best_num || (num == best_num && std::abs(s) < std::abs(best.shift))) {
      best_num = num;
      best.shift = s;
    }
  }
  const double d = best_num > 0.0 ? 10.0 * std::log10(best_num / den) : -INFINITY;
  best.floored = !(d > kDistanceFloorDb);
  best.d_sp = best.floored ? kDistanceFloorDb : d;
  return best;
}

inline int shift_frames_for(double range_s, double frame_shift) {
  return static_cast<int>(std::lround(range_s / frame_shift));
}

// Excitation patterns (dB) compared in the linear amplitude domain.
inline DistanceResult spectral_distance(const ExcitationPattern& test,
                                        const ExcitationPattern& ref,
                                        double search_range_s = 0.010) {
  return spectral_distance_linear(ep_to_linear(test), ep_to_linear(ref),
                                  shift_frames_for(search_range_s, ref.frame_shift));
}

// ---------------------------------------------------------------------------
// Pink noise

// Seeded white Gaussian noise shaped to a 1/f power spectrum, unit RMS.
inline std::vector<double> pink_noise(std::size_t n, double fs,
                                      std::uint64_t seed) {
  if (n < 2) throw DomainError("pink_noise: need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = gauss(rng);
  const fft::RealFft tf(n);
  auto spec = tf.forward(x);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    spec[k] /= std::sqrt(f);
  }
  x = tf.inverse(spec);
  const double r = rms(x);
  for (double& v : x) v /= r;
  return x;
}

// Leq(speech) - Leq(noise) = snr_db over the speech extent.
inline CalibratedSignal pink_noise_mix(const CalibratedSignal& speech,
                                       double snr_db, std::uint64_t seed) {
  if (speech.samples.size() < 2) throw DomainError("pink_noise_mix: empty speech");
  const double rs = rms(speech.samples);
  if (!(rs > 0.0)) throw DomainError("pink_noise_mix: silent speech");
  auto noise = pink_noise(speech.samples.size(), speech.fs, seed);
  const double g = rs * std::pow(10.0, -snr_db / 20.0);
  CalibratedSignal out = speech;
  out.target_leq.reset();
  for (std::size_t i = 0; i < noise.size(); ++i) out.samples[i] += g * noise[i];
  return out;
}

}  // namespace whis
