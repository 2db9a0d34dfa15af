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

// Synthesis back ends: direct time-varying filtering (DTVF) with
// minimum-phase kernels and overlap-add, and filterbank analysis-synthesis
// (FBAS) with per-channel delay compensation and optional temporal smearing.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "whis/auditory_scale.hpp"
#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/fft.hpp"
#include "whis/filter_core.hpp"
#include "whis/parallel.hpp"
#include "whis/signal.hpp"
#include "whis/whis_analysis.hpp"

namespace whis {

struct DtvfConfig {
  double frame_len = 0.020;
  double frame_shift = 0.010;
  std::size_t kernel_len = 0;    // 0: one frame
  std::size_t design_fft = 4096;  // warp grid is design_fft / 2 + 1 bins

  void validate() const {
    if (!(frame_len > 0.0) || std::abs(frame_shift - frame_len / 2) > 1e-12) {
      throw ConfigError("DtvfConfig: frame_shift must equal frame_len / 2");
    }
    if (fft::next_pow2(design_fft) != design_fft) {
      throw ConfigError("DtvfConfig: design_fft must be a power of two");
    }
  }
};

// Square-root periodic Hann; two copies at 50% overlap sum to one.
inline std::vector<double> sqrt_hanning(std::size_t m) {
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / m));
  }
  return w;
}

// Per-channel loss (dB, on the ERB-number axis) warped onto a linear
// frequency grid and returned as amplitude 10^(-L/20).
inline MagnitudeSpectrum loss_to_spectrum(std::span<const double> loss_db,
                                          std::span<const double> erbnums,
                                          double fs, std::size_t n_bins,
                                          const ErbScale& scale = {}) {
  if (loss_db.size() != erbnums.size() || loss_db.empty()) {
    throw DomainError("loss_to_spectrum: one loss value per channel required");
  }
  if (n_bins < 3) throw DomainError("loss_to_spectrum: n_bins must be >= 3");
  for (double v : loss_db) {
    if (!std::isfinite(v)) throw DomainError("loss_to_spectrum: non-finite loss");
  }
  MagnitudeSpectrum m{fs, std::vector<double>(n_bins)};
  const std::size_t last = erbnums.size() - 1;
  std::size_t j = 0;
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double e = erbnum_of_freq(m.freq(k), scale);
    double l;
    if (e <= erbnums.front()) {
      l = loss_db.front();
    } else if (e >= erbnums[last]) {
      l = loss_db[last];
    } else {
      while (erbnums[j + 1] < e) ++j;
      const double t = (e - erbnums[j]) / (erbnums[j + 1] - erbnums[j]);
      l = loss_db[j] + t * (loss_db[j + 1] - loss_db[j]);
    }
    m.gains[k] = std::pow(10.0, -l / 20.0);
  }
  return m;
}

inline CalibratedSignal synth_dtvf(const CalibratedSignal& x,
                                   const LossField& loss,
                                   std::span<const double> erbnums,
                                   const DtvfConfig& cfg = {}) {
  cfg.validate();
  if (loss.channels() != erbnums.size()) {
    throw DomainError("synth_dtvf: loss/channel count mismatch");
  }
  CalibratedSignal out = x;
  const std::size_t n = x.samples.size();
  std::fill(out.samples.begin(), out.samples.end(), 0.0);
  if (n == 0) return out;

  const auto m = static_cast<std::size_t>(std::lround(cfg.frame_len * x.fs / 2)) * 2;
  const std::size_t hop = m / 2;
  const std::size_t klen = cfg.kernel_len == 0 ? m : cfg.kernel_len;
  if (cfg.design_fft < m + klen - 1) {
    throw ConfigError("DtvfConfig: design_fft too small for frame + kernel");
  }
  const double shift = loss.l_total.frame_shift;
  if (!(shift > 0.0) || loss.frames() == 0) {
    throw ProcessingError("synth_dtvf: loss field has no frames");
  }
  const double loss_end = loss.l_total.frame_time(loss.frames() - 1);
  if (loss.l_total.t0 > shift || loss_end + shift < (n - 1) / x.fs) {
    throw ProcessingError("synth_dtvf: loss field timing does not cover the "
                          "signal");
  }

  const auto w = sqrt_hanning(m);
  const std::size_t n_frames = (n + hop - 1) / hop + 1;
  const fft::RealFft tf(cfg.design_fft);
  std::vector<std::vector<double>> frames(n_frames);
  parallel_for(n_frames, [&](std::size_t j) {
    const auto start = static_cast<std::ptrdiff_t>(j * hop) -
                       static_cast<std::ptrdiff_t>(hop);
    // Loss columns centered inside this frame, averaged in dB.
    const double t_lo = static_cast<double>(start) / x.fs;
    const double t_hi = static_cast<double>(start + static_cast<std::ptrdiff_t>(m)) / x.fs;
    const double c_lo = std::ceil((t_lo - loss.l_total.t0) / shift - 1e-9);
    const double c_hi = std::ceil((t_hi - loss.l_total.t0) / shift - 1e-9) - 1;
    const auto k0 = static_cast<std::ptrdiff_t>(std::max(0.0, c_lo));
    const auto k1 = std::min(static_cast<std::ptrdiff_t>(loss.frames()) - 1,
                             static_cast<std::ptrdiff_t>(c_hi));
    if (k1 < k0) {
      throw ProcessingError("synth_dtvf: no loss frames inside DTVF frame " +
                            std::to_string(j));
    }
    std::vector<double> mean(loss.channels(), 0.0);
    double worst = 0.0;
    for (std::size_t c = 0; c < loss.channels(); ++c) {
      double acc = 0.0;
      for (auto k = k0; k <= k1; ++k) acc += loss.l_total.at(c, static_cast<std::size_t>(k));
      mean[c] = acc / static_cast<double>(k1 - k0 + 1);
      worst = std::max(worst, std::abs(mean[c]));
    }

    std::vector<double> buf(cfg.design_fft, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx >= 0 && static_cast<std::size_t>(idx) < n) {
        buf[i] = w[i] * x.samples[static_cast<std::size_t>(idx)];
        any = any || buf[i] != 0.0;
      }
    }
    std::vector<double> y(m, 0.0);
    if (any) {
      if (worst > 0.0) {
        const auto mag = loss_to_spectrum(mean, erbnums, x.fs, tf.bins());
        const auto kern = design_minphase(mag, klen);
        std::vector<double> hbuf(cfg.design_fft, 0.0);
        std::copy(kern.taps.begin(), kern.taps.end(), hbuf.begin());
        auto xs = tf.forward(buf);
        const auto hs = tf.forward(hbuf);
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
        tf.inverse(xs, buf);
      }
      for (std::size_t i = 0; i < m; ++i) y[i] = w[i] * buf[i];
    }
    frames[j] = std::move(y);
  });

  for (std::size_t j = 0; j < n_frames; ++j) {
    const auto start = static_cast<std::ptrdiff_t>(j * hop) -
                       static_cast<std::ptrdiff_t>(hop);
    for (std::size_t i = 0; i < m; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx >= 0 && static_cast<std::size_t>(idx) < n) {
        out.samples[static_cast<std::size_t>(idx)] += frames[j][i];
      }
    }
  }
  return out;
}

inline CalibratedSignal synth_dtvf(const CalibratedSignal& x,
                                   const LossField& loss,
                                   const ChannelTable& table,
                                   const DtvfConfig& cfg = {}) {
  const auto e = table.erbnums();
  return synth_dtvf(x, loss, e, cfg);
}

// ---------------------------------------------------------------------------
// FBAS

struct FbasCalibration {
  double kappa = 0.0;
  double gain = 1.0;        // inverse passband RMS gain of the click sum
  double click_peak = 0.0;  // peak of the unscaled click sum
  std::vector<std::size_t> delays;
};

inline std::vector<std::size_t> fbas_delays(double kappa,
                                            std::span<const double> fp1,
                                            double fs) {
  std::vector<std::size_t> d(fp1.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<std::size_t>(std::lround(kappa * fs / fp1[i]));
  }
  return d;
}

namespace detail {

// Sum of the advanced kernels, shifted right by the largest delay so that
// taps moved before time zero are kept, as they are for a running signal.
inline std::vector<double> click_sum(const std::vector<MinPhaseKernel>& h,
                                     std::span<const std::size_t> delays) {
  const std::size_t dmax = *std::max_element(delays.begin(), delays.end());
  std::vector<double> s(h.front().length() + dmax, 0.0);
  for (std::size_t c = 0; c < h.size(); ++c) {
    const auto& taps = h[c].taps;
    const std::size_t off = dmax - delays[c];
    for (std::size_t n = 0; n < taps.size(); ++n) s[off + n] += taps[n];
  }
  return s;
}

// RMS magnitude of a response over [f_lo, f_hi].
inline double passband_rms(std::span<const double> h, double fs, double f_lo,
                           double f_hi) {
  const std::size_t n = fft::next_pow2(std::max<std::size_t>(2 * h.size(), 1024));
  const fft::RealFft tf(n);
  std::vector<double> buf(n, 0.0);
  std::copy(h.begin(), h.end(), buf.begin());
  const auto spec = tf.forward(buf);
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f >= f_lo && f <= f_hi) {
      acc += std::norm(spec[k]);
      ++cnt;
    }
  }
  return cnt ? std::sqrt(acc / static_cast<double>(cnt)) : 0.0;
}

}  // namespace detail

// kappa in [0, kappa_max] maximizing the summed click-response peak; the
// output gain brings the passband (lowest to highest fp1) to 0 dB on average.
inline FbasCalibration calibrate_fbas(const CascadeBank& bank,
                                      std::span<const double> fp1, double fs,
                                      double kappa_max = 5.0) {
  if (bank.size() != fp1.size() || bank.size() == 0) {
    throw DomainError("calibrate_fbas: bank/channel mismatch");
  }
  auto peak_at = [&](double kappa) {
    const auto s = detail::click_sum(bank.kernels, fbas_delays(kappa, fp1, fs));
    return *std::max_element(s.begin(), s.end());
  };
  double best_k = 0.0;
  double best_p = peak_at(0.0);
  constexpr double kCoarse = 0.05;
  for (double k = kCoarse; k <= kappa_max + 1e-12; k += kCoarse) {
    const double p = peak_at(k);
    if (p > best_p) {
      best_p = p;
      best_k = k;
    }
  }
  const double lo = std::max(0.0, best_k - kCoarse);
  const double hi = std::min(kappa_max, best_k + kCoarse);
  for (double k = lo; k <= hi + 1e-12; k += 0.002) {
    const double p = peak_at(k);
    if (p > best_p) {
      best_p = p;
      best_k = k;
    }
  }
  if (!(best_p > 0.0)) throw ProcessingError("calibrate_fbas: no positive peak");
  FbasCalibration cal;
  cal.kappa = best_k;
  cal.click_peak = best_p;
  cal.delays = fbas_delays(best_k, fp1, fs);
  const auto s = detail::click_sum(bank.kernels, cal.delays);
  const auto [f_lo, f_hi] = std::minmax_element(fp1.begin(), fp1.end());
  const double g = detail::passband_rms(s, fs, *f_lo, *f_hi);
  if (!(g > 0.0)) throw ProcessingError("calibrate_fbas: zero passband gain");
  cal.gain = 1.0 / g;
  return cal;
}

inline FbasCalibration calibrate_fbas(const CascadeBank& bank,
                                      const ChannelTable& table) {
  std::vector<double> fp1(table.size());
  for (std::size_t i = 0; i < fp1.size(); ++i) fp1[i] = table.channels[i].geom.fp1;
  return calibrate_fbas(bank, fp1, table.config.fs);
}

// Advance channel k by its delay, sum with a fixed tree, scale by the
// calibration gain.
inline std::vector<double> synth_fbas(std::vector<std::vector<double>> channels,
                                      const FbasCalibration& cal) {
  if (channels.size() != cal.delays.size()) {
    throw DomainError("synth_fbas: channel/delay count mismatch");
  }
  if (channels.empty()) return {};
  const std::size_t n = channels.front().size();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    auto& y = channels[c];
    if (y.size() != n) throw DomainError("synth_fbas: channels not aligned");
    const std::size_t d = std::min(cal.delays[c], n);
    std::copy(y.begin() + static_cast<std::ptrdiff_t>(d), y.end(), y.begin());
    std::fill(y.end() - static_cast<std::ptrdiff_t>(d), y.end(), 0.0);
  }
  auto sum = tree_sum(std::move(channels));
  for (double& v : sum) v *= cal.gain;
  return sum;
}

// ---------------------------------------------------------------------------
// Temporal smearing

struct SmearConfig {
  enum class Envelope { kHilbert, kRectify };
  Envelope envelope = Envelope::kHilbert;
  double cutoff_hz = 16.0;
  double order_factor = 4.0;  // FIR order = order_factor * fs / cutoff
  double rectify_smooth_hz = 400.0;

  void validate(double fs) const {
    if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2)) {
      throw ConfigError("SmearConfig: cutoff must lie in (0, fs/2)");
    }
    if (!(order_factor > 0.0) || !(rectify_smooth_hz > 0.0)) {
      throw ConfigError("SmearConfig: order factor and smoothing must be > 0");
    }
  }
};

// Hamming-windowed sinc lowpass, unit DC gain, odd length.
inline std::vector<double> lowpass_fir(double cutoff_hz, double fs,
                                       std::size_t order) {
  order += order % 2;
  std::vector<double> h(order + 1);
  const double fc = cutoff_hz / fs;
  const double mid = static_cast<double>(order) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i <= order; ++i) {
    const double t = static_cast<double>(i) - mid;
    const double sinc =
        t == 0.0 ? 2.0 * fc
                 : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double win =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(order));
    h[i] = sinc * win;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

// Linear-phase FIR with its group delay removed; edges held constant.
inline std::vector<double> filter_zero_delay(std::span<const double> x,
                                             std::span<const double> h) {
  if (x.empty()) return {};
  const std::size_t half = (h.size() - 1) / 2;
  std::vector<double> ext(x.size() + 2 * half);
  std::fill_n(ext.begin(), half, x.front());
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(half));
  std::fill(ext.end() - static_cast<std::ptrdiff_t>(half), ext.end(), x.back());
  const auto y = Convolver(h).apply(ext);
  return {y.begin() + static_cast<std::ptrdiff_t>(2 * half), y.end()};
}

inline std::vector<double> hilbert_envelope(std::span<const double> x) {
  const std::size_t n = fft::next_pow2(std::max<std::size_t>(2 * x.size(), 4));
  const fft::RealFft tf(n);
  std::vector<double> buf(n, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  const auto half = tf.forward(buf);
  std::vector<fft::Complex> full(n, 0.0);
  full[0] = half[0];
  full[n / 2] = half[n / 2];
  for (std::size_t k = 1; k < n / 2; ++k) full[k] = 2.0 * half[k];
  const auto z = fft::ComplexFft(n).inverse(full);
  std::vector<double> env(x.size());
  for (std::size_t i = 0; i < env.size(); ++i) env[i] = std::abs(z[i]);
  return env;
}

inline std::vector<double> temporal_smear(std::span<const double> x,
                                          const SmearConfig& cfg, double fs) {
  cfg.validate(fs);
  std::vector<double> out(x.begin(), x.end());
  if (x.empty()) return out;

  std::vector<double> env;
  if (cfg.envelope == SmearConfig::Envelope::kHilbert) {
    env = hilbert_envelope(x);
  } else {
    std::vector<double> hw(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      hw[i] = std::numbers::pi * std::max(x[i], 0.0);
    }
    const auto order = static_cast<std::size_t>(
        std::lround(cfg.order_factor * fs / cfg.rectify_smooth_hz));
    env = filter_zero_delay(hw, lowpass_fir(cfg.rectify_smooth_hz, fs, order));
    for (double& v : env) v = std::max(v, 0.0);
  }
  const double peak = *std::max_element(env.begin(), env.end());
  if (!(peak > 0.0)) return out;
  const double eps = 1e-6 * peak;

  const auto order =
      static_cast<std::size_t>(std::lround(cfg.order_factor * fs / cfg.cutoff_hz));
  auto env_lp = filter_zero_delay(env, lowpass_fir(cfg.cutoff_hz, fs, order));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x[i] / (env[i] + eps) * std::max(env_lp[i], 0.0);
  }
  return out;
}

}  // namespace whis
