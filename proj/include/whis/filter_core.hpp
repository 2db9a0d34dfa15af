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

// Gammatone / passive gammachirp (pGC) / high-pass asymmetric function
// (HP-AF) magnitude responses, and their realization as minimum-phase FIR
// kernels via the real cepstrum.

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
#include "whis/errors.hpp"
#include "whis/fft.hpp"

namespace whis {

struct GcParams {
  double b1 = 1.81;
  double c1 = -2.96;
  double b2 = 2.17;
  double c2_nh = 2.20;
  double frat0 = 0.466;
  double frat1 = 0.0109;
  int order = 4;
  double a_gamma = 1.0;
  // Level at which the linear pGC/HP-AF cascade is frozen.
  double cascade_level_db = 50.0;
  ErbScale erb;

  void validate() const {
    if (!(b1 > 0.0) || !(b2 > 0.0)) {
      throw ConfigError("GcParams: b1 and b2 must be > 0");
    }
    if (order < 1) throw ConfigError("GcParams: order must be >= 1");
    if (!std::isfinite(c1) || !std::isfinite(c2_nh) || !(a_gamma > 0.0)) {
      throw ConfigError("GcParams: c1, c2 must be finite, a_gamma > 0");
    }
  }
};

// Level-dependent ratio fr2 / fp1.
inline double frat(double level_db, const GcParams& p = {}) {
  return p.frat0 + p.frat1 * level_db;
}

inline double gammatone_mag(double f, double fr1, const GcParams& p = {}) {
  if (!(fr1 > 0.0)) throw DomainError("gammatone_mag: fr1 must be > 0");
  const double x = (f - fr1) / (p.b1 * erb_of_freq(fr1, p.erb));
  return std::pow(1.0 + x * x, -0.5 * p.order);
}

inline double pgc_mag(double f, double fr1, const GcParams& p = {}) {
  if (!(fr1 > 0.0)) throw DomainError("pgc_mag: fr1 must be > 0");
  const double x = (f - fr1) / (p.b1 * erb_of_freq(fr1, p.erb));
  return p.a_gamma * std::pow(1.0 + x * x, -0.5 * p.order) *
         std::exp(p.c1 * std::atan(x));
}

// exp(c2 * theta2) before peak normalization.
inline double hpaf_raw(double f, double fr2, double c2_eff,
                       const GcParams& p = {}) {
  if (!(fr2 > 0.0)) throw DomainError("hpaf: fr2 must be > 0");
  return std::exp(c2_eff *
                  std::atan((f - fr2) / (p.b2 * erb_of_freq(fr2, p.erb))));
}

// HP-AF over a frequency grid, divided by its maximum on that grid.
inline std::vector<double> hpaf_mag(std::span<const double> freqs, double fr2,
                                    double c2_eff, const GcParams& p = {}) {
  std::vector<double> out(freqs.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i] = hpaf_raw(freqs[i], fr2, c2_eff, p);
    peak = std::max(peak, out[i]);
  }
  if (peak > 0.0) {
    for (double& v : out) v /= peak;
  }
  return out;
}

// Peak frequency of the pGC for a given asymptotic frequency fr1: coarse
// grid argmax followed by golden-section refinement.
inline double pgc_peak_freq(double fr1, const GcParams& p = {}) {
  if (!(fr1 > 0.0)) throw DomainError("pgc_peak_freq: fr1 must be > 0");
  const double span = 8.0 * p.b1 * erb_of_freq(fr1, p.erb);
  const double lo = std::max(0.0, fr1 - span);
  const double hi = fr1 + span;
  constexpr int kCoarse = 400;
  const double step = (hi - lo) / kCoarse;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= kCoarse; ++i) {
    const double v = pgc_mag(lo + step * i, fr1, p);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::max(lo, lo + step * (best - 1));
  double b = std::min(hi, lo + step * (best + 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = pgc_mag(c, fr1, p);
  double fd = pgc_mag(d, fr1, p);
  for (int it = 0; it < 80 && (b - a) > 1e-9 * std::max(1.0, fr1); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = pgc_mag(c, fr1, p);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = pgc_mag(d, fr1, p);
    }
  }
  return 0.5 * (a + b);
}

// Inverse of pgc_peak_freq by bisection (the peak is increasing in fr1).
inline double fr1_for_peak(double fp1, const GcParams& p = {}) {
  if (!(fp1 > 0.0)) throw DomainError("fr1_for_peak: fp1 must be > 0");
  double lo = fp1 / 8.0;
  double hi = 4.0 * fp1 + 200.0;
  while (pgc_peak_freq(lo, p) > fp1 && lo > 1e-6) lo *= 0.5;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pgc_peak_freq(mid, p) < fp1) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-9 * fp1) break;
  }
  return 0.5 * (lo + hi);
}

// Center frequencies of one filterbank channel's linear cascade.
struct ChannelGeometry {
  double fr1 = 0.0;  // pGC asymptotic frequency
  double fp1 = 0.0;  // pGC peak frequency
  double fr2 = 0.0;  // HP-AF center, frat(cascade level) * fp1

  static ChannelGeometry from_fr1(double fr1, const GcParams& p = {}) {
    ChannelGeometry g;
    g.fr1 = fr1;
    g.fp1 = pgc_peak_freq(fr1, p);
    g.fr2 = frat(p.cascade_level_db, p) * g.fp1;
    return g;
  }

  static ChannelGeometry from_peak(double fp1, const GcParams& p = {}) {
    return from_fr1(fr1_for_peak(fp1, p), p);
  }
};

// Uniform grid DC..Nyquist; bin k sits at k * fs / n_fft.
struct MagnitudeSpectrum {
  double fs = 0.0;
  std::vector<double> gains;

  std::size_t n_fft() const { return 2 * (gains.size() - 1); }
  double bin_width() const { return fs / static_cast<double>(n_fft()); }
  double freq(std::size_t k) const { return bin_width() * k; }

  std::vector<double> freqs() const {
    std::vector<double> f(gains.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = freq(k);
    return f;
  }

  double peak() const { return *std::max_element(gains.begin(), gains.end()); }

  static MagnitudeSpectrum unity(double fs, std::size_t n_fft) {
    return {fs, std::vector<double>(n_fft / 2 + 1, 1.0)};
  }
};

inline std::vector<double> uniform_grid(double fs, std::size_t n_fft) {
  std::vector<double> f(n_fft / 2 + 1);
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = fs * static_cast<double>(k) / static_cast<double>(n_fft);
  }
  return f;
}

// pGC x HP-AF(alpha * c2) at the given frequencies; HP-AF peak-normalized
// over the same grid.
inline std::vector<double> cascade_mag(std::span<const double> freqs,
                                       const ChannelGeometry& g, double alpha,
                                       const GcParams& p = {}) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("cascade_mag: alpha must be in [0, 1]");
  }
  std::vector<double> out = hpaf_mag(freqs, g.fr2, alpha * p.c2_nh, p);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i] *= pgc_mag(freqs[i], g.fr1, p);
  }
  return out;
}

inline MagnitudeSpectrum normalized_to_peak(MagnitudeSpectrum m) {
  const double pk = m.peak();
  if (pk > 0.0) {
    for (double& v : m.gains) v /= pk;
  }
  return m;
}

// Unit-peak spectrum of the channel's linear cascade.
inline MagnitudeSpectrum cascade_spectrum(const ChannelGeometry& g,
                                          double alpha, double fs,
                                          std::size_t n_fft,
                                          const GcParams& p = {}) {
  const auto f = uniform_grid(fs, n_fft);
  return normalized_to_peak({fs, cascade_mag(f, g, alpha, p)});
}

inline MagnitudeSpectrum pgc_spectrum(const ChannelGeometry& g, double fs,
                                      std::size_t n_fft,
                                      const GcParams& p = {}) {
  const auto f = uniform_grid(fs, n_fft);
  MagnitudeSpectrum m{fs, std::vector<double>(f.size())};
  for (std::size_t k = 0; k < f.size(); ++k) m.gains[k] = pgc_mag(f[k], g.fr1, p);
  return normalized_to_peak(std::move(m));
}

// Numeric ERB: integral of |H|^2 over the peak power.
inline double equivalent_rectangular_bandwidth(const MagnitudeSpectrum& m) {
  double sum = 0.0;
  double pk = 0.0;
  for (std::size_t k = 0; k < m.gains.size(); ++k) {
    const double p2 = m.gains[k] * m.gains[k];
    const double w = (k == 0 || k + 1 == m.gains.size()) ? 0.5 : 1.0;
    sum += w * p2;
    pk = std::max(pk, p2);
  }
  if (pk <= 0.0) throw DomainError("ERB of an all-zero response");
  return sum * m.bin_width() / pk;
}

struct MinPhaseKernel {
  std::vector<double> taps;
  std::size_t length() const { return taps.size(); }
};

inline constexpr double kDesignFloorDb = -100.0;

// Minimum-phase FIR from a magnitude spectrum by cepstral folding.
inline MinPhaseKernel design_minphase(const MagnitudeSpectrum& mag,
                                      std::size_t length,
                                      double floor_db = kDesignFloorDb) {
  if (mag.gains.size() < 3) throw DomainError("design_minphase: grid too small");
  const std::size_t n = mag.n_fft();
  if (length < 32) throw DomainError("design_minphase: length must be >= 32");
  if (length > n) {
    throw DomainError("design_minphase: length exceeds design grid (" +
                      std::to_string(n) + ")");
  }
  double peak = 0.0;
  for (double g : mag.gains) {
    if (!std::isfinite(g) || g < 0.0) {
      throw DomainError("design_minphase: gains must be finite and >= 0");
    }
    peak = std::max(peak, g);
  }
  if (peak <= 0.0) throw DomainError("design_minphase: all-zero spectrum");

  const double floor = peak * std::pow(10.0, floor_db / 20.0);
  const fft::RealFft tf(n);
  std::vector<fft::Complex> spec(tf.bins());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    spec[k] = std::log(std::max(mag.gains[k], floor));
  }
  std::vector<double> cep = tf.inverse(spec);

  // Fold the real cepstrum onto positive quefrencies.
  std::vector<double> folded(n, 0.0);
  folded[0] = cep[0];
  for (std::size_t q = 1; q < n / 2; ++q) folded[q] = 2.0 * cep[q];
  folded[n / 2] = cep[n / 2];

  tf.forward(folded, spec);
  for (auto& v : spec) v = std::exp(v);
  std::vector<double> h = tf.inverse(spec);
  h.resize(length);
  return {std::move(h)};
}

// |H(f)| of a kernel sampled on an n_fft grid.
inline MagnitudeSpectrum kernel_response(const MinPhaseKernel& k, double fs,
                                         std::size_t n_fft) {
  if (k.taps.size() > n_fft) throw DomainError("kernel_response: grid too small");
  const fft::RealFft tf(n_fft);
  std::vector<double> buf(n_fft, 0.0);
  std::copy(k.taps.begin(), k.taps.end(), buf.begin());
  const auto spec = tf.forward(buf);
  MagnitudeSpectrum m{fs, std::vector<double>(spec.size())};
  for (std::size_t i = 0; i < spec.size(); ++i) m.gains[i] = std::abs(spec[i]);
  return m;
}

// Input spectra of overlap-save blocks, shared by every kernel of the same
// length so the forward transforms run once per signal.
struct BlockSpectra {
  std::size_t fft_size = 0;
  std::size_t kernel_len = 0;
  std::size_t hop = 0;
  std::size_t signal_len = 0;
  std::vector<std::vector<fft::Complex>> blocks;
};

inline std::size_t overlap_save_fft_size(std::size_t kernel_len) {
  return std::max<std::size_t>(64, fft::next_pow2(2 * kernel_len));
}

inline BlockSpectra block_spectra(std::span<const double> x,
                                  std::size_t kernel_len) {
  BlockSpectra b;
  b.fft_size = overlap_save_fft_size(kernel_len);
  b.kernel_len = kernel_len;
  b.hop = b.fft_size - kernel_len + 1;
  b.signal_len = x.size();
  const fft::RealFft tf(b.fft_size);
  std::vector<double> seg(b.fft_size);
  for (std::size_t start = 0; start < x.size(); start += b.hop) {
    for (std::size_t i = 0; i < b.fft_size; ++i) {
      const auto idx = static_cast<std::ptrdiff_t>(start + i) -
                       static_cast<std::ptrdiff_t>(kernel_len - 1);
      seg[i] = (idx >= 0 && static_cast<std::size_t>(idx) < x.size())
                   ? x[static_cast<std::size_t>(idx)]
                   : 0.0;
    }
    b.blocks.push_back(tf.forward(seg));
  }
  return b;
}

// Causal linear convolution truncated to the input length.
class Convolver {
 public:
  explicit Convolver(std::span<const double> taps)
      : kernel_len_(taps.size()),
        fft_size_(overlap_save_fft_size(taps.size())) {
    if (taps.empty()) throw DomainError("Convolver: empty kernel");
    const fft::RealFft tf(fft_size_);
    std::vector<double> buf(fft_size_, 0.0);
    std::copy(taps.begin(), taps.end(), buf.begin());
    spectrum_ = tf.forward(buf);
  }

  explicit Convolver(const MinPhaseKernel& k) : Convolver(std::span(k.taps)) {}

  std::size_t kernel_len() const { return kernel_len_; }

  std::vector<double> apply(const BlockSpectra& in) const {
    if (in.fft_size != fft_size_ || in.kernel_len != kernel_len_) {
      throw DomainError("Convolver: block layout mismatch");
    }
    std::vector<double> out(in.signal_len);
    const fft::RealFft tf(fft_size_);
    std::vector<fft::Complex> prod(tf.bins());
    std::vector<double> y(fft_size_);
    std::size_t start = 0;
    for (const auto& blk : in.blocks) {
      for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = blk[k] * spectrum_[k];
      tf.inverse(prod, y);
      const std::size_t n = std::min(in.hop, in.signal_len - start);
      std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(kernel_len_ - 1), n,
                  out.begin() + static_cast<std::ptrdiff_t>(start));
      start += in.hop;
    }
    return out;
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.empty()) return {};
    return apply(block_spectra(x, kernel_len_));
  }

 private:
  std::size_t kernel_len_;
  std::size_t fft_size_;
  std::vector<fft::Complex> spectrum_;
};

inline std::vector<double> apply_filter(std::span<const double> signal,
                                        const MinPhaseKernel& kernel) {
  if (kernel.taps.empty()) throw DomainError("apply_filter: empty kernel");
  if (signal.empty()) return {};
  if (kernel.taps.size() <= 64) {
    std::vector<double> out(signal.size(), 0.0);
    for (std::size_t n = 0; n < signal.size(); ++n) {
      const std::size_t kmax = std::min(kernel.taps.size(), n + 1);
      double acc = 0.0;
      for (std::size_t k = 0; k < kmax; ++k) acc += kernel.taps[k] * signal[n - k];
      out[n] = acc;
    }
    return out;
  }
  return Convolver(kernel).apply(signal);
}

}  // namespace whis
