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

#include "whis/filter_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "whis/auditory_scale.hpp"
#include "whis/errors.hpp"
#include "whis/fft.hpp"

namespace whis {
namespace {

constexpr double kFs = 48000.0;

TEST(Gammatone, PeakAndHalfBandwidthPoints) {
  const GcParams p;
  for (double fr1 : {250.0, 1000.0, 4000.0}) {
    const double w = p.b1 * erb_of_freq(fr1);
    EXPECT_DOUBLE_EQ(gammatone_mag(fr1, fr1, p), 1.0);
    EXPECT_NEAR(gammatone_mag(fr1 + w, fr1, p), 0.25, 1e-12);
    EXPECT_NEAR(gammatone_mag(fr1 - w, fr1, p), 0.25, 1e-12);
    for (double d : {10.0, 77.0, 500.0}) {
      EXPECT_DOUBLE_EQ(gammatone_mag(fr1 + d, fr1, p), gammatone_mag(fr1 - d, fr1, p));
    }
  }
}

TEST(PassiveGammachirp, ReducesToGammatoneWithoutChirp) {
  GcParams p;
  EXPECT_DOUBLE_EQ(pgc_mag(1000.0, 1000.0, p), p.a_gamma);
  p.c1 = 0.0;
  for (double f = 100.0; f < 3000.0; f += 37.0) {
    EXPECT_DOUBLE_EQ(pgc_mag(f, 1000.0, p), gammatone_mag(f, 1000.0, p));
  }
}

// d/dx [-n/2 log(1+x^2) + c1 atan x] = 0  =>  x = c1 / n.
TEST(PassiveGammachirp, PeakMatchesClosedForm) {
  for (double c1 : {-2.96, 2.96, 1.0}) {
    GcParams p;
    p.c1 = c1;
    for (double fr1 : {300.0, 1000.0, 5000.0}) {
      const double expected = fr1 + c1 / p.order * p.b1 * erb_of_freq(fr1);
      EXPECT_NEAR(pgc_peak_freq(fr1, p), expected, 1e-4 * expected) << c1 << " " << fr1;
    }
  }
}

TEST(PassiveGammachirp, PositiveChirpShiftsPeakUpOnDenseGrid) {
  GcParams p;
  p.c1 = 2.96;
  const double fr1 = 2000.0;
  double best_f = 0.0;
  double best = -1.0;
  for (double f = 500.0; f < 6000.0; f += 0.5) {
    const double v = pgc_mag(f, fr1, p);
    if (v > best) {
      best = v;
      best_f = f;
    }
  }
  EXPECT_GT(best_f, fr1);
  EXPECT_NEAR(pgc_peak_freq(fr1, p), best_f, 0.5);
}

TEST(PassiveGammachirp, Fr1ForPeakInvertsPeak) {
  const GcParams p;
  for (double fp1 : {100.0, 1000.0, 7000.0}) {
    EXPECT_NEAR(pgc_peak_freq(fr1_for_peak(fp1, p), p), fp1, 1e-6 * fp1);
  }
}

TEST(Frat, AffineValues) {
  EXPECT_DOUBLE_EQ(frat(0.0), 0.466);
  EXPECT_NEAR(frat(50.0), 1.011, 1e-12);
  EXPECT_NEAR(frat(100.0), 1.556, 1e-12);
  for (double a : {-20.0, 13.0, 70.0}) {
    for (double b : {5.0, 40.0}) {
      EXPECT_NEAR(frat(a) + frat(b), frat(0.0) + frat(a + b), 1e-12);
    }
  }
}

TEST(HighPassAsymmetric, UnityWhenInactive) {
  const auto f = uniform_grid(kFs, 1024);
  for (double v : hpaf_mag(f, 1000.0, 0.0)) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(HighPassAsymmetric, RawAsymptoteAndUnitPeak) {
  const GcParams p;
  EXPECT_NEAR(hpaf_raw(1e12, 1000.0, 2.2, p), std::exp(2.2 * std::numbers::pi / 2), 1e-6);
  const auto f = uniform_grid(kFs, 4096);
  for (double fr2 : {200.0, 1500.0, 9000.0}) {
    for (double c2 : {0.3, 1.1, 2.2}) {
      const auto h = hpaf_mag(f, fr2, c2, p);
      EXPECT_DOUBLE_EQ(*std::max_element(h.begin(), h.end()), 1.0);
    }
  }
}

TEST(HighPassAsymmetric, DynamicRangeShrinksWithAlpha) {
  const GcParams p;
  const auto f = uniform_grid(kFs, 4096);
  double prev = INFINITY;
  for (double alpha : {1.0, 0.5, 0.0}) {
    const auto h = hpaf_mag(f, 1011.0, alpha * p.c2_nh, p);
    const auto [mn, mx] = std::minmax_element(h.begin(), h.end());
    const double range = 20.0 * std::log10(*mx / *mn);
    EXPECT_LT(range, prev);
    prev = range;
  }
  EXPECT_NEAR(prev, 0.0, 1e-12);
}

TEST(Cascade, InactiveEqualsPassiveFilter) {
  const auto g = ChannelGeometry::from_peak(1000.0);
  const auto f = uniform_grid(kFs, 2048);
  const auto c = cascade_mag(f, g, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    EXPECT_NEAR(c[k], pgc_mag(f[k], g.fr1), 1e-15);
  }
}

TEST(Cascade, GeometryRelations) {
  const GcParams p;
  const auto g = ChannelGeometry::from_peak(2000.0, p);
  EXPECT_NEAR(g.fp1, 2000.0, 1e-5);
  EXPECT_NEAR(g.fr2, frat(p.cascade_level_db, p) * g.fp1, 1e-9);
  EXPECT_NEAR(pgc_peak_freq(g.fr1, p), g.fp1, 1e-6);
}

// Gammatone of order 4: integral of (1 + x^2)^-4 dx = 5 pi / 16.
TEST(Bandwidth, NumericErbMatchesGammatoneClosedForm) {
  const GcParams p;
  const double fr1 = 2000.0;
  const auto f = uniform_grid(kFs, 65536);
  MagnitudeSpectrum m{kFs, std::vector<double>(f.size())};
  for (std::size_t k = 0; k < f.size(); ++k) m.gains[k] = gammatone_mag(f[k], fr1, p);
  const double expected = 5.0 * std::numbers::pi / 16.0 * p.b1 * erb_of_freq(fr1);
  EXPECT_NEAR(equivalent_rectangular_bandwidth(m), expected, 1e-3 * expected);
}

TEST(Bandwidth, RectangleIsItsWidth) {
  MagnitudeSpectrum m{kFs, std::vector<double>(8193, 0.0)};
  const double bw = m.bin_width();
  for (std::size_t k = 1000; k <= 1400; ++k) m.gains[k] = 3.0;
  EXPECT_NEAR(equivalent_rectangular_bandwidth(m), 401 * bw, 1e-9);
}

TEST(Bandwidth, CascadeWidensAsAlphaFalls) {
  for (double fp1 : {1000.0, 4000.0}) {
    const auto g = ChannelGeometry::from_peak(fp1);
    double prev = 0.0;
    for (int i = 10; i >= 0; --i) {
      const double e =
          equivalent_rectangular_bandwidth(cascade_spectrum(g, i / 10.0, kFs, 16384));
      EXPECT_GE(e, prev - 1e-9) << "alpha " << i / 10.0;
      prev = e;
    }
  }
}

TEST(MinPhase, FlatSpectrumGivesImpulse) {
  const auto k = design_minphase(MagnitudeSpectrum::unity(kFs, 4096), 256);
  ASSERT_EQ(k.length(), 256u);
  EXPECT_NEAR(k.taps[0], 1.0, 1e-9);
  for (std::size_t i = 1; i < k.taps.size(); ++i) EXPECT_NEAR(k.taps[i], 0.0, 1e-9);
}

TEST(MinPhase, FlatAttenuationScalesImpulse) {
  auto m = MagnitudeSpectrum::unity(kFs, 4096);
  for (double& g : m.gains) g = 0.1;
  const auto k = design_minphase(m, 64);
  EXPECT_NEAR(k.taps[0], 0.1, 1e-9);
  for (std::size_t i = 1; i < k.taps.size(); ++i) EXPECT_NEAR(k.taps[i], 0.0, 1e-9);
}

MagnitudeSpectrum smooth_lowpass(std::size_t n_fft) {
  MagnitudeSpectrum m{kFs, std::vector<double>(n_fft / 2 + 1)};
  for (std::size_t k = 0; k < m.gains.size(); ++k) {
    const double r = m.freq(k) / 3000.0;
    m.gains[k] = 1.0 / std::sqrt(1.0 + std::pow(r, 6));
  }
  return m;
}

TEST(MinPhase, LowpassReconstruction) {
  const auto target = smooth_lowpass(8192);
  const auto k = design_minphase(target, 2048);
  const auto got = kernel_response(k, kFs, 8192);
  for (std::size_t i = 0; i < target.gains.size(); ++i) {
    const double t_db = 20.0 * std::log10(target.gains[i]);
    if (t_db < -40.0) continue;
    ASSERT_NEAR(20.0 * std::log10(got.gains[i]), t_db, 0.5) << "bin " << i;
  }
}

TEST(MinPhase, CascadeKernelMatchesDesignNearPeak) {
  const auto g = ChannelGeometry::from_peak(1000.0);
  const auto m = cascade_spectrum(g, 1.0, kFs, 16384);
  const auto k = design_minphase(m, 4096);
  const auto got = kernel_response(k, kFs, 16384);
  for (std::size_t i = 0; i < m.gains.size(); ++i) {
    const double t_db = 20.0 * std::log10(m.gains[i]);
    if (t_db < -40.0) continue;
    ASSERT_NEAR(20.0 * std::log10(got.gains[i]), t_db, 0.5) << "bin " << i;
  }
}

// A minimum-phase sequence has the most front-loaded energy of all sequences
// with its magnitude; compare against the linear-phase one.
TEST(MinPhase, EnergyFrontLoadedVersusLinearPhase) {
  const std::size_t n = 4096;
  const auto target = smooth_lowpass(n);
  const auto k = design_minphase(target, n);
  const fft::RealFft tf(n);
  std::vector<fft::Complex> spec(tf.bins());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    spec[i] = std::polar(target.gains[i], -std::numbers::pi * i);  // delay n/2
  }
  const auto lin = tf.inverse(spec);
  double e_min = 0.0;
  double e_lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e_min += k.taps[i] * k.taps[i];
    e_lin += lin[i] * lin[i];
    ASSERT_GE(e_min, e_lin - 1e-9) << i;
  }
}

TEST(MinPhase, InvalidInputs) {
  EXPECT_THROW(design_minphase(MagnitudeSpectrum{kFs, std::vector<double>(2049, 0.0)}, 64),
               DomainError);
  EXPECT_THROW(design_minphase(MagnitudeSpectrum::unity(kFs, 4096), 16), DomainError);
  EXPECT_THROW(design_minphase(MagnitudeSpectrum::unity(kFs, 64), 128), DomainError);
  auto bad = MagnitudeSpectrum::unity(kFs, 64);
  bad.gains[3] = NAN;
  EXPECT_THROW(design_minphase(bad, 32), DomainError);
}

std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

std::vector<double> direct_conv(const std::vector<double>& x, const std::vector<double>& h) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t k = 0; k < h.size() && k <= n; ++k) y[n] += h[k] * x[n - k];
  }
  return y;
}

TEST(ApplyFilter, ImpulseKernelAndImpulseInput) {
  const auto x = random_signal(1000, 1);
  MinPhaseKernel id{std::vector<double>(100, 0.0)};
  id.taps[0] = 1.0;
  const auto y = apply_filter(x, id);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-12);

  const MinPhaseKernel h{random_signal(300, 2)};
  std::vector<double> imp(500, 0.0);
  imp[0] = 1.0;
  const auto r = apply_filter(imp, h);
  for (std::size_t i = 0; i < h.taps.size(); ++i) EXPECT_NEAR(r[i], h.taps[i], 1e-12);
  for (std::size_t i = h.taps.size(); i < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-12);
  EXPECT_TRUE(apply_filter({}, h).empty());
}

TEST(ApplyFilter, MatchesDirectConvolution) {
  for (std::size_t len : {8u, 64u, 65u, 511u, 2048u}) {
    const auto h = random_signal(len, 10 + static_cast<unsigned>(len));
    for (std::size_t n : {1u, 100u, 3001u, 20000u}) {
      const auto x = random_signal(n, 3);
      const auto want = direct_conv(x, h);
      const auto got = apply_filter(x, MinPhaseKernel{h});
      ASSERT_EQ(got.size(), n);
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(got[i], want[i], 1e-10) << len << " " << n;
    }
  }
}

// Steady-state output of a periodic input over one period equals the
// circular convolution, whose energy follows from the DFTs.
TEST(ApplyFilter, ParsevalForPeriodicInput) {
  const std::size_t period = 1024;
  for (std::size_t len : {48u, 700u}) {
    const auto one = random_signal(period, 5);
    const auto h = random_signal(len, 6);
    std::vector<double> x(4 * period);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = one[i % period];
    const auto y = apply_filter(x, MinPhaseKernel{h});
    double e_time = 0.0;
    for (std::size_t i = 2 * period; i < 3 * period; ++i) e_time += y[i] * y[i];

    const fft::RealFft tf(period);
    std::vector<double> hp(period, 0.0);
    for (std::size_t i = 0; i < len; ++i) hp[i % period] += h[i];
    const auto xs = tf.forward(one);
    const auto hs = tf.forward(hp);
    double e_freq = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double w = (k == 0 || k == period / 2) ? 1.0 : 2.0;
      e_freq += w * std::norm(xs[k] * hs[k]);
    }
    e_freq /= static_cast<double>(period);
    EXPECT_NEAR(e_time, e_freq, 1e-6 * e_freq);
  }
}

TEST(Convolver, SharedBlocksMatchPerKernelApply) {
  const auto x = random_signal(12345, 7);
  const auto h1 = random_signal(256, 8);
  const auto h2 = random_signal(256, 9);
  const auto blocks = block_spectra(x, 256);
  const Convolver c1(h1), c2(h2);
  const auto a = c1.apply(blocks);
  const auto b = c2.apply(blocks);
  const auto da = direct_conv(x, h1);
  const auto db = direct_conv(x, h2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_NEAR(a[i], da[i], 1e-10);
    ASSERT_NEAR(b[i], db[i], 1e-10);
  }
  EXPECT_THROW(Convolver(random_signal(128, 1)).apply(blocks), DomainError);
}

}  // namespace
}  // namespace whis
