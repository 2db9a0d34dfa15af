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

// Frequency <-> ERB_N-number conversions.

#pragma once

#include <cmath>
#include <numbers>

#include "whis/errors.hpp"

namespace whis {

struct ErbScale {
  double width_at_zero = 24.7;  // Hz
  double slope = 4.37;          // per kHz
  double number_scale = 21.4;   // Cam per decade
};

// Equivalent rectangular bandwidth of the normal-hearing auditory filter.
inline double erb_of_freq(double f_hz, const ErbScale& s = {}) {
  if (!(f_hz >= 0.0)) throw DomainError("erb_of_freq: frequency must be >= 0");
  return s.width_at_zero * (s.slope * f_hz / 1000.0 + 1.0);
}

inline double erbnum_of_freq(double f_hz, const ErbScale& s = {}) {
  if (!(f_hz >= 0.0)) {
    throw DomainError("erbnum_of_freq: frequency must be >= 0");
  }
  return s.number_scale * std::log10(s.slope * f_hz / 1000.0 + 1.0);
}

inline double freq_of_erbnum(double erbnum, const ErbScale& s = {}) {
  if (!(erbnum >= 0.0)) {
    throw DomainError("freq_of_erbnum: ERB number must be >= 0");
  }
  return (std::pow(10.0, erbnum / s.number_scale) - 1.0) * 1000.0 / s.slope;
}

// d(erbnum)/df, Cam per Hz.
inline double erbnum_derivative(double f_hz, const ErbScale& s = {}) {
  if (!(f_hz >= 0.0)) {
    throw DomainError("erbnum_derivative: frequency must be >= 0");
  }
  return s.number_scale / std::numbers::ln10 * (s.slope / 1000.0) /
         (s.slope * f_hz / 1000.0 + 1.0);
}

}  // namespace whis
