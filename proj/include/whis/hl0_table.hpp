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

// Cochlear-input level corresponding to 0 dB HL, per frequency.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "whis/errors.hpp"

namespace whis {

struct Hl0Table {
  // Placeholder values (dB SPL at the cochlear input); replace through the
  // configuration file when a measured middle-ear transfer is available.
  std::vector<double> freqs_hz{125, 250, 500, 1000, 2000, 4000, 8000};
  std::vector<double> levels_db{30, 20, 12, 7, 9, 12, 16};

  void validate() const {
    if (freqs_hz.size() != levels_db.size() || freqs_hz.empty()) {
      throw ConfigError("HL-0-dB table: freqs and levels must be non-empty "
                        "and of equal length");
    }
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
      if (!(freqs_hz[i] > 0.0) || !std::isfinite(levels_db[i])) {
        throw ConfigError("HL-0-dB table: invalid entry " + std::to_string(i));
      }
      if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])) {
        throw ConfigError("HL-0-dB table: frequencies must increase");
      }
    }
  }

  // Linear in log-frequency between entries, constant beyond the ends.
  double level_at(double f_hz) const {
    if (!(f_hz >= 20.0 && f_hz <= 16000.0)) {
      throw DomainError("hl0_input_level: frequency outside [20, 16000] Hz");
    }
    if (f_hz <= freqs_hz.front()) return levels_db.front();
    if (f_hz >= freqs_hz.back()) return levels_db.back();
    std::size_t i = 1;
    while (freqs_hz[i] < f_hz) ++i;
    const double t = std::log(f_hz / freqs_hz[i - 1]) /
                     std::log(freqs_hz[i] / freqs_hz[i - 1]);
    return levels_db[i - 1] + t * (levels_db[i] - levels_db[i - 1]);
  }
};

inline double hl0_input_level(double f_hz, const Hl0Table& table = {}) {
  return table.level_at(f_hz);
}

}  // namespace whis
