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

// End-to-end simulation jobs and a per-rate filterbank cache.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "whis/channel_table.hpp"
#include "whis/config.hpp"
#include "whis/errors.hpp"
#include "whis/hl_model.hpp"
#include "whis/parallel.hpp"
#include "whis/signal.hpp"
#include "whis/whis_analysis.hpp"
#include "whis/whis_synth.hpp"

namespace whis {

enum class SynthMethod { kDtvf, kFbas };

inline SynthMethod parse_method(const std::string& s) {
  if (s == "dtvf") return SynthMethod::kDtvf;
  if (s == "fbas") return SynthMethod::kFbas;
  throw ConfigError("method must be 'dtvf' or 'fbas', got '" + s + "'");
}

inline const char* method_name(SynthMethod m) {
  return m == SynthMethod::kDtvf ? "dtvf" : "fbas";
}

struct JobRequest {
  Audiogram audiogram = Audiogram::flat(0.0, "normal");
  AlphaProfile alpha;
  SynthMethod method = SynthMethod::kDtvf;
  std::optional<double> smear_cutoff;  // FBAS only
  std::optional<double> spl;           // input Leq, dB SPL

  void validate() const {
    audiogram.validate();
    alpha.validate(audiogram.freqs_hz.size());
    if (spl && !(*spl >= 0.0 && *spl <= 110.0)) {
      throw ConfigError("spl must lie in [0, 110] dB");
    }
    if (smear_cutoff && method != SynthMethod::kFbas) {
      throw ConfigError("smear cutoff applies to the fbas method only");
    }
    if (smear_cutoff && !(*smear_cutoff > 0.0)) {
      throw ConfigError("smear cutoff must be > 0");
    }
  }
};

// {"audiogram": <id or object>, "alpha": ..., "method": ..., "spl": ...,
//  "smear_cutoff": ...}
inline JobRequest job_from_json(const Json& j) {
  detail::check_keys(j, "job", {"audiogram", "audiogram_id", "alpha", "method",
                                "spl", "smear_cutoff"});
  JobRequest r;
  std::optional<AlphaProfile> alpha_from_ag;
  if (j.contains("audiogram") && j.contains("audiogram_id")) {
    throw ConfigError("job: give audiogram or audiogram_id, not both");
  }
  if (j.contains("audiogram_id")) {
    const auto id = j["audiogram_id"].get<std::string>();
    auto p = find_preset(id);
    if (!p) throw ConfigError("job: unknown audiogram_id '" + id + "'");
    r.audiogram = *p;
  } else if (j.contains("audiogram")) {
    auto ag = audiogram_from_json(j["audiogram"]);
    r.audiogram = ag.audiogram;
    alpha_from_ag = ag.alpha;
  }
  if (j.contains("alpha")) {
    const auto& a = j["alpha"];
    r.alpha.values = a.is_number() ? std::vector<double>{a.get<double>()}
                                   : detail::number_array(a, "job.alpha");
  } else if (alpha_from_ag) {
    r.alpha = *alpha_from_ag;
  }
  if (j.contains("method")) {
    if (!j["method"].is_string()) throw ConfigError("job.method: expected string");
    r.method = parse_method(j["method"].get<std::string>());
  }
  if (j.contains("spl")) {
    if (!j["spl"].is_number()) throw ConfigError("job.spl: expected number");
    r.spl = j["spl"].get<double>();
  }
  if (j.contains("smear_cutoff") && !j["smear_cutoff"].is_null()) {
    if (!j["smear_cutoff"].is_number()) {
      throw ConfigError("job.smear_cutoff: expected number");
    }
    r.smear_cutoff = j["smear_cutoff"].get<double>();
  }
  r.validate();
  return r;
}

// Builds filterbanks lazily, one per sample rate, and shares them.
class Engine {
 public:
  explicit Engine(ToolkitConfig cfg = {}) : cfg_(std::move(cfg)) {}

  const ToolkitConfig& config() const { return cfg_; }

  std::shared_ptr<const ChannelTable> table(double fs) const {
    std::lock_guard lock(mu_);
    auto it = tables_.find(fs);
    if (it != tables_.end()) return it->second;
    GcfbConfig g = cfg_.gcfb;
    if (g.fs != fs) {
      const GcfbConfig d = GcfbConfig::for_rate(fs);
      g.fs = fs;
      g.f_hi = std::min(g.f_hi, d.f_hi);
      g.kernel_len = d.kernel_len;
    }
    auto t = std::make_shared<const ChannelTable>(build_filterbank(g));
    tables_.emplace(fs, t);
    return t;
  }

  CalibratedSignal simulate(CalibratedSignal x, const JobRequest& job) const {
    job.validate();
    if (job.spl) x = set_leq(std::move(x), *job.spl);
    x.validate();
    const auto t = table(x.fs);
    if (x.samples.empty()) return x;
    const HearingSpec spec = resolve_spec(job.audiogram, job.alpha, *t);
    const LossField loss = analyze_loss(x, spec, *t);
    if (job.method == SynthMethod::kDtvf) {
      return synth_dtvf(x, loss, *t, cfg_.dtvf);
    }
    const CascadeBank bank = make_cascade_bank(*t, spec.alphas());
    const FbasCalibration cal = calibrate_fbas(bank, *t);
    auto channels = attenuated_channels(x, bank, loss);
    if (job.smear_cutoff) {
      SmearConfig sc = cfg_.smear;
      sc.cutoff_hz = *job.smear_cutoff;
      sc.validate(x.fs);
      parallel_for(channels.size(), [&](std::size_t c) {
        channels[c] = temporal_smear(channels[c], sc, x.fs);
      });
    }
    CalibratedSignal out = x;
    out.samples = synth_fbas(std::move(channels), cal);
    return out;
  }

 private:
  ToolkitConfig cfg_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const ChannelTable>> tables_;
};

}  // namespace whis
