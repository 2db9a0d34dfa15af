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

// JSON configuration: filterbank parameters, the HL-0-dB table, calibration
// reference and synthesis defaults. Unknown keys are rejected so that typos
// surface as errors instead of silently falling back to defaults.

#pragma once

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "whis/channel_table.hpp"
#include "whis/errors.hpp"
#include "whis/hl_model.hpp"
#include "whis/signal.hpp"
#include "whis/whis_synth.hpp"

namespace whis {

using Json = nlohmann::json;

struct ToolkitConfig {
  GcfbConfig gcfb;
  DtvfConfig dtvf;
  SmearConfig smear;
  double spl_ref = kDefaultSplRef;
};

namespace detail {

inline void check_keys(const Json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void get_to(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline std::vector<double> number_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + ": expected an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

}  // namespace detail

inline Hl0Table hl0_table_from_json(const Json& j) {
  detail::check_keys(j, "hl0_table", {"freqs_hz", "levels_db"});
  if (!j.contains("freqs_hz") || !j.contains("levels_db")) {
    throw ConfigError("hl0_table: freqs_hz and levels_db are required");
  }
  Hl0Table t;
  t.freqs_hz = detail::number_array(j["freqs_hz"], "hl0_table.freqs_hz");
  t.levels_db = detail::number_array(j["levels_db"], "hl0_table.levels_db");
  t.validate();
  return t;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline ToolkitConfig config_from_json(const Json& j) {
  detail::check_keys(j, "config", {"spl_ref", "gcfb", "gc_params", "hl0_table",
                                   "hl0_table_path", "dtvf", "smear"});
  ToolkitConfig c;
  detail::get_to(j, "spl_ref", c.spl_ref, "config");

  double fs = c.gcfb.fs;
  if (j.contains("gcfb")) detail::get_to(j["gcfb"], "fs", fs, "gcfb");
  c.gcfb = GcfbConfig::for_rate(fs);
  if (j.contains("gcfb")) {
    const auto& g = j["gcfb"];
    detail::check_keys(g, "gcfb",
                       {"fs", "n_ch", "f_lo", "f_hi", "p_gain0", "w1", "w2", "p",
                        "level_shift_erb", "kernel_len", "design_fft",
                        "frame_len", "frame_shift", "io_min", "io_max",
                        "io_step"});
    auto& o = c.gcfb;
    detail::get_to(g, "n_ch", o.n_ch, "gcfb");
    detail::get_to(g, "f_lo", o.f_lo, "gcfb");
    detail::get_to(g, "f_hi", o.f_hi, "gcfb");
    detail::get_to(g, "p_gain0", o.p_gain0, "gcfb");
    detail::get_to(g, "w1", o.w1, "gcfb");
    detail::get_to(g, "w2", o.w2, "gcfb");
    detail::get_to(g, "p", o.p, "gcfb");
    detail::get_to(g, "level_shift_erb", o.level_shift_erb, "gcfb");
    detail::get_to(g, "kernel_len", o.kernel_len, "gcfb");
    detail::get_to(g, "design_fft", o.design_fft, "gcfb");
    detail::get_to(g, "frame_len", o.frame_len, "gcfb");
    detail::get_to(g, "frame_shift", o.frame_shift, "gcfb");
    detail::get_to(g, "io_min", o.io_min, "gcfb");
    detail::get_to(g, "io_max", o.io_max, "gcfb");
    detail::get_to(g, "io_step", o.io_step, "gcfb");
  }
  if (j.contains("gc_params")) {
    const auto& g = j["gc_params"];
    detail::check_keys(g, "gc_params",
                       {"b1", "c1", "b2", "c2", "frat0", "frat1", "order",
                        "cascade_level_db"});
    auto& p = c.gcfb.gc;
    detail::get_to(g, "b1", p.b1, "gc_params");
    detail::get_to(g, "c1", p.c1, "gc_params");
    detail::get_to(g, "b2", p.b2, "gc_params");
    detail::get_to(g, "c2", p.c2_nh, "gc_params");
    detail::get_to(g, "frat0", p.frat0, "gc_params");
    detail::get_to(g, "frat1", p.frat1, "gc_params");
    detail::get_to(g, "order", p.order, "gc_params");
    detail::get_to(g, "cascade_level_db", p.cascade_level_db, "gc_params");
  }
  if (j.contains("hl0_table") && j.contains("hl0_table_path")) {
    throw ConfigError("config: give hl0_table or hl0_table_path, not both");
  }
  if (j.contains("hl0_table")) c.gcfb.hl0 = hl0_table_from_json(j["hl0_table"]);
  if (j.contains("hl0_table_path")) {
    if (!j["hl0_table_path"].is_string()) {
      throw ConfigError("config.hl0_table_path: wrong type");
    }
    c.gcfb.hl0 = hl0_table_from_json(
        read_json_file(j["hl0_table_path"].get<std::string>()));
  }
  if (j.contains("dtvf")) {
    const auto& d = j["dtvf"];
    detail::check_keys(d, "dtvf", {"frame_len", "frame_shift", "kernel_len", "design_fft"});
    detail::get_to(d, "frame_len", c.dtvf.frame_len, "dtvf");
    detail::get_to(d, "frame_shift", c.dtvf.frame_shift, "dtvf");
    detail::get_to(d, "kernel_len", c.dtvf.kernel_len, "dtvf");
    detail::get_to(d, "design_fft", c.dtvf.design_fft, "dtvf");
  }
  if (j.contains("smear")) {
    const auto& s = j["smear"];
    detail::check_keys(s, "smear", {"envelope", "cutoff_hz", "order_factor", "rectify_smooth_hz"});
    if (s.contains("envelope")) {
      if (!s["envelope"].is_string()) throw ConfigError("smear.envelope: wrong type");
      const auto e = s["envelope"].get<std::string>();
      if (e == "hilbert") {
        c.smear.envelope = SmearConfig::Envelope::kHilbert;
      } else if (e == "rectify") {
        c.smear.envelope = SmearConfig::Envelope::kRectify;
      } else {
        throw ConfigError("smear.envelope: expected 'hilbert' or 'rectify'");
      }
    }
    detail::get_to(s, "cutoff_hz", c.smear.cutoff_hz, "smear");
    detail::get_to(s, "order_factor", c.smear.order_factor, "smear");
    detail::get_to(s, "rectify_smooth_hz", c.smear.rectify_smooth_hz, "smear");
  }
  c.gcfb.validate();
  c.dtvf.validate();
  return c;
}

inline ToolkitConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

// {"name": ..., "freqs_hz": [...], "hl_db": [...], "alpha": 0.5 | [...]}
struct AudiogramJob {
  Audiogram audiogram;
  std::optional<AlphaProfile> alpha;
};

inline AudiogramJob audiogram_from_json(const Json& j) {
  detail::check_keys(j, "audiogram", {"name", "freqs_hz", "hl_db", "alpha"});
  if (!j.contains("freqs_hz") || !j.contains("hl_db")) {
    throw ConfigError("audiogram: freqs_hz and hl_db are required");
  }
  AudiogramJob out;
  out.audiogram.name = j.value("name", std::string("custom"));
  out.audiogram.freqs_hz = detail::number_array(j["freqs_hz"], "audiogram.freqs_hz");
  out.audiogram.hl_db = detail::number_array(j["hl_db"], "audiogram.hl_db");
  out.audiogram.validate();
  if (j.contains("alpha")) {
    AlphaProfile a;
    a.values = j["alpha"].is_number()
                   ? std::vector<double>{j["alpha"].get<double>()}
                   : detail::number_array(j["alpha"], "audiogram.alpha");
    a.validate(out.audiogram.freqs_hz.size());
    out.alpha = a;
  }
  return out;
}

inline Json audiogram_to_json(const Audiogram& a) {
  return {{"name", a.name}, {"freqs_hz", a.freqs_hz}, {"hl_db", a.hl_db}};
}

// Preset id, or a path to an audiogram JSON file.
inline AudiogramJob resolve_audiogram(const std::string& id_or_path) {
  if (auto p = find_preset(id_or_path)) return {*p, std::nullopt};
  std::ifstream probe(id_or_path);
  if (!probe) {
    throw ConfigError("audiogram '" + id_or_path +
                      "' is neither a preset nor a readable file");
  }
  return audiogram_from_json(read_json_file(id_or_path));
}

}  // namespace whis
