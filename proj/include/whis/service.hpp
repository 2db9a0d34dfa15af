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

// HTTP/JSON service backing the interactive front end.
//
//   GET  /api/presets
//   POST /api/simulate   multipart: "wav" (or "clip_id") + "job" JSON -> wav
//   POST /api/analyze    multipart: "wav" (or "clip_id"), optional "job"
//   GET  /api/iofunc?freq=&alpha=&audiogram_id=
//   GET  /api/hlsplit?audiogram_id=&alpha=

#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "whis/audio_io.hpp"
#include "whis/config.hpp"
#include "whis/errors.hpp"
#include "whis/export.hpp"
#include "whis/gcfb.hpp"
#include "whis/hl_model.hpp"
#include "whis/simulator.hpp"

namespace whis {

template <typename K, typename V>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<V> get(const K& k) {
    std::lock_guard lock(mu_);
    auto it = index_.find(k);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  void put(const K& k, V v) {
    std::lock_guard lock(mu_);
    auto it = index_.find(k);
    if (it != index_.end()) {
      it->second->second = std::move(v);
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.emplace_front(k, std::move(v));
    index_[k] = order_.begin();
    while (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return order_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<K, V>> order_;
  std::unordered_map<K, typename std::list<std::pair<K, V>>::iterator> index_;
};

struct ServiceOptions {
  std::size_t max_body = 50u * 1024u * 1024u;
  std::size_t clip_cache = 16;
  std::string static_dir;       // served at "/" when set
  std::size_t display_frames = 400;  // analyze output is reduced to about this many
};

// Schema violations map to 400, audio that cannot be decoded or calibrated
// to 422.
class Service {
 public:
  Service(std::shared_ptr<const Engine> engine, ServiceOptions opt = {})
      : engine_(std::move(engine)), opt_(std::move(opt)), clips_(opt_.clip_cache) {}

  void mount(httplib::Server& srv) {
    srv.set_payload_max_length(opt_.max_body);
    srv.Get("/api/presets", wrap([this](const auto& q, auto& r) { presets(q, r); }));
    srv.Post("/api/simulate", wrap([this](const auto& q, auto& r) { simulate(q, r); }));
    srv.Post("/api/analyze", wrap([this](const auto& q, auto& r) { analyze(q, r); }));
    srv.Get("/api/iofunc", wrap([this](const auto& q, auto& r) { iofunc(q, r); }));
    srv.Get("/api/hlsplit", wrap([this](const auto& q, auto& r) { hlsplit(q, r); }));
    if (!opt_.static_dir.empty()) {
      srv.set_mount_point("/", opt_.static_dir);
    } else {
      srv.Get("/", [](const httplib::Request&, httplib::Response& r) {
        r.set_content("<!doctype html><title>whis</title><p>WHIS service. "
                      "Endpoints under /api/.</p>",
                      "text/html");
      });
    }
  }

  std::size_t cached_clips() const { return clips_.size(); }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void fail(httplib::Response& r, int status, const std::string& msg) {
    r.status = status;
    r.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
  }

  static Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& q, httplib::Response& r) {
      try {
        h(q, r);
      } catch (const nlohmann::json::exception& e) {
        fail(r, 400, std::string("bad JSON: ") + e.what());
      } catch (const ConfigError& e) {
        fail(r, 400, e.what());
      } catch (const DomainError& e) {
        fail(r, 400, e.what());
      } catch (const ProcessingError& e) {
        fail(r, 422, e.what());
      } catch (const std::exception& e) {
        fail(r, 500, e.what());
      }
    };
  }

  static void send_json(httplib::Response& r, const nlohmann::json& j) {
    r.set_content(j.dump(), "application/json");
  }

  static std::string param(const httplib::Request& q, const char* key,
                           const std::string& fallback) {
    return q.has_param(key) ? q.get_param_value(key) : fallback;
  }

  static double number_param(const httplib::Request& q, const char* key,
                             std::optional<double> fallback = std::nullopt) {
    if (!q.has_param(key)) {
      if (fallback) return *fallback;
      throw ConfigError(std::string("missing query parameter '") + key + "'");
    }
    const auto s = q.get_param_value(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) {
      throw ConfigError(std::string("query parameter '") + key + "' is not a number");
    }
    return v;
  }

  static Audiogram preset(const std::string& id) {
    auto p = find_preset(id);
    if (!p) throw ConfigError("unknown audiogram_id '" + id + "'");
    return *p;
  }

  // Decodes the uploaded clip or fetches it from the cache by id.
  std::pair<std::string, CalibratedSignal> clip(const httplib::Request& q) {
    const double spl_ref = engine_->config().spl_ref;
    if (q.has_file("wav")) {
      const auto& body = q.get_file_value("wav").content;
      const std::vector<std::uint8_t> bytes(body.begin(), body.end());
      auto sig = decode_wav(bytes, spl_ref).signal;
      sig.validate();
      std::ostringstream id;
      id << std::hex << std::hash<std::string>{}(body) << '-' << body.size();
      clips_.put(id.str(), sig);
      return {id.str(), std::move(sig)};
    }
    if (q.has_file("clip_id")) {
      const auto id = q.get_file_value("clip_id").content;
      if (auto s = clips_.get(id)) return {id, *s};
      throw ConfigError("clip_id '" + id + "' is not cached; upload the wav again");
    }
    throw ConfigError("multipart field 'wav' (or 'clip_id') is required");
  }

  static nlohmann::json job_json(const httplib::Request& q) {
    if (!q.has_file("job")) return nlohmann::json::object();
    return nlohmann::json::parse(q.get_file_value("job").content);
  }

  void presets(const httplib::Request&, httplib::Response& r) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : preset_audiograms()) out.push_back(audiogram_to_json(a));
    send_json(r, out);
  }

  void simulate(const httplib::Request& q, httplib::Response& r) {
    if (!q.is_multipart_form_data()) throw ConfigError("expected multipart/form-data");
    const JobRequest job = job_from_json(job_json(q));
    auto [id, sig] = clip(q);
    const auto out = engine_->simulate(std::move(sig), job);
    const auto bytes = encode_wav(out, SampleFormat::kFloat32);
    r.set_header("X-Clip-Id", id);
    r.set_content(std::string(bytes.begin(), bytes.end()), "audio/wav");
  }

  void analyze(const httplib::Request& q, httplib::Response& r) {
    if (!q.is_multipart_form_data()) throw ConfigError("expected multipart/form-data");
    const auto jj = job_json(q);
    const JobRequest job = job_from_json(jj);
    auto [id, sig] = clip(q);
    if (job.spl) sig = set_leq(std::move(sig), *job.spl);
    const auto t = engine_->table(sig.fs);
    const auto spec = resolve_spec(job.audiogram, job.alpha, *t);
    const auto ep = whis::analyze(sig, spec, *t);
    const std::size_t step =
        std::max<std::size_t>(1, (ep.cols + opt_.display_frames - 1) /
                                     std::max<std::size_t>(opt_.display_frames, 1));
    auto out = matrix_to_json(downsample_max(ep, 1, step));
    out["clip_id"] = id;
    out["listener"] = spec.label;
    send_json(r, out);
  }

  void iofunc(const httplib::Request& q, httplib::Response& r) {
    const double freq = number_param(q, "freq");
    const double alpha = number_param(q, "alpha", 1.0);
    const Audiogram ag = preset(param(q, "audiogram_id", "normal"));
    const auto& cfg = engine_->config().gcfb;
    if (!(freq >= 20.0 && freq <= 16000.0)) {
      throw ConfigError("freq must lie in [20, 16000] Hz");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    const auto ref = ChannelRef::at_frequency(freq, cfg);
    const double hl = std::max(
        0.0, interp_on_erbnum(ag.freqs_hz, ag.hl_db, freq, cfg.gc.erb));
    const auto split = split_hl(hl, alpha, ref, cfg);
    auto nh = io_function(1.0, ref, cfg);
    auto hi = io_function(split.alpha, ref, cfg);
    for (double& v : hi.p_out) v -= split.l_pas;
    const auto nh_zero = io_inverse(nh, 0.0).p_in;
    const auto hi_zero = io_inverse(hi, 0.0).p_in;
    auto hi_json = io_curve_to_json(hi, 1.0);
    hi_json["zero_cross_db"] = hi_zero;
    hi_json["split"] = split_to_json(split);
    auto nh_json = io_curve_to_json(nh, 1.0);
    nh_json["zero_cross_db"] = nh_zero;
    send_json(r, {{"freq_hz", freq},
                  {"fp1_hz", ref.fp1},
                  {"audiogram_id", ag.name},
                  {"nh", nh_json},
                  {"hi", hi_json}});
  }

  void hlsplit(const httplib::Request& q, httplib::Response& r) {
    const Audiogram ag = preset(param(q, "audiogram_id", "normal"));
    const double alpha = number_param(q, "alpha", 1.0);
    const auto splits =
        split_at_audiogram(ag, AlphaProfile::uniform(alpha), engine_->config().gcfb);
    nlohmann::json tot = nlohmann::json::array();
    nlohmann::json act = nlohmann::json::array();
    nlohmann::json pas = nlohmann::json::array();
    nlohmann::json al = nlohmann::json::array();
    for (const auto& s : splits) {
      tot.push_back(s.hl_total);
      act.push_back(s.hl_act);
      pas.push_back(s.hl_pas);
      al.push_back(s.alpha);
    }
    send_json(r, {{"audiogram_id", ag.name},
                  {"freqs_hz", ag.freqs_hz},
                  {"alpha_requested", alpha},
                  {"alpha", al},
                  {"hl_total", tot},
                  {"hl_act", act},
                  {"hl_pas", pas}});
  }

  std::shared_ptr<const Engine> engine_;
  ServiceOptions opt_;
  LruCache<std::string, CalibratedSignal> clips_;
};

inline int default_port() {
  if (const char* p = std::getenv("WHIS_PORT")) {
    const int v = std::atoi(p);
    if (v > 0 && v < 65536) return v;
  }
  return 8080;
}

}  // namespace whis
