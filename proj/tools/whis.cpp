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

// whis: command-line front end for the filterbank, the hearing-loss
// simulator and the evaluation tools.
//
// Exit status: 0 success, 2 usage or configuration error, 1 processing error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "whis.hpp"
#include "whis/service.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<double> spl_ref;
};

whis::ToolkitConfig load(const Common& c) {
  whis::ToolkitConfig cfg =
      c.config_path.empty() ? whis::ToolkitConfig{} : whis::load_config(c.config_path);
  if (c.spl_ref) cfg.spl_ref = *c.spl_ref;
  return cfg;
}

whis::CalibratedSignal read_audio(const std::string& path, double spl_ref) {
  auto w = whis::load_wav(path, spl_ref);
  if (w.info.downmixed) {
    std::cerr << "warning: " << path << " has " << w.info.channels
              << " channels; using their mean\n";
  }
  return std::move(w.signal);
}

whis::AlphaProfile parse_alpha(const std::vector<double>& v) {
  whis::AlphaProfile a;
  if (!v.empty()) a.values = v;
  return a;
}

// Audiogram given by preset id or file; file-borne alpha applies unless
// overridden on the command line.
std::pair<whis::Audiogram, whis::AlphaProfile> listener(
    const std::string& audiogram, const std::vector<double>& alpha) {
  auto job = whis::resolve_audiogram(audiogram);
  whis::AlphaProfile a = alpha.empty() && job.alpha ? *job.alpha : parse_alpha(alpha);
  a.validate(job.audiogram.freqs_hz.size());
  return {job.audiogram, a};
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw whis::ConfigError("cannot write " + path);
  file.precision(10);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WHIS hearing-loss simulator and gammachirp filterbank"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--spl-ref", common.spl_ref,
                 "dB SPL corresponding to a digital RMS of 1.0 (default 94)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a hearing loss on a wav file");
  std::string sim_in, sim_out, sim_ag = "normal", sim_method = "dtvf", sim_fmt = "f32";
  std::vector<double> sim_alpha;
  std::optional<double> sim_spl, sim_smear;
  sim->add_option("--in", sim_in, "Input wav")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output wav")->required();
  sim->add_option("--audiogram", sim_ag, "Preset id or audiogram JSON file");
  sim->add_option("--alpha", sim_alpha, "Compression health, scalar or one per audiogram frequency")
      ->delimiter(',');
  sim->add_option("--method", sim_method, "dtvf or fbas")
      ->check(CLI::IsMember({"dtvf", "fbas"}));
  sim->add_option("--spl", sim_spl, "Normalize input to this Leq (dB SPL) first")
      ->check(CLI::Range(0.0, 110.0));
  sim->add_option("--smear-cutoff", sim_smear, "Envelope lowpass cutoff (Hz), fbas only");
  sim->add_option("--format", sim_fmt, "Output sample format")
      ->check(CLI::IsMember({"f32", "pcm16", "pcm24"}));

  // analyze
  auto* ana = app.add_subcommand("analyze", "Excitation pattern as CSV");
  std::string ana_in, ana_out, ana_ag = "normal";
  std::vector<double> ana_alpha;
  std::optional<double> ana_spl;
  bool ana_loss = false;
  ana->add_option("--in", ana_in, "Input wav")->required()->check(CLI::ExistingFile);
  ana->add_option("--out", ana_out, "Output CSV (default stdout)");
  ana->add_option("--audiogram", ana_ag, "Listener audiogram (preset or file)");
  ana->add_option("--alpha", ana_alpha, "Compression health")->delimiter(',');
  ana->add_option("--spl", ana_spl, "Normalize input Leq first")->check(CLI::Range(0.0, 110.0));
  ana->add_flag("--loss", ana_loss, "Export the loss field L_total instead of the EP");

  // iofunc
  auto* iof = app.add_subcommand("iofunc", "IO functions as CSV");
  std::vector<double> iof_freqs{1000.0}, iof_alphas{1.0};
  std::string iof_out, iof_ag = "normal";
  bool iof_sweep = false;
  iof->add_option("--freqs", iof_freqs, "Frequencies (Hz)")->delimiter(',');
  iof->add_option("--alphas", iof_alphas, "Compression health values")->delimiter(',');
  iof->add_option("--out", iof_out, "Output CSV (default stdout)");
  iof->add_flag("--sweep", iof_sweep, "Measure with 200 ms tones through the analyzer");
  iof->add_option("--audiogram", iof_ag, "Listener audiogram for --sweep");

  // bandwidth
  auto* bw = app.add_subcommand("bandwidth", "Cascade ERB versus compression health");
  std::vector<double> bw_freqs{1000.0, 4000.0}, bw_alphas{0.0, 0.5, 1.0};
  bw->add_option("--freqs", bw_freqs, "Frequencies (Hz)")->delimiter(',');
  bw->add_option("--alphas", bw_alphas, "Compression health values")->delimiter(',');

  // distance
  auto* dst = app.add_subcommand("distance", "Normalized spectral distance d_sp");
  std::string dst_test, dst_ref, dst_ref_ag = "normal";
  std::vector<double> dst_ref_alpha;
  double dst_range_ms = 10.0;
  dst->add_option("--test", dst_test, "Test wav, analyzed as normal hearing")
      ->required()->check(CLI::ExistingFile);
  dst->add_option("--ref", dst_ref, "Reference wav")->required()->check(CLI::ExistingFile);
  dst->add_option("--ref-audiogram", dst_ref_ag, "Listener used to analyze the reference");
  dst->add_option("--ref-alpha", dst_ref_alpha, "Compression health for the reference")
      ->delimiter(',');
  dst->add_option("--range-ms", dst_range_ms, "Shift search range (ms)")->check(CLI::NonNegativeNumber);

  // noisy
  auto* noi = app.add_subcommand("noisy", "Add pink noise at a given SNR");
  std::string noi_in, noi_out;
  double noi_snr = 0.0;
  std::uint64_t noi_seed = 1;
  noi->add_option("--in", noi_in, "Input wav")->required()->check(CLI::ExistingFile);
  noi->add_option("--out", noi_out, "Output wav")->required();
  noi->add_option("--snr", noi_snr, "Leq(speech) - Leq(noise), dB")->required();
  noi->add_option("--seed", noi_seed, "Noise seed");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  int srv_port = whis::default_port();
  std::string srv_bind = "127.0.0.1", srv_static;
  srv->add_option("--port", srv_port, "Port (default $WHIS_PORT or 8080)")
      ->check(CLI::Range(1, 65535));
  srv->add_option("--bind", srv_bind, "Bind address");
  srv->add_option("--static", srv_static, "Directory served at /")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::cout.precision(10);
  try {
    const whis::ToolkitConfig cfg = load(common);
    auto engine = std::make_shared<const whis::Engine>(cfg);

    if (*sim) {
      whis::JobRequest job;
      std::tie(job.audiogram, job.alpha) = listener(sim_ag, sim_alpha);
      job.method = whis::parse_method(sim_method);
      job.spl = sim_spl;
      job.smear_cutoff = sim_smear;
      const auto out = engine->simulate(read_audio(sim_in, cfg.spl_ref), job);
      const auto fmt = sim_fmt == "pcm16"   ? whis::SampleFormat::kPcm16
                       : sim_fmt == "pcm24" ? whis::SampleFormat::kPcm24
                                            : whis::SampleFormat::kFloat32;
      whis::save_wav(out, sim_out, fmt);
    } else if (*ana) {
      auto x = read_audio(ana_in, cfg.spl_ref);
      if (ana_spl) x = whis::set_leq(std::move(x), *ana_spl);
      const auto [ag, alpha] = listener(ana_ag, ana_alpha);
      const auto t = engine->table(x.fs);
      const auto spec = whis::resolve_spec(ag, alpha, *t);
      std::ofstream f;
      auto& os = out_stream(ana_out, f);
      if (ana_loss) {
        whis::write_matrix_csv(os, whis::analyze_loss(x, spec, *t).l_total);
      } else {
        whis::write_matrix_csv(os, whis::analyze(x, spec, *t));
      }
    } else if (*iof) {
      std::ofstream f;
      auto& os = out_stream(iof_out, f);
      const auto t = engine->table(cfg.gcfb.fs);
      if (iof_sweep) {
        std::vector<whis::IoSweepResult> all;
        for (double a : iof_alphas) {
          const auto [ag, alpha] = listener(iof_ag, {a});
          const whis::Gcfb g(*t, whis::resolve_spec(ag, alpha, *t));
          std::ostringstream label;
          label << ag.name << "-alpha" << a;
          auto s = whis::sweep_io(iof_freqs, g, label.str());
          all.insert(all.end(), s.begin(), s.end());
        }
        whis::write_io_csv(os, all);
      } else {
        os << "freq_hz,alpha,input_db,output_db\n";
        for (double fr : iof_freqs) {
          const auto ref = whis::ChannelRef::at_frequency(fr, cfg.gcfb);
          for (double a : iof_alphas) {
            const auto c = whis::io_function(a, ref, cfg.gcfb);
            for (std::size_t i = 0; i < c.p_out.size(); i += 10) {
              os << fr << ',' << a << ',' << c.input_at(i) << ',' << c.p_out[i] << '\n';
            }
          }
        }
      }
    } else if (*bw) {
      const auto t = engine->table(cfg.gcfb.fs);
      std::cout << "freq_hz,alpha,fp1_hz,erb_hz,ratio_vs_alpha1,ratio_vs_erbn\n";
      for (double fr : bw_freqs) {
        for (double a : bw_alphas) {
          const auto r = whis::measure_bandwidth(fr, a, *t);
          std::cout << fr << ',' << a << ',' << r.fp1 << ',' << r.erb << ','
                    << r.ratio_alpha1 << ',' << r.ratio_erbn << '\n';
        }
      }
    } else if (*dst) {
      const auto test = read_audio(dst_test, cfg.spl_ref);
      const auto ref = read_audio(dst_ref, cfg.spl_ref);
      if (test.fs != ref.fs) throw whis::ConfigError("test and ref sample rates differ");
      const auto t = engine->table(ref.fs);
      const auto [ag, alpha] = listener(dst_ref_ag, dst_ref_alpha);
      const auto ep_test = whis::analyze(test, whis::HearingSpec::normal(t->size()), *t);
      const auto ep_ref = whis::analyze(ref, whis::resolve_spec(ag, alpha, *t), *t);
      const auto d = whis::spectral_distance(ep_test, ep_ref, dst_range_ms / 1000.0);
      std::cout << "d_sp_db,shift_frames,floored\n"
                << d.d_sp << ',' << d.shift << ',' << (d.floored ? 1 : 0) << '\n';
    } else if (*noi) {
      const auto x = read_audio(noi_in, cfg.spl_ref);
      whis::save_wav(whis::pink_noise_mix(x, noi_snr, noi_seed), noi_out);
    } else if (*srv) {
      httplib::Server server;
      whis::ServiceOptions opt;
      opt.static_dir = srv_static;
      whis::Service service(engine, opt);
      service.mount(server);
      std::cerr << "listening on " << srv_bind << ':' << srv_port << '\n';
      if (!server.listen(srv_bind, srv_port)) {
        std::cerr << "error: cannot bind " << srv_bind << ':' << srv_port << '\n';
        return 1;
      }
    }
  } catch (const whis::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
