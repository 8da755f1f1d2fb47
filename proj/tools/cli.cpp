// Copyright 2026 The derev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "derev/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "derev/audio_io.hpp"
#include "derev/metrics.hpp"
#include "derev/psd.hpp"
#include "derev/room_sim.hpp"
#include "derev/stft.hpp"
#include "derev/vace.hpp"
#include "derev/wpe.hpp"

namespace derev {

namespace {

namespace fs = std::filesystem;

struct StftFlags {
  int window_len = 1024;
  int hop = 256;
  int fft_size = 1024;

  void attach(CLI::App* cmd) {
    cmd->add_option("--window-len", window_len, "Analysis window, samples")
        ->capture_default_str();
    cmd->add_option("--hop", hop, "Hop size, samples")->capture_default_str();
    cmd->add_option("--fft-size", fft_size, "FFT size, samples")
        ->capture_default_str();
  }
  StftConfig config(int sample_rate) const {
    StftConfig cfg;
    cfg.window_len = window_len;
    cfg.hop = hop;
    cfg.fft_size = fft_size;
    cfg.sample_rate = sample_rate;
    cfg.validate();
    return cfg;
  }
};

struct WpeFlags {
  int lp_order = 10;
  int delay = 3;
  int context = 1;
  int iterations = 3;
  double diag_load = 1e-6;
  double psd_floor = 1e-10;
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("-K,--lp-order", lp_order, "Prediction order per channel")
        ->capture_default_str();
    cmd->add_option("--delay", delay, "Prediction delay, frames")
        ->capture_default_str();
    cmd->add_option("--context", context, "PSD context, +-frames")
        ->capture_default_str();
    cmd->add_option("--iterations", iterations, "PSD/filter update rounds")
        ->capture_default_str();
    cmd->add_option("--diag-load", diag_load, "Relative diagonal loading")
        ->capture_default_str();
    cmd->add_option("--psd-floor", psd_floor, "Absolute PSD floor")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = auto)")
        ->capture_default_str();
  }
  WpeConfig config() const {
    WpeConfig cfg;
    cfg.lp_order = lp_order;
    cfg.delay = delay;
    cfg.context = context;
    cfg.iterations = iterations;
    cfg.diag_load = diag_load;
    cfg.psd_floor = psd_floor;
    cfg.num_threads = threads;
    cfg.validate();
    return cfg;
  }
};

std::vector<fs::path> list_wavs(const std::string& root) {
  std::vector<fs::path> out;
  const fs::path p(root);
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".wav")
        out.push_back(e.path());
    std::sort(out.begin(), out.end());  // directory order is unspecified
  } else if (fs::is_regular_file(p)) {
    out.push_back(p);
  }
  if (out.empty())
    throw std::runtime_error("no wav files found at " + root);
  return out;
}

Rir rir_from_waveform(const Waveform& w) {
  Rir rir;
  rir.sample_rate = w.sample_rate;
  rir.taps = w.channels;
  for (const auto& taps : rir.taps) {
    double best = 0.0;
    for (double v : taps) best = std::max(best, std::fabs(v));
    long peak = 0;  // direct-path onset, as in the simulator
    for (std::size_t i = 0; i < taps.size(); ++i)
      if (std::fabs(taps[i]) >= 0.3 * best) {
        peak = static_cast<long>(i);
        break;
      }
    rir.main_peak_index.push_back(peak);
    rir.early_len.push_back(std::min<long>(
        static_cast<long>(taps.size()),
        peak + std::lround(0.05 * w.sample_rate) + 1));
  }
  return rir;
}

std::string config_value(const std::string& v) {
  bool plain = !v.empty();
  for (char c : v)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.' || c == '+' || c == '-'))
      plain = false;
  return plain ? v : "\"" + v + "\"";
}

// One [subcommand] section with every option that was set or has a default;
// the file feeds back through --config to reproduce the run.
void write_effective_config(const CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write effective config to " + path);
  out << "[" << sub.get_name() << "]\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0) value += " ";
        value += config_value(results[i]);
      }
    } else {
      value = opt->get_default_str();
      if (value.empty()) continue;  // unset optional
      value = config_value(value);
    }
    out << opt->get_lnames().front() << "=" << value << "\n";
  }
}

std::string default_dump_path(const std::string& primary_output) {
  if (primary_output.empty()) return {};
  const fs::path p(primary_output);
  if (fs::is_directory(p) || p.extension().empty())
    return (p / "effective_config.ini").string();
  return primary_output + ".cfg.ini";
}

// Parses "value" or "name:arg1[:arg2]" specs such as --gen late:x.wav:0.5.
std::vector<std::string> split_spec(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(':', pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

PsdSource make_psd_source(const std::string& psd_spec,
                          const std::string& combine_spec, int context,
                          int num_channels, bool* single_pass) {
  const auto psd = split_spec(psd_spec);
  const auto combine = split_spec(combine_spec);

  PsdSource leaf;
  if (psd[0] == "iterative") {
    leaf = PsdSource::iterative(context);
    *single_pass = false;
  } else if (psd[0] == "file" && psd.size() == 2) {
    // A single-plane file is consumed directly; a multichannel file is
    // reduced per --psd-combine.
    const LpsData probe = load_lps(psd[1]);
    leaf = PsdSource::external_file(psd[1], probe.log_power.d2 != 1);
    *single_pass = true;
    if (probe.log_power.d2 == 1) return leaf;
  } else {
    throw CLI::ValidationError("--psd must be iterative or file:<path>");
  }

  if (combine[0] == "average") return PsdSource::channel_average(leaf);
  if (combine[0] == "ref" && combine.size() == 2) {
    const int ch = std::stoi(combine[1]);
    if (ch < 0 || ch >= num_channels)
      throw CLI::ValidationError("--psd-combine ref channel out of range");
    return PsdSource::ref_channel_of(leaf, ch);
  }
  throw CLI::ValidationError("--psd-combine must be average or ref:<k>");
}

Spectrogram run_wpe_with_source(const Spectrogram& x, const WpeConfig& cfg,
                                const PsdSource& source, bool single_pass) {
  std::vector<int> failed_bins;
  Spectrogram z = x;
  if (single_pass) {
    const PsdEstimate lambda = provide_psd(source, x, cfg.psd_floor);
    WpeResult result = wpe_with_psd(x, lambda, cfg);
    failed_bins = std::move(result.failed_bins);
    z = std::move(result.dereverberated);
  } else {
    const DelayedStack stack =
        build_delayed_stack(x, cfg.delay, cfg.lp_order);
    for (int it = 0; it < cfg.iterations; ++it) {
      const PsdEstimate lambda = provide_psd(source, z, cfg.psd_floor);
      const Correlations corr =
          compute_correlations(stack, x, lambda, cfg.num_threads);
      const LpFilterBank filters = solve_filters(corr, cfg.diag_load,
                                                 cfg.lp_order, &failed_bins,
                                                 cfg.num_threads);
      z = apply_filters(x, stack, filters);
    }
  }
  if (!failed_bins.empty())
    std::cerr << "dereverb: " << failed_bins.size()
              << " frequency bins fell back to zero filters\n";
  return z;
}

VirtualGenerator make_generator(const std::string& spec) {
  const auto parts = split_spec(spec);
  const auto gain_or = [&](std::size_t idx, double fallback) {
    return parts.size() > idx ? std::stod(parts[idx]) : fallback;
  };
  if (parts[0] == "copy" && parts.size() == 2)
    return VirtualGenerator::scaled_copy(std::stod(parts[1]));
  if (parts[0] == "late" && (parts.size() == 2 || parts.size() == 3))
    return VirtualGenerator::late_oracle(read_wav(parts[1]), gain_or(2, 1.0));
  if (parts[0] == "delay" && (parts.size() == 2 || parts.size() == 3))
    return VirtualGenerator::frame_delay(std::stoi(parts[1]), gain_or(2, 1.0));
  if (parts[0] == "file" && parts.size() == 2)
    return VirtualGenerator::external_signal(parts[1]);
  throw CLI::ValidationError(
      "--gen must be copy:<g>, late:<wav>[:g], delay:<frames>[:g] or "
      "file:<wav>");
}

WavEncoding parse_encoding(const std::string& s) {
  if (s == "float32") return WavEncoding::Float32;
  if (s == "pcm16") return WavEncoding::Pcm16;
  throw CLI::ValidationError("--encoding must be float32 or pcm16");
}

std::string csv_row(const std::string& id, const MetricsReport& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f", id.c_str(), m.cd,
                m.llr, m.fwsegsnr, m.segsrr);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit code.

struct SimulateRirArgs {
  std::string out_dir;
  int count = 1;
  std::uint64_t seed = 0;
  std::string size_class = "medium";
  int mics = 1;
  double mic_spacing = 0.2;
  int sample_rate = 16000;
  int order = 10;
  double duration = 0.0;  // 0 = class default
  bool fractional = false;
  std::vector<double> dims, source, mic;
  double absorption = 0.0;  // 0 = sampled
  std::string dump_config;
};

int run_simulate_rir(const SimulateRirArgs& a, const CLI::App& cmd) {
  fs::create_directories(a.out_dir);
  const bool explicit_geometry = !a.dims.empty();
  for (int i = 0; i < a.count; ++i) {
    RoomSpec spec;
    if (explicit_geometry) {
      if (a.dims.size() != 3 || a.source.size() != 3 || a.mic.size() % 3 != 0 ||
          a.mic.empty())
        throw CLI::ValidationError(
            "--dims/--source need 3 values, --mic a multiple of 3");
      spec.dimensions = {a.dims[0], a.dims[1], a.dims[2]};
      spec.source_pos = {a.source[0], a.source[1], a.source[2]};
      spec.mic_positions.clear();
      for (std::size_t m = 0; m < a.mic.size(); m += 3)
        spec.mic_positions.push_back({a.mic[m], a.mic[m + 1], a.mic[m + 2]});
      spec.absorption = a.absorption > 0.0 ? a.absorption : 0.5;
      spec.rir_duration_s = a.duration > 0.0 ? a.duration : 1.0;
      spec.sample_rate = a.sample_rate;
    } else {
      Rng rng(a.seed + static_cast<std::uint64_t>(i));
      const RoomSizeClass cls = a.size_class == "large"
                                    ? RoomSizeClass::Large
                                    : RoomSizeClass::Medium;
      spec = sample_room_spec(cls, a.sample_rate, rng, a.mics, a.mic_spacing);
      if (a.absorption > 0.0) spec.absorption = a.absorption;
      if (a.duration > 0.0) spec.rir_duration_s = a.duration;
    }
    spec.reflection_order = a.order;
    spec.fractional_delay = a.fractional;

    const Rir rir = simulate_rir(spec);
    Waveform w;
    w.sample_rate = rir.sample_rate;
    w.channels = rir.taps;
    char name[64];
    std::snprintf(name, sizeof(name), "rir_%04d.wav", i);
    const fs::path path = fs::path(a.out_dir) / name;
    write_wav(w, path.string(), WavEncoding::Float32);
    std::string t60 = "n/a";  // undefined for decay-free responses
    try {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f s",
                    schroeder_t60(rir.taps[0], rir.sample_rate));
      t60 = buf;
    } catch (const std::exception&) {
    }
    std::printf("%s  peak=%ld  t60=%s\n", path.string().c_str(),
                rir.main_peak_index[0], t60.c_str());
  }
  write_effective_config(cmd, a.dump_config.empty()
                                   ? default_dump_path(a.out_dir)
                                   : a.dump_config);
  return 0;
}

struct MixArgs {
  std::string speech, rir, noise, out_dir;
  int count = 1;
  std::uint64_t seed = 0;
  int snr_lo = 5, snr_hi = 15;
  double crop_lo = 2.0, crop_hi = 4.0;
  bool clean_target = false;
  bool no_drc = false;
  std::string dump_config;
};

int run_mix(const MixArgs& a, const CLI::App& cmd) {
  DatagenConfig cfg;
  for (const auto& p : list_wavs(a.speech)) cfg.speech_pool.push_back(read_wav(p.string()));
  for (const auto& p : list_wavs(a.rir))
    cfg.rir_pool.push_back(rir_from_waveform(read_wav(p.string())));
  if (!a.noise.empty())
    for (const auto& p : list_wavs(a.noise)) cfg.noise_pool.push_back(read_wav(p.string()));
  cfg.snr_lo_db = a.snr_lo;
  cfg.snr_hi_db = a.snr_hi;
  cfg.crop_lo_s = a.crop_lo;
  cfg.crop_hi_s = a.crop_hi;
  cfg.noisy_target = !a.clean_target;
  cfg.apply_drc = !a.no_drc;

  fs::create_directories(a.out_dir);
  std::ofstream index(fs::path(a.out_dir) / "index.csv", std::ios::trunc);
  index << "id,speech_idx,rir_idx,noise_idx,snr_db,seed\n";
  int failures = 0;
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    char id[32];
    std::snprintf(id, sizeof(id), "ex_%04d", i);
    try {
      const MixtureExample ex = generate_example(cfg, seed);
      const auto base = fs::path(a.out_dir) / id;
      write_wav(ex.observed, base.string() + "_observed.wav");
      write_wav(ex.early_ref, base.string() + "_early.wav");
      write_wav(ex.late_ref, base.string() + "_late.wav");
      char row[160];
      std::snprintf(row, sizeof(row), "%s,%d,%d,%d,%.1f,%llu\n", id,
                    ex.speech_index, ex.rir_index, ex.noise_index,
                    ex.has_noise ? ex.snr_db : 0.0,
                    static_cast<unsigned long long>(seed));
      index << row;
    } catch (const std::exception& e) {
      std::cerr << "mix: " << id << ": " << e.what() << "\n";
      ++failures;
    }
  }
  write_effective_config(cmd, a.dump_config.empty()
                                   ? default_dump_path(a.out_dir)
                                   : a.dump_config);
  return failures == 0 ? 0 : 1;
}

struct DereverbArgs {
  std::string input, output;
  WpeFlags wpe;
  StftFlags stft;
  std::string psd = "iterative";
  std::string combine = "average";
  std::string encoding = "float32";
  std::string dump_config;
};

int run_dereverb(const DereverbArgs& a, const CLI::App& cmd) {
  const Waveform in = read_wav(a.input);
  const StftConfig scfg = a.stft.config(in.sample_rate);
  const WpeConfig wcfg = a.wpe.config();
  const Spectrogram x = stft(in, scfg);

  bool single_pass = false;
  const PsdSource source = make_psd_source(a.psd, a.combine, wcfg.context,
                                           x.channels, &single_pass);
  const Spectrogram z = run_wpe_with_source(x, wcfg, source, single_pass);
  const Waveform out = istft(z, static_cast<int>(in.num_samples()));
  const WavWriteResult wr =
      write_wav(out, a.output, parse_encoding(a.encoding));
  if (wr.clipped_samples > 0)
    std::cerr << "dereverb: clipped " << wr.clipped_samples << " samples\n";
  write_effective_config(cmd, a.dump_config.empty()
                                   ? default_dump_path(a.output)
                                   : a.dump_config);
  return 0;
}

struct VaceDereverbArgs {
  std::string input, output, gen;
  std::string psd_mode = "simplified";
  WpeFlags wpe;
  StftFlags stft;
  std::string encoding = "float32";
  std::string dump_config;
};

int run_vace_dereverb(const VaceDereverbArgs& a, const CLI::App& cmd) {
  const Waveform in = read_wav(a.input);
  VaceConfig cfg;
  cfg.wpe = a.wpe.config();
  cfg.stft = a.stft.config(in.sample_rate);
  if (a.psd_mode == "averaged")
    cfg.psd_mode = PsdMode::Averaged;
  else if (a.psd_mode == "simplified")
    cfg.psd_mode = PsdMode::Simplified;
  else
    throw CLI::ValidationError("--psd-mode must be averaged or simplified");

  const Waveform out = vace_wpe(in, make_generator(a.gen), cfg);
  const WavWriteResult wr =
      write_wav(out, a.output, parse_encoding(a.encoding));
  if (wr.clipped_samples > 0)
    std::cerr << "vace-dereverb: clipped " << wr.clipped_samples
              << " samples\n";
  write_effective_config(cmd, a.dump_config.empty()
                                   ? default_dump_path(a.output)
                                   : a.dump_config);
  return 0;
}

struct EvaluateArgs {
  std::string ref, deg, out_csv;
  std::string dump_config;
};

int run_evaluate(const EvaluateArgs& a, const CLI::App& cmd) {
  const auto ref_paths = list_wavs(a.ref);
  const auto deg_paths = list_wavs(a.deg);
  std::map<std::string, fs::path> ref_by_name;
  for (const auto& p : ref_paths) ref_by_name[p.filename().string()] = p;

  std::vector<std::string> rows;
  std::vector<MetricsReport> reports;
  int failures = 0;
  for (const auto& deg_path : deg_paths) {
    const std::string id = deg_path.stem().string();
    try {
      fs::path ref_path;
      if (ref_paths.size() == 1) {
        ref_path = ref_paths.front();
      } else {
        const auto it = ref_by_name.find(deg_path.filename().string());
        if (it == ref_by_name.end())
          throw std::runtime_error("no matching reference file");
        ref_path = it->second;
      }
      const MetricsReport m =
          evaluate_all(read_wav(ref_path.string()), read_wav(deg_path.string()));
      reports.push_back(m);
      rows.push_back(csv_row(id, m));
    } catch (const std::exception& e) {
      std::cerr << "evaluate: " << id << ": " << e.what() << "\n";
      ++failures;
    }
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.out_csv.empty()) {
    file.open(a.out_csv, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + a.out_csv);
    out = &file;
  }
  *out << "utt_id,cd,llr,fwsegsnr,segsrr\n";
  for (const auto& row : rows) *out << row << "\n";
  if (!reports.empty())
    *out << csv_row("mean", mean_report(reports)) << "\n";

  if (!a.out_csv.empty())
    write_effective_config(cmd, a.dump_config.empty()
                                     ? default_dump_path(a.out_csv)
                                     : a.dump_config);
  return failures == 0 ? 0 : 1;
}

struct ExportLpsArgs {
  std::string input, output;
  StftFlags stft;
  std::string dump_config;
};

int run_export_lps(const ExportLpsArgs& a, const CLI::App& cmd) {
  const Waveform in = read_wav(a.input);
  export_lps(stft(in, a.stft.config(in.sample_rate)), a.output);
  write_effective_config(cmd, a.dump_config.empty()
                                   ? default_dump_path(a.output)
                                   : a.dump_config);
  return 0;
}

void add_dump_option(CLI::App* cmd, std::string& target) {
  cmd->add_option("--dump-config", target,
                  "Effective-config dump path (default: next to the output)")
      ->configurable(false);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Offline speech dereverberation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI config file");
  app.allow_config_extras(false);

  SimulateRirArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate-rir", "Simulate room impulse responses");
  sim_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  sim_cmd->add_option("--count", sim.count)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--size-class", sim.size_class, "medium or large")
      ->capture_default_str();
  sim_cmd->add_option("--mics", sim.mics)->capture_default_str();
  sim_cmd->add_option("--mic-spacing", sim.mic_spacing)->capture_default_str();
  sim_cmd->add_option("--sample-rate", sim.sample_rate)->capture_default_str();
  sim_cmd->add_option("--order", sim.order)->capture_default_str();
  sim_cmd->add_option("--duration", sim.duration, "RIR length, seconds")
      ->capture_default_str();
  sim_cmd->add_flag("--fractional", sim.fractional,
                    "Windowed-sinc fractional delays");
  sim_cmd->add_option("--dims", sim.dims, "Explicit room size x,y,z (m)")
      ->delimiter(',');
  sim_cmd->add_option("--source", sim.source, "Explicit source position")
      ->delimiter(',');
  sim_cmd->add_option("--mic", sim.mic, "Explicit mic positions, 3 per mic")
      ->delimiter(',');
  sim_cmd->add_option("--absorption", sim.absorption)->capture_default_str();
  add_dump_option(sim_cmd, sim.dump_config);

  MixArgs mix;
  CLI::App* mix_cmd =
      app.add_subcommand("mix", "Generate reverberant (noisy) examples");
  mix_cmd->add_option("--speech", mix.speech, "Speech wav file or directory")
      ->required();
  mix_cmd->add_option("--rir", mix.rir, "RIR wav file or directory")
      ->required();
  mix_cmd->add_option("--noise", mix.noise, "Noise wav file or directory");
  mix_cmd->add_option("--out", mix.out_dir, "Output directory")->required();
  mix_cmd->add_option("--count", mix.count)->capture_default_str();
  mix_cmd->add_option("--seed", mix.seed)->capture_default_str();
  mix_cmd->add_option("--snr-lo", mix.snr_lo, "SNR draw lower bound, dB")
      ->capture_default_str();
  mix_cmd->add_option("--snr-hi", mix.snr_hi, "SNR draw upper bound, dB")
      ->capture_default_str();
  mix_cmd->add_option("--crop-lo", mix.crop_lo, "Crop lower bound, seconds")
      ->capture_default_str();
  mix_cmd->add_option("--crop-hi", mix.crop_hi, "Crop upper bound, seconds")
      ->capture_default_str();
  mix_cmd->add_flag("--clean-target", mix.clean_target,
                    "Exclude the noise component from the early reference");
  mix_cmd->add_flag("--no-drc", mix.no_drc,
                    "Skip dynamic range control of the speech");
  add_dump_option(mix_cmd, mix.dump_config);

  DereverbArgs drv;
  CLI::App* drv_cmd =
      app.add_subcommand("dereverb", "WPE dereverberation of a wav file");
  drv_cmd->add_option("-i,--input", drv.input)->required();
  drv_cmd->add_option("-o,--output", drv.output)->required();
  drv.wpe.attach(drv_cmd);
  drv.stft.attach(drv_cmd);
  drv_cmd->add_option("--psd", drv.psd, "iterative or file:<path>")
      ->capture_default_str();
  drv_cmd->add_option("--psd-combine", drv.combine, "average or ref:<k>")
      ->capture_default_str();
  drv_cmd->add_option("--encoding", drv.encoding, "float32 or pcm16")
      ->capture_default_str();
  add_dump_option(drv_cmd, drv.dump_config);

  VaceDereverbArgs vace;
  CLI::App* vace_cmd = app.add_subcommand(
      "vace-dereverb", "Dual-channel WPE with a virtual second channel");
  vace_cmd->add_option("-i,--input", vace.input)->required();
  vace_cmd->add_option("-o,--output", vace.output)->required();
  vace_cmd
      ->add_option("--gen", vace.gen,
                   "copy:<g> | late:<wav>[:g] | delay:<frames>[:g] | "
                   "file:<wav>")
      ->required();
  vace_cmd->add_option("--psd-mode", vace.psd_mode, "averaged or simplified")
      ->capture_default_str();
  vace.wpe.attach(vace_cmd);
  vace.stft.attach(vace_cmd);
  vace_cmd->add_option("--encoding", vace.encoding)->capture_default_str();
  add_dump_option(vace_cmd, vace.dump_config);

  EvaluateArgs ev;
  CLI::App* ev_cmd = app.add_subcommand(
      "evaluate", "Objective quality metrics against a reference");
  ev_cmd->add_option("--ref", ev.ref, "Reference wav file or directory")
      ->required();
  ev_cmd->add_option("--deg", ev.deg, "Degraded wav file or directory")
      ->required();
  ev_cmd->add_option("--out", ev.out_csv, "CSV output path (default stdout)");
  add_dump_option(ev_cmd, ev.dump_config);

  ExportLpsArgs lps;
  CLI::App* lps_cmd = app.add_subcommand(
      "export-lps", "Export log-power spectra for external PSD estimators");
  lps_cmd->add_option("-i,--input", lps.input)->required();
  lps_cmd->add_option("-o,--output", lps.output)->required();
  lps.stft.attach(lps_cmd);
  add_dump_option(lps_cmd, lps.dump_config);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim_cmd->parsed()) return run_simulate_rir(sim, *sim_cmd);
    if (mix_cmd->parsed()) return run_mix(mix, *mix_cmd);
    if (drv_cmd->parsed()) return run_dereverb(drv, *drv_cmd);
    if (vace_cmd->parsed()) return run_vace_dereverb(vace, *vace_cmd);
    if (ev_cmd->parsed()) return run_evaluate(ev, *ev_cmd);
    if (lps_cmd->parsed()) return run_export_lps(lps, *lps_cmd);
  } catch (const std::exception& e) {
    std::cerr << "derev: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace derev
