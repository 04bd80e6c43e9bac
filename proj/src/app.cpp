#include "overiva/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "overiva/error.hpp"
#include "overiva/exec.hpp"
#include "overiva/pipeline.hpp"
#include "overiva/simulate.hpp"
#include "overiva/wav.hpp"

namespace overiva {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Relative cost increase tolerated by --verify-monotone.
constexpr double kMonotoneTolerance = 1e-8;

struct SeparateOptions {
  std::string input;
  std::size_t sources = 1;
  std::string method = "ip1";
  std::optional<std::size_t> iters;
  std::size_t frame_len = 4096;
  std::size_t hop_div = 4;
  double eps1 = kDefaultVarianceFloor;
  double eps2 = kDefaultRidge;
  std::string out_dir;
  std::string json_path;
  std::string threads;
  bool verify_monotone = false;
  bool no_timing = false;
};

struct MixOptions {
  SceneSpec spec;
  std::string out_dir;
  std::vector<std::string> speech;
};

struct BenchOptions {
  std::string grid;
  std::size_t trials = 10;
  std::vector<std::string> methods{"auxiva", "ip1", "ip2", "ip3"};
  std::string out = "table.csv";
  double duration_s = 10.0;
  double rt60_ms = 300.0;
  std::uint64_t seed = 0;
  std::string threads;
  bool no_timing = false;
};

struct GridCell {
  std::size_t k = 1, l = 0, m = 2;
  double sinr = 0.0;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::io_failure:
    case Errc::unsupported_format:
    case Errc::corrupt_file:
      return kExitIo;
    case Errc::singular_matrix:
    case Errc::not_positive_definite:
    case Errc::not_hermitian:
    case Errc::no_convergence:
    case Errc::degenerate_block:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

Exec resolve_exec(const std::string& flag) {
  if (flag.empty()) return Exec{threads_from_env()};
  const auto n = parse_threads(flag);
  if (!n) throw Error(Errc::invalid_argument, "--threads expects a positive integer or 'auto'");
  return Exec{*n};
}

Method resolve_method(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw Error(Errc::invalid_argument, "unknown method '" + name + "'");
  return *m;
}

StftConfig make_stft(std::size_t frame_len, std::size_t hop_div) {
  if (hop_div == 0 || frame_len % hop_div != 0) {
    throw Error(Errc::invalid_argument, "--hop-div must divide --frame-len");
  }
  StftConfig cfg;
  cfg.frame_len = frame_len;
  cfg.hop = frame_len / hop_div;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_failure, "write failed for " + path.string());
}

bool nonincreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] - trace[i - 1] > kMonotoneTolerance * std::abs(trace[i - 1])) return false;
  }
  return true;
}

int cmd_separate(const SeparateOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.method = resolve_method(o.method);
  cfg.iterations = o.iters.value_or(default_iterations(cfg.method));
  cfg.eps1 = o.eps1;
  cfg.eps2 = o.eps2;
  cfg.exec = resolve_exec(o.threads);
  if (o.verify_monotone) cfg.wz_update = WzUpdate::full;
  cfg.validate();
  const StftConfig stft_cfg = make_stft(o.frame_len, o.hop_div);
  if (cfg.method == Method::ip2 && o.sources != 1) {
    throw Error(Errc::invalid_k, "ip2 requires K=1");
  }

  const AudioBuffer mixture = read_wav(o.input);
  const AudioSeparation sep = separate_audio(mixture, o.sources, cfg, stft_cfg);

  if (!o.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec) throw Error(Errc::io_failure, "cannot create " + o.out_dir);
    for (std::size_t k = 0; k < sep.images.size(); ++k) {
      write_wav(fs::path(o.out_dir) / ("source_" + std::to_string(k + 1) + ".wav"),
                sep.images[k], WavFormat::float32);
    }
  }

  const bool monotone = nonincreasing(sep.result.cost_trace);
  if (!o.json_path.empty()) {
    json report;
    report["method"] = std::string(to_string(cfg.method));
    report["iters"] = cfg.iterations;
    report["cost_trace"] = sep.result.cost_trace;
    if (o.no_timing) {
      report["rtf"] = nullptr;
    } else {
      report["rtf"] = rtf(sep.result.wall_time, mixture.duration());
    }
    json config;
    config["sources"] = o.sources;
    config["channels"] = mixture.channels;
    config["sample_rate"] = mixture.sample_rate;
    config["frame_len"] = stft_cfg.frame_len;
    config["hop"] = stft_cfg.hop;
    config["eps1"] = cfg.eps1;
    config["eps2"] = cfg.eps2;
    config["wz_update"] = cfg.wz_update == WzUpdate::full ? "full" : "fast";
    config["threads"] = cfg.exec.threads;
    report["config"] = config;
    report["columns"] = sep.result.columns;
    if (o.verify_monotone) report["monotone"] = monotone;
    write_text(o.json_path, report.dump(2) + "\n");
  }

  out << "separated " << sep.images.size() << " source(s) with " << to_string(cfg.method)
      << " in " << sep.result.iterations_run << " iteration(s)\n";
  if (o.verify_monotone && !monotone) {
    err << "warning: cost trace increased by more than " << kMonotoneTolerance
        << " (relative)\n";
  }
  return kExitOk;
}

std::vector<double> load_speech(const std::string& path, double rate) {
  const AudioBuffer buf = read_wav(path);
  if (buf.sample_rate != rate) {
    throw Error(Errc::invalid_spec, path + ": sample rate differs from the scene rate");
  }
  const auto ch = buf.channel(0);
  return {ch.begin(), ch.end()};
}

int cmd_make_mix(const MixOptions& o, std::ostream& out) {
  o.spec.validate();
  std::vector<std::vector<double>> sources;
  for (const auto& p : o.speech) sources.push_back(load_speech(p, o.spec.sample_rate));
  const Scene scene = synthesize(o.spec, sources);
  save_scene(scene, o.out_dir);
  const double sinr = measured_sinr_db(scene);
  out << "wrote " << o.out_dir << " (K=" << o.spec.speakers << ", L=" << o.spec.noises
      << ", M=" << o.spec.mics << ", SINR ";
  if (std::isinf(sinr)) {
    out << "inf";
  } else {
    out << sinr;
  }
  out << " dB)\n";
  return kExitOk;
}

std::vector<GridCell> load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot read " + path);
  std::vector<GridCell> cells;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw Error(Errc::invalid_argument, "grid must be a JSON array");
    for (const auto& c : j) {
      GridCell cell;
      cell.k = c.at("K").get<std::size_t>();
      cell.l = c.at("L").get<std::size_t>();
      cell.m = c.at("M").get<std::size_t>();
      cell.sinr = c.at("sinr").get<double>();
      cells.push_back(cell);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, "grid: " + std::string(e.what()));
  }
  return cells;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  if (o.trials < 1) throw Error(Errc::invalid_argument, "--trials must be >= 1");
  const Exec exec = resolve_exec(o.threads);
  std::vector<Method> methods;
  for (const auto& name : o.methods) methods.push_back(resolve_method(name));
  const auto cells = load_grid(o.grid);

  std::string csv = "K,L,M,sinr,method,mean_sdr,mean_rtf,trials\n";
  for (const auto& cell : cells) {
    std::vector<Method> active;
    for (Method m : methods) {
      if (m == Method::ip2 && cell.k != 1) continue;
      active.push_back(m);
    }
    std::vector<double> sdr_sum(active.size(), 0.0), rtf_sum(active.size(), 0.0);
    double mix_sum = 0.0;
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
      SceneSpec spec;
      spec.speakers = cell.k;
      spec.noises = cell.l;
      spec.mics = cell.m;
      spec.sinr_db = cell.sinr;
      spec.rt60_ms = o.rt60_ms;
      spec.duration_s = o.duration_s;
      spec.seed = o.seed + trial;
      const Scene scene = synthesize(spec);
      mix_sum += mixture_sdr(scene);
      for (std::size_t i = 0; i < active.size(); ++i) {
        RunConfig cfg;
        cfg.method = active[i];
        cfg.iterations = default_iterations(active[i]);
        cfg.exec = exec;
        cfg.record_cost = false;
        const TrialScore s = score_method(scene, cfg);
        sdr_sum[i] += s.sdr;
        rtf_sum[i] += s.rtf;
      }
    }
    const double n = static_cast<double>(o.trials);
    const std::string prefix = std::to_string(cell.k) + "," + std::to_string(cell.l) + "," +
                               std::to_string(cell.m) + "," + fmt(cell.sinr) + ",";
    csv += prefix + "mixture," + fmt(mix_sum / n) + "," + fmt(0.0) + "," +
           std::to_string(o.trials) + "\n";
    for (std::size_t i = 0; i < active.size(); ++i) {
      csv += prefix + std::string(to_string(active[i])) + "," + fmt(sdr_sum[i] / n) + "," +
             (o.no_timing ? std::string() : fmt(rtf_sum[i] / n)) + "," +
             std::to_string(o.trials) + "\n";
    }
  }
  write_text(o.out, csv);
  out << "wrote " << o.out << " (" << cells.size() << " cell(s))\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Overdetermined independent vector analysis"};
  app.require_subcommand(1);

  SeparateOptions sep;
  auto* s = app.add_subcommand("separate", "Separate K target sources from an M-channel WAV");
  s->add_option("--input", sep.input, "M-channel input WAV")->required();
  s->add_option("--sources", sep.sources, "Number of target sources K");
  s->add_option("--method", sep.method, "auxiva | ip1 | ip2 | ip3");
  s->add_option("--iters", sep.iters, "Iterations (default 50, 3 for ip2)");
  s->add_option("--frame-len", sep.frame_len, "STFT frame length");
  s->add_option("--hop-div", sep.hop_div, "Hop = frame length / hop-div");
  s->add_option("--eps1", sep.eps1, "Variance floor");
  s->add_option("--eps2", sep.eps2, "Covariance ridge");
  s->add_option("--out", sep.out_dir, "Directory for source_<k>.wav");
  s->add_option("--json", sep.json_path, "JSON report path");
  s->add_option("--threads", sep.threads, "Threads: N or auto (env OVERIVA_THREADS)");
  s->add_flag("--verify-monotone", sep.verify_monotone,
              "Use the full W_z update and check the cost trace");
  s->add_flag("--no-timing", sep.no_timing, "Omit timing from the report");

  MixOptions mix;
  auto* m = app.add_subcommand("make-mix", "Synthesize a convolutive scene");
  m->add_option("--speakers", mix.spec.speakers, "Target sources K");
  m->add_option("--noises", mix.spec.noises, "White noise sources L");
  m->add_option("--mics", mix.spec.mics, "Microphones M");
  m->add_option("--sinr", mix.spec.sinr_db, "SINR in dB");
  m->add_option("--rt60", mix.spec.rt60_ms, "Reverberation time in ms");
  m->add_option("--seed", mix.spec.seed, "Random seed");
  m->add_option("--dur", mix.spec.duration_s, "Duration in seconds");
  m->add_option("--out", mix.out_dir, "Output directory")->required();
  m->add_option("--speech", mix.speech, "Speech WAVs replacing the built-in sources");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Run the method comparison over a grid of scenes");
  b->add_option("--grid", bench.grid, "JSON list of {K, L, M, sinr}")->required();
  b->add_option("--trials", bench.trials, "Scenes per cell");
  b->add_option("--methods", bench.methods, "Methods to compare")->delimiter(',');
  b->add_option("--out", bench.out, "Output CSV");
  b->add_option("--dur", bench.duration_s, "Scene duration in seconds");
  b->add_option("--rt60", bench.rt60_ms, "Reverberation time in ms");
  b->add_option("--seed", bench.seed, "Base seed; trial i uses seed + i");
  b->add_option("--threads", bench.threads, "Threads: N or auto (env OVERIVA_THREADS)");
  b->add_flag("--no-timing", bench.no_timing, "Leave the RTF column empty");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_separate(sep, out, err);
    if (*m) return cmd_make_mix(mix, out);
    return cmd_bench(bench, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace overiva
