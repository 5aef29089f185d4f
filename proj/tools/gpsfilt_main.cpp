// Command-line front end: trajectory synthesis and ingestion, scheme
// execution with serial or block-parallel FIR paths, wall-clock benchmarks,
// combined precision/timing/frequency reports, and the sampling-frequency
// calculator.
//
// Exit codes: 0 success, 1 usage error, 2 runtime/numerical error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpsfilt/config.hpp"
#include "gpsfilt/errors.hpp"
#include "gpsfilt/harness.hpp"
#include "gpsfilt/trajectory.hpp"
#include "gpsfilt/trajectory_io.hpp"

namespace {

using namespace gpsfilt;

// Flag inconsistencies detected after parsing; mapped to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrajectoryFlags {
  long long n{180};
  double dt{0.05};
  std::string motion{"cv"};
  double p0{10.0};
  double velocity{0.5};
  double sigma{14.0};
  double ar{0.3};
  double bias{2.0};
  long long seed{7};

  CLI::Option* n_opt{};
  CLI::Option* dt_opt{};
  CLI::Option* motion_opt{};
  CLI::Option* p0_opt{};
  CLI::Option* velocity_opt{};
  CLI::Option* sigma_opt{};
  CLI::Option* ar_opt{};
  CLI::Option* bias_opt{};
  CLI::Option* seed_opt{};
};

struct SchemeFlags {
  double q{900.0};
  double r{0.0};
  long long epochs{500};
  double lr{0.01};
  long long mlp_seed{7};
  bool no_skip_transient{false};

  CLI::Option* q_opt{};
  CLI::Option* r_opt{};
  CLI::Option* epochs_opt{};
  CLI::Option* lr_opt{};
  CLI::Option* mlp_seed_opt{};
  CLI::Option* no_skip_opt{};
};

void add_trajectory_flags(CLI::App* cmd, TrajectoryFlags& f, bool full) {
  f.seed_opt = cmd->add_option("--seed", f.seed, "Noise RNG seed");
  if (!full) return;
  f.n_opt = cmd->add_option("--n", f.n, "Sample count")->check(CLI::PositiveNumber);
  f.dt_opt = cmd->add_option("--dt", f.dt, "Sample period in seconds")->check(CLI::PositiveNumber);
  f.motion_opt = cmd->add_option("--motion", f.motion, "Truth motion: static or cv")
                     ->check(CLI::IsMember({"static", "cv", "constant-velocity"}));
  f.p0_opt = cmd->add_option("--p0", f.p0, "Initial position in meters");
  f.velocity_opt = cmd->add_option("--velocity", f.velocity, "Velocity in m/s (cv motion)");
  f.sigma_opt = cmd->add_option("--sigma", f.sigma, "White-noise std dev in meters");
  f.ar_opt = cmd->add_option("--ar", f.ar, "AR(1) coefficient in [0,1)");
  f.bias_opt = cmd->add_option("--bias", f.bias, "Constant measurement offset in meters");
}

void add_scheme_flags(CLI::App* cmd, SchemeFlags& f) {
  f.q_opt = cmd->add_option("--q", f.q, "Kalman process-noise scalar Q");
  f.r_opt = cmd->add_option("--r", f.r, "Kalman measurement variance R (default: auto)");
  f.epochs_opt = cmd->add_option("--epochs", f.epochs, "MLP training epochs");
  f.lr_opt = cmd->add_option("--lr", f.lr, "MLP learning rate");
  f.mlp_seed_opt = cmd->add_option("--mlp-seed", f.mlp_seed, "MLP weight-init seed");
  f.no_skip_opt = cmd->add_flag("--no-skip-transient", f.no_skip_transient,
                                "Include FIR startup transient in error stats");
}

bool given(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

double pick(const CLI::Option* opt, double cli, const KeyValueConfig& cfg,
            const std::string& key, double builtin) {
  return given(opt) ? cli : cfg.get_double(key, builtin);
}

long long pick(const CLI::Option* opt, long long cli, const KeyValueConfig& cfg,
               const std::string& key, long long builtin) {
  return given(opt) ? cli : cfg.get_int(key, builtin);
}

std::string pick(const CLI::Option* opt, const std::string& cli, const KeyValueConfig& cfg,
                 const std::string& key, const std::string& builtin) {
  return given(opt) ? cli : cfg.get_string(key, builtin);
}

NoiseSpecd resolve_noise(const TrajectoryFlags& f, const KeyValueConfig& cfg) {
  NoiseSpecd noise;
  noise.white_sigma = pick(f.sigma_opt, f.sigma, cfg, "noise.white_sigma", 14.0);
  noise.ar_coeff = pick(f.ar_opt, f.ar, cfg, "noise.ar_coeff", 0.3);
  noise.bias = pick(f.bias_opt, f.bias, cfg, "noise.bias", 2.0);
  noise.seed = static_cast<std::uint64_t>(pick(f.seed_opt, f.seed, cfg, "noise.seed", 7LL));
  return noise;
}

Trajectoryd synthesize(const TrajectoryFlags& f, const KeyValueConfig& cfg) {
  const long long n = pick(f.n_opt, f.n, cfg, "trajectory.n", 180LL);
  const double dt = pick(f.dt_opt, f.dt, cfg, "trajectory.dt", 0.05);
  const std::string kind = pick(f.motion_opt, f.motion, cfg, "motion.kind", "cv");

  Motiond motion;
  if (kind == "static") {
    motion = Motiond::at_rest(pick(f.p0_opt, f.p0, cfg, "motion.position0", 10.0));
  } else if (kind == "cv" || kind == "constant-velocity") {
    motion = Motiond::constant_velocity(pick(f.p0_opt, f.p0, cfg, "motion.position0", 10.0),
                                        pick(f.velocity_opt, f.velocity, cfg, "motion.velocity", 0.5));
  } else {
    throw UsageError("unknown motion kind '" + kind + "' (use static or cv)");
  }
  return generate<double>(n, dt, motion, resolve_noise(f, cfg));
}

// Load --in when given; otherwise synthesize the default seeded trajectory.
// Reports back the generating white_sigma when it is known in-process.
Trajectoryd load_or_synthesize(const std::string& in_path, const TrajectoryFlags& f,
                               const KeyValueConfig& cfg, std::optional<double>* known_sigma) {
  if (!in_path.empty()) {
    if (known_sigma && cfg.has("noise.white_sigma"))
      *known_sigma = cfg.get_double("noise.white_sigma", 0.0);
    return load_csv(in_path);
  }
  const NoiseSpecd noise = resolve_noise(f, cfg);
  if (known_sigma) *known_sigma = noise.white_sigma;
  return synthesize(f, cfg);
}

SchemeOptions resolve_scheme_options(const SchemeFlags& f, const KeyValueConfig& cfg,
                                     const std::optional<double>& known_sigma) {
  SchemeOptions opt;
  opt.kalman_q = pick(f.q_opt, f.q, cfg, "kalman.q", 900.0);
  if (given(f.r_opt))
    opt.kalman_r = f.r;
  else if (cfg.has("kalman.r"))
    opt.kalman_r = cfg.get_double("kalman.r", 0.0);
  opt.noise_white_sigma = known_sigma;
  opt.skip_transient =
      given(f.no_skip_opt) ? !f.no_skip_transient : cfg.get_bool("wiener.skip_transient", true);
  opt.mlp.epochs = static_cast<int>(pick(f.epochs_opt, f.epochs, cfg, "mlp.epochs", 500LL));
  opt.mlp.learning_rate = pick(f.lr_opt, f.lr, cfg, "mlp.lr", 0.01);
  opt.mlp.seed = static_cast<std::uint64_t>(pick(f.mlp_seed_opt, f.mlp_seed, cfg, "mlp.seed", 7LL));
  return opt;
}

KeyValueConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return KeyValueConfig::from_file(path);
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failure on '" + out_path + "'");
}

std::string format_run_output(const SchemeRun& run) {
  std::string text = "k,estimate\n";
  char row[64];
  for (Index i = 0; i < run.estimates.size(); ++i) {
    std::snprintf(row, sizeof(row), "%lld,%.17g\n",
                  static_cast<long long>(run.first_index + i), run.estimates[i]);
    text += row;
  }
  char footer[256];
  std::snprintf(footer, sizeof(footer),
                "# scheme=%s\n# mean_abs=%.17g variance=%.17g count=%lld window_start=%lld\n",
                run.scheme.label().c_str(), run.stats.mean_abs, run.stats.variance,
                static_cast<long long>(run.stats.count),
                static_cast<long long>(run.stats_first));
  return text + footer;
}

std::string timing_text(const std::vector<TimingResult>& rows, const std::string& title) {
  std::string out = "== " + title + " ==\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %12s %12s %6s %9s\n", "scheme", "median[ms]",
                "spread[ms]", "reps", "MAC/out");
  out += buf;
  for (const auto& t : rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %12.4f %12.4f %6d ", t.scheme.label().c_str(),
                  t.processing_ms, t.spread_ms, t.repetitions);
    out += buf;
    if (t.mac_per_output)
      std::snprintf(buf, sizeof(buf), "%9lld\n", static_cast<long long>(*t.mac_per_output));
    else
      std::snprintf(buf, sizeof(buf), "%9s\n", "-");
    out += buf;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "GPS position denoising toolkit: synthetic trajectories, Kalman/Wiener/MLP "
      "schemes, block-parallel FIR execution, and timing/frequency reports"};
  app.require_subcommand(1);

  // --- generate ---
  auto* gen = app.add_subcommand("generate", "Synthesize a seeded noisy trajectory CSV");
  TrajectoryFlags gen_traj;
  add_trajectory_flags(gen, gen_traj, true);
  std::string gen_out, gen_config;
  gen->add_option("--out", gen_out, "Output CSV path (default: stdout)");
  gen->add_option("--config", gen_config, "key=value config file");

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Run one scheme and emit estimates + error stats");
  std::string run_in, run_scheme_name, run_out, run_errors_out, run_config;
  long long run_length = 180;
  int run_parallel = 1;
  TrajectoryFlags run_traj;
  SchemeFlags run_scheme_flags;
  run_cmd->add_option("--in", run_in, "Input trajectory CSV (default: synthesize)");
  run_cmd->add_option("--scheme", run_scheme_name, "raw|kalman|wiener|mlp")
      ->required()
      ->check(CLI::IsMember({"raw", "kalman", "wiener", "mlp"}));
  auto* run_length_opt =
      run_cmd->add_option("--length", run_length, "Wiener filter length")->check(CLI::PositiveNumber);
  auto* run_parallel_opt = run_cmd->add_option("--parallel", run_parallel,
                                               "FIR execution: 1 serial, 2 or 3 block-parallel")
                               ->check(CLI::IsMember({1, 2, 3}));
  run_cmd->add_option("--out", run_out, "Estimate CSV path (default: stdout)");
  run_cmd->add_option("--errors-out", run_errors_out, "Per-sample |error| CSV path");
  run_cmd->add_option("--config", run_config, "key=value config file");
  add_trajectory_flags(run_cmd, run_traj, false);
  add_scheme_flags(run_cmd, run_scheme_flags);

  // --- bench ---
  auto* bench = app.add_subcommand("bench", "Measure scheme processing times");
  std::string bench_in, bench_out, bench_config, bench_format = "table";
  long long bench_reps = 50;
  TrajectoryFlags bench_traj;
  SchemeFlags bench_scheme_flags;
  bench->add_option("--in", bench_in, "Input trajectory CSV (default: synthesize)");
  auto* bench_reps_opt =
      bench->add_option("--reps", bench_reps, "Timing repetitions (>= 5)")->check(CLI::Range(5, 100000));
  bench->add_option("--format", bench_format, "table|json")->check(CLI::IsMember({"table", "json"}));
  bench->add_option("--out", bench_out, "Output path (default: stdout)");
  bench->add_option("--config", bench_config, "key=value config file");
  add_trajectory_flags(bench, bench_traj, false);
  add_scheme_flags(bench, bench_scheme_flags);

  // --- report ---
  auto* rep = app.add_subcommand("report", "Full precision/timing/frequency comparison");
  std::string rep_in, rep_out, rep_config, rep_format = "table";
  long long rep_reps = 50;
  bool rep_inject = false;
  TrajectoryFlags rep_traj;
  SchemeFlags rep_scheme_flags;
  rep->add_option("--in", rep_in, "Input trajectory CSV (default: synthesize)");
  auto* rep_reps_opt =
      rep->add_option("--reps", rep_reps, "Timing repetitions (>= 5)")->check(CLI::Range(5, 100000));
  rep->add_flag("--inject-paper-times", rep_inject,
                "Use the published reference timings instead of measuring");
  rep->add_option("--format", rep_format, "table|json")->check(CLI::IsMember({"table", "json"}));
  rep->add_option("--out", rep_out, "Output path (default: stdout)");
  rep->add_option("--config", rep_config, "key=value config file");
  add_trajectory_flags(rep, rep_traj, false);
  add_scheme_flags(rep, rep_scheme_flags);

  // --- freq ---
  auto* freq = app.add_subcommand("freq", "Required sampling frequency for a time budget");
  double freq_t_ref = 0.0, freq_t_proc = 0.0;
  long long freq_n = 0;
  bool freq_json = false;
  freq->add_option("--t-ref", freq_t_ref, "Reference scheme total time (ms)")
      ->required()
      ->check(CLI::PositiveNumber);
  freq->add_option("--t-proc", freq_t_proc, "Variant processing time (ms)")
      ->required()
      ->check(CLI::PositiveNumber);
  freq->add_option("--n", freq_n, "Samples to accumulate")->required()->check(CLI::PositiveNumber);
  freq->add_flag("--json", freq_json, "Emit JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the diagnostic to stderr
    return 1;
  }

  try {
    if (gen->parsed()) {
      const KeyValueConfig cfg = load_config(gen_config);
      const Trajectoryd traj = synthesize(gen_traj, cfg);
      if (gen_out.empty())
        save_csv(traj, std::cout);
      else
        save_csv(traj, gen_out);
      return 0;
    }

    if (run_cmd->parsed()) {
      if (run_scheme_name != "wiener" && given(run_parallel_opt) && run_parallel != 1)
        throw UsageError("--parallel applies to the wiener scheme only");
      if (run_scheme_name != "wiener" && given(run_length_opt))
        throw UsageError("--length applies to the wiener scheme only");

      const KeyValueConfig cfg = load_config(run_config);
      std::optional<double> known_sigma;
      const Trajectoryd traj = load_or_synthesize(run_in, run_traj, cfg, &known_sigma);
      const SchemeOptions opt = resolve_scheme_options(run_scheme_flags, cfg, known_sigma);

      SchemeId id;
      if (run_scheme_name == "raw")
        id = SchemeId::raw();
      else if (run_scheme_name == "kalman")
        id = SchemeId::kalman();
      else if (run_scheme_name == "mlp")
        id = SchemeId::mlp();
      else
        id = SchemeId::wiener(
            pick(run_length_opt, run_length, cfg, "wiener.length", 180LL), run_parallel);

      const SchemeRun result = run_scheme(traj, id, opt);
      write_output(format_run_output(result), run_out);
      if (!run_errors_out.empty()) {
        const VectorX<double> truth_window =
            traj.truth.segment(result.first_index, result.estimates.size());
        write_error_series(result.estimates, truth_window, result.first_index, run_errors_out);
      }
      return 0;
    }

    if (bench->parsed()) {
      const KeyValueConfig cfg = load_config(bench_config);
      std::optional<double> known_sigma;
      const Trajectoryd traj = load_or_synthesize(bench_in, bench_traj, cfg, &known_sigma);
      const SchemeOptions opt = resolve_scheme_options(bench_scheme_flags, cfg, known_sigma);
      const int reps =
          static_cast<int>(pick(bench_reps_opt, bench_reps, cfg, "bench.repetitions", 50LL));

      const Index n = traj.size();
      std::vector<TimingResult> trio;
      for (const SchemeId& id :
           {SchemeId::kalman(), SchemeId::mlp(), SchemeId::wiener(n)})
        trio.push_back(time_scheme(id, traj, reps, opt));

      std::vector<TimingResult> variants;
      for (const WienerVariant v :
           {WienerVariant::Original, WienerVariant::Par2, WienerVariant::Par3,
            WienerVariant::ThreeQuarter, WienerVariant::Half})
        variants.push_back(time_scheme(
            SchemeId::wiener(variant_length(v, n), variant_parallel(v)), traj, reps, opt));

      std::string text;
      if (bench_format == "json") {
        text = "{\n  \"timing\": [\n";
        auto emit = [](const TimingResult& t) {
          char buf[256];
          std::snprintf(buf, sizeof(buf),
                        "    {\"scheme\": \"%s\", \"processing_ms\": %.6f, \"spread_ms\": %.6f, "
                        "\"repetitions\": %d, \"mac_per_output\": %lld}",
                        t.scheme.label().c_str(), t.processing_ms, t.spread_ms, t.repetitions,
                        static_cast<long long>(t.mac_per_output.value_or(0)));
          return std::string(buf);
        };
        for (std::size_t i = 0; i < trio.size(); ++i)
          text += emit(trio[i]) + (i + 1 < trio.size() ? ",\n" : "\n");
        text += "  ],\n  \"variants\": [\n";
        for (std::size_t i = 0; i < variants.size(); ++i)
          text += emit(variants[i]) + (i + 1 < variants.size() ? ",\n" : "\n");
        text += "  ]\n}\n";
      } else {
        text = timing_text(trio, "Processing time") + "\n" +
               timing_text(variants, "Wiener variants");
      }
      write_output(text, bench_out);
      return 0;
    }

    if (rep->parsed()) {
      const KeyValueConfig cfg = load_config(rep_config);
      std::optional<double> known_sigma;
      const Trajectoryd traj = load_or_synthesize(rep_in, rep_traj, cfg, &known_sigma);

      ReportOptions opt;
      opt.scheme = resolve_scheme_options(rep_scheme_flags, cfg, known_sigma);
      opt.repetitions =
          static_cast<int>(pick(rep_reps_opt, rep_reps, cfg, "bench.repetitions", 50LL));
      opt.inject_published = rep_inject;

      const std::vector<SchemeId> schemes = {SchemeId::raw(), SchemeId::kalman(),
                                             SchemeId::mlp(), SchemeId::wiener(traj.size())};
      const ComparisonReport report = build_report(traj, schemes, opt);
      write_output(rep_format == "json" ? report_to_json(report) : report_to_text(report),
                   rep_out);
      return 0;
    }

    if (freq->parsed()) {
      const FrequencyRequirement req = required_frequency(freq_t_ref, freq_t_proc, freq_n);
      char buf[160];
      if (freq_json) {
        if (req.feasible)
          std::snprintf(buf, sizeof(buf),
                        "{\"feasible\": true, \"required_hz\": %.6f, \"required_khz\": %.6f, "
                        "\"samples\": %lld}\n",
                        req.required_hz, req.required_hz / 1000.0,
                        static_cast<long long>(req.samples_to_accumulate));
        else
          std::snprintf(buf, sizeof(buf), "{\"feasible\": false, \"samples\": %lld}\n",
                        static_cast<long long>(req.samples_to_accumulate));
      } else if (req.feasible) {
        std::snprintf(buf, sizeof(buf), "%.2f kHz\n", req.required_hz / 1000.0);
      } else {
        std::snprintf(buf, sizeof(buf), "Impossible\n");
      }
      std::cout << buf;
      return 0;
    }

    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
