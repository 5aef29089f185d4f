#include "gpsfilt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/kalman.hpp"
#include "gpsfilt/parfir.hpp"
#include "gpsfilt/wiener.hpp"

namespace gpsfilt {

namespace {

std::optional<Index> wiener_mac_per_output(Index m, int parallel) {
  switch (parallel) {
    case 1:
      return m;
    case 2:
      return 2 * ((m + 1) / 2);  // 4*ceil(M/2) MACs per 2 outputs
    case 3:
      return 2 * ((m + 2) / 3);  // 6*ceil(M/3) MACs per 3 outputs
    default:
      return std::nullopt;
  }
}

constexpr std::array<WienerVariant, 5> kVariantOrder = {
    WienerVariant::Original, WienerVariant::Par2, WienerVariant::Par3,
    WienerVariant::ThreeQuarter, WienerVariant::Half};

double published_for_scheme(const SchemeId& id, const PublishedTimings& p) {
  switch (id.kind) {
    case SchemeKind::Kalman:
      return p.kalman_ms;
    case SchemeKind::Mlp:
      return p.neural_ms;
    case SchemeKind::Wiener:
      return p.wiener180_ms;
    default:
      throw ParameterError("report: no published timing for scheme " + id.label());
  }
}

double published_for_variant(WienerVariant v, const PublishedTimings& p) {
  switch (v) {
    case WienerVariant::Original:
      return p.wiener180_ms;
    case WienerVariant::Par2:
      return p.wiener180_par2_ms;
    case WienerVariant::Par3:
      return p.wiener180_par3_ms;
    case WienerVariant::ThreeQuarter:
      return p.wiener135_ms;
    case WienerVariant::Half:
      return p.wiener90_ms;
  }
  throw ParameterError("report: unknown variant");
}

void append(std::string& out, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

void append(std::string& out, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

std::string SchemeId::label() const {
  switch (kind) {
    case SchemeKind::Raw:
      return "raw";
    case SchemeKind::Kalman:
      return "kalman";
    case SchemeKind::Mlp:
      return "mlp";
    case SchemeKind::Wiener: {
      std::string s = "wiener" + std::to_string(static_cast<long long>(wiener_length));
      if (parallel > 1) s += "-par" + std::to_string(parallel);
      return s;
    }
  }
  return "unknown";
}

void SchemeId::validate() const {
  if (parallel != 1 && parallel != 2 && parallel != 3)
    throw ParameterError("scheme: parallel order must be 1, 2 or 3");
  if (kind != SchemeKind::Wiener && parallel != 1)
    throw ParameterError("scheme: parallel execution applies to FIR schemes only");
  if (kind == SchemeKind::Wiener && wiener_length < 1)
    throw ParameterError("scheme: wiener length must be >= 1");
}

double resolve_kalman_r(const SchemeOptions& opt) {
  if (opt.kalman_r) {
    if (!(*opt.kalman_r > 0.0)) throw ParameterError("kalman: R must be positive");
    return *opt.kalman_r;
  }
  if (opt.noise_white_sigma && *opt.noise_white_sigma > 0.0)
    return *opt.noise_white_sigma * *opt.noise_white_sigma;
  return opt.kalman_q;
}

Index transient_skip(Index filter_length, Index n) {
  return std::min<Index>(filter_length - 1, n / 2);
}

SchemeRun run_scheme(const Trajectoryd& traj, const SchemeId& id, const SchemeOptions& opt) {
  traj.validate();
  id.validate();
  const Index n = traj.size();

  SchemeRun out;
  out.scheme = id;
  switch (id.kind) {
    case SchemeKind::Raw:
      out.estimates = traj.measured;
      break;
    case SchemeKind::Kalman: {
      const KalmanModeld model(traj.dt, opt.kalman_q, resolve_kalman_r(opt));
      out.estimates = run(traj, model).first;
      break;
    }
    case SchemeKind::Mlp: {
      auto [estimates, stats] = evaluate_split(traj, opt.mlp);
      out.estimates = std::move(estimates);
      out.first_index = n / 2;
      out.stats_first = out.first_index;
      out.stats = stats;
      return out;
    }
    case SchemeKind::Wiener: {
      const FirFilterd filter = design_from_trajectory(traj, id.wiener_length);
      if (id.parallel == 1) {
        out.estimates = apply(filter, traj.measured);
      } else {
        BlockFirEngined engine(decompose(filter, id.parallel));
        out.estimates =
            id.parallel == 2 ? run2(engine, traj.measured) : run3(engine, traj.measured);
      }
      out.stats_first = opt.skip_transient ? transient_skip(id.wiener_length, n) : 0;
      out.mac_per_output = wiener_mac_per_output(id.wiener_length, id.parallel);
      break;
    }
  }
  const Index count = n - out.stats_first;
  out.stats = error_stats(out.estimates.tail(count), traj.truth.tail(count));
  return out;
}

TimingResult time_scheme(const SchemeId& id, const Trajectoryd& traj, int repetitions,
                         const SchemeOptions& opt) {
  traj.validate();
  id.validate();
  if (repetitions < 5) throw ParameterError("timing: need at least 5 repetitions");

  // The workload closure is the processing phase only; anything the deployed
  // predictor would have done beforehand (MLP training) happens here, untimed.
  std::function<double()> workload;
  MlpParamsd mlp_params;  // kept alive for the MLP closure
  switch (id.kind) {
    case SchemeKind::Raw:
      workload = [&traj] {
        VectorX<double> copy = traj.measured;
        return copy.sum();
      };
      break;
    case SchemeKind::Kalman: {
      const KalmanModeld model(traj.dt, opt.kalman_q, resolve_kalman_r(opt));
      workload = [&traj, model] { return run(traj, model).first.sum(); };
      break;
    }
    case SchemeKind::Mlp: {
      mlp_params = train(split_training_set(traj), opt.mlp);
      workload = [&traj, &mlp_params] {
        const Index n = traj.size();
        double acc = 0.0;
        for (Index k = n / 2; k < n; ++k)
          acc += forward(mlp_params,
                         Eigen::Vector2d(traj.measured[k - 1], traj.measured[k]));
        return acc;
      };
      break;
    }
    case SchemeKind::Wiener:
      workload = [&traj, id] {
        const FirFilterd filter = design_from_trajectory(traj, id.wiener_length);
        if (id.parallel == 1) return apply(filter, traj.measured).sum();
        BlockFirEngined engine(decompose(filter, id.parallel));
        return (id.parallel == 2 ? run2(engine, traj.measured) : run3(engine, traj.measured))
            .sum();
      };
      break;
  }

  volatile double sink = 0.0;
  for (int i = 0; i < 3; ++i) sink = sink + workload();

  std::vector<double> times_ms(static_cast<std::size_t>(repetitions));
  for (auto& t : times_ms) {
    const auto t0 = std::chrono::steady_clock::now();
    sink = sink + workload();
    const auto t1 = std::chrono::steady_clock::now();
    t = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  (void)sink;
  std::sort(times_ms.begin(), times_ms.end());

  const std::size_t mid = times_ms.size() / 2;
  const double median = times_ms.size() % 2 == 1
                            ? times_ms[mid]
                            : 0.5 * (times_ms[mid - 1] + times_ms[mid]);

  TimingResult result;
  result.scheme = id;
  result.processing_ms = std::max(median, 1e-9);
  result.spread_ms = times_ms.back() - times_ms.front();
  result.repetitions = repetitions;
  if (id.kind == SchemeKind::Wiener)
    result.mac_per_output = wiener_mac_per_output(id.wiener_length, id.parallel);
  return result;
}

Index variant_length(WienerVariant variant, Index n) {
  switch (variant) {
    case WienerVariant::Original:
    case WienerVariant::Par2:
    case WienerVariant::Par3:
      return n;
    case WienerVariant::ThreeQuarter:
      return std::max<Index>(1, (3 * n) / 4);
    case WienerVariant::Half:
      return std::max<Index>(1, n / 2);
  }
  throw ParameterError("unknown variant");
}

int variant_parallel(WienerVariant variant) {
  switch (variant) {
    case WienerVariant::Par2:
      return 2;
    case WienerVariant::Par3:
      return 3;
    default:
      return 1;
  }
}

std::string variant_label(WienerVariant variant, Index n) {
  switch (variant) {
    case WienerVariant::Original:
      return "original";
    case WienerVariant::Par2:
      return "par2";
    case WienerVariant::Par3:
      return "par3";
    case WienerVariant::ThreeQuarter:
    case WienerVariant::Half:
      return "L" + std::to_string(static_cast<long long>(variant_length(variant, n)));
  }
  return "unknown";
}

std::string reference_label(ReferenceScheme ref) {
  return ref == ReferenceScheme::Kalman ? "kalman" : "neural";
}

FrequencyRequirement required_frequency(double t_ref_ms, double t_proc_ms, Index n_samples) {
  if (!(t_ref_ms > 0.0) || !(t_proc_ms > 0.0))
    throw ParameterError("frequency: times must be positive");
  if (n_samples < 1) throw ParameterError("frequency: need at least one sample");

  FrequencyRequirement req;
  req.samples_to_accumulate = n_samples;
  if (t_ref_ms <= t_proc_ms) return req;  // processing alone exceeds the budget
  req.feasible = true;
  req.required_hz = static_cast<double>(n_samples) * 1000.0 / (t_ref_ms - t_proc_ms);
  return req;
}

ComparisonReport build_report(const Trajectoryd& traj, const std::vector<SchemeId>& schemes,
                              const ReportOptions& opt) {
  traj.validate();
  if (schemes.empty()) throw ParameterError("report: need at least one scheme");
  const Index n = traj.size();

  ComparisonReport report;
  report.samples = n;
  report.dt = traj.dt;
  report.timing_source = opt.inject_published ? "published" : "measured";

  for (const auto& id : schemes) report.precision.push_back(run_scheme(traj, id, opt.scheme));

  const std::array<SchemeId, 3> trio = {SchemeId::kalman(), SchemeId::mlp(),
                                        SchemeId::wiener(n)};
  for (const auto& id : trio) {
    if (opt.inject_published) {
      TimingResult t;
      t.scheme = id;
      t.processing_ms = published_for_scheme(id, opt.published);
      if (id.kind == SchemeKind::Wiener)
        t.mac_per_output = wiener_mac_per_output(id.wiener_length, id.parallel);
      report.timing.push_back(t);
    } else {
      report.timing.push_back(time_scheme(id, traj, opt.repetitions, opt.scheme));
    }
  }

  for (const auto v : kVariantOrder) {
    const SchemeId id = SchemeId::wiener(variant_length(v, n), variant_parallel(v));
    VariantRow row;
    row.variant = v;
    row.run = run_scheme(traj, id, opt.scheme);
    row.mac_per_output = row.run.mac_per_output;
    row.processing_ms = opt.inject_published
                            ? published_for_variant(v, opt.published)
                            : time_scheme(id, traj, opt.repetitions, opt.scheme).processing_ms;
    report.variants.push_back(row);
  }

  for (int r = 0; r < 2; ++r) {
    const ReferenceScheme ref = r == 0 ? ReferenceScheme::Kalman : ReferenceScheme::Neural;
    const double t_ref = report.timing[static_cast<std::size_t>(r == 0 ? 0 : 1)].processing_ms;
    for (std::size_t vi = 0; vi < kVariantOrder.size(); ++vi) {
      const WienerVariant v = kVariantOrder[vi];
      FrequencyRequirement req =
          required_frequency(t_ref, report.variants[vi].processing_ms, variant_length(v, n));
      req.reference = ref;
      req.variant = v;
      report.frequency[static_cast<std::size_t>(r)].push_back(req);
    }
  }
  return report;
}

std::string report_to_json(const ComparisonReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["trajectory"] = {{"samples", report.samples}, {"dt", report.dt}};
  j["timing_source"] = report.timing_source;

  j["precision"] = json::array();
  for (const auto& run : report.precision) {
    j["precision"].push_back({{"scheme", run.scheme.label()},
                              {"mean_abs", run.stats.mean_abs},
                              {"variance", run.stats.variance},
                              {"count", run.stats.count},
                              {"window_start", run.stats_first}});
  }

  j["timing"] = json::array();
  for (const auto& t : report.timing) {
    json row = {{"scheme", t.scheme.label()},
                {"processing_ms", t.processing_ms},
                {"spread_ms", t.spread_ms},
                {"repetitions", t.repetitions}};
    row["mac_per_output"] = t.mac_per_output ? json(*t.mac_per_output) : json(nullptr);
    j["timing"].push_back(std::move(row));
  }

  j["wiener_variants"] = json::array();
  for (const auto& row : report.variants) {
    json v = {{"variant", variant_label(row.variant, report.samples)},
              {"length", row.run.scheme.wiener_length},
              {"parallel", row.run.scheme.parallel},
              {"mean_abs", row.run.stats.mean_abs},
              {"variance", row.run.stats.variance},
              {"count", row.run.stats.count},
              {"processing_ms", row.processing_ms}};
    v["mac_per_output"] = row.mac_per_output ? json(*row.mac_per_output) : json(nullptr);
    j["wiener_variants"].push_back(std::move(v));
  }

  json rows = json::array();
  for (const auto& freq_row : report.frequency) {
    json cells = json::array();
    for (const auto& cell : freq_row) {
      json c = {{"variant", variant_label(cell.variant, report.samples)},
                {"samples", cell.samples_to_accumulate},
                {"feasible", cell.feasible}};
      c["required_khz"] = cell.feasible ? json(cell.required_hz / 1000.0) : json(nullptr);
      cells.push_back(std::move(c));
    }
    rows.push_back({{"reference", reference_label(freq_row.empty()
                                                      ? ReferenceScheme::Kalman
                                                      : freq_row.front().reference)},
                    {"cells", std::move(cells)}});
  }
  j["sampling_frequency"] = {{"unit", "kHz"}, {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

std::string report_to_text(const ComparisonReport& report) {
  std::string out;
  append(out, "Trajectory: %lld samples, dt %.4f s\n",
         static_cast<long long>(report.samples), report.dt);
  append(out, "Timing source: %s\n\n", report.timing_source.c_str());

  append(out, "== Precision ==\n");
  append(out, "%-16s %14s %14s %9s %10s\n", "scheme", "mean_abs[m]", "variance[m2]", "samples",
         "win_start");
  for (const auto& run : report.precision) {
    append(out, "%-16s %14.4f %14.4f %9lld %10lld\n", run.scheme.label().c_str(),
           run.stats.mean_abs, run.stats.variance, static_cast<long long>(run.stats.count),
           static_cast<long long>(run.stats_first));
  }

  append(out, "\n== Processing time ==\n");
  append(out, "%-16s %12s %12s %6s %9s\n", "scheme", "median[ms]", "spread[ms]", "reps",
         "MAC/out");
  for (const auto& t : report.timing) {
    append(out, "%-16s %12.4f %12.4f %6d ", t.scheme.label().c_str(), t.processing_ms,
           t.spread_ms, t.repetitions);
    if (t.mac_per_output)
      append(out, "%9lld\n", static_cast<long long>(*t.mac_per_output));
    else
      append(out, "%9s\n", "-");
  }

  append(out, "\n== Wiener variants ==\n");
  append(out, "%-10s %7s %4s %14s %14s %11s %9s\n", "variant", "length", "par", "mean_abs[m]",
         "variance[m2]", "time[ms]", "MAC/out");
  for (const auto& row : report.variants) {
    append(out, "%-10s %7lld %4d %14.4f %14.4f %11.4f %9lld\n",
           variant_label(row.variant, report.samples).c_str(),
           static_cast<long long>(row.run.scheme.wiener_length), row.run.scheme.parallel,
           row.run.stats.mean_abs, row.run.stats.variance, row.processing_ms,
           static_cast<long long>(row.mac_per_output.value_or(0)));
  }

  append(out, "\n== Required sampling frequency (kHz) ==\n");
  append(out, "%-10s", "reference");
  for (const auto& cell : report.frequency[0])
    append(out, " %12s", variant_label(cell.variant, report.samples).c_str());
  append(out, "\n");
  for (const auto& freq_row : report.frequency) {
    if (freq_row.empty()) continue;
    append(out, "%-10s", reference_label(freq_row.front().reference).c_str());
    for (const auto& cell : freq_row) {
      if (cell.feasible)
        append(out, " %12.2f", cell.required_hz / 1000.0);
      else
        append(out, " %12s", "Impossible");
    }
    append(out, "\n");
  }
  return out;
}

}  // namespace gpsfilt
