#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gpsfilt/mlp.hpp"
#include "gpsfilt/trajectory.hpp"
#include "gpsfilt/types.hpp"

namespace gpsfilt {

// ---------------------------------------------------------------------------
// Scheme identity and execution
// ---------------------------------------------------------------------------

enum class SchemeKind { Raw, Kalman, Mlp, Wiener };

/// One denoising scheme configuration. `parallel` selects serial (1) or
/// block-parallel (2/3) execution and is meaningful for Wiener only.
struct SchemeId {
  SchemeKind kind{SchemeKind::Raw};
  Index wiener_length{180};
  int parallel{1};

  static SchemeId raw() { return {SchemeKind::Raw, 0, 1}; }
  static SchemeId kalman() { return {SchemeKind::Kalman, 0, 1}; }
  static SchemeId mlp() { return {SchemeKind::Mlp, 0, 1}; }
  static SchemeId wiener(Index length, int parallel = 1) {
    return {SchemeKind::Wiener, length, parallel};
  }

  std::string label() const;  // "raw", "kalman", "mlp", "wiener180", "wiener180-par3", ...
  void validate() const;
};

/// Tuning knobs shared by run_scheme, time_scheme and build_report.
struct SchemeOptions {
  double kalman_q{900.0};
  std::optional<double> kalman_r{};            // unset -> auto (see resolve_kalman_r)
  std::optional<double> noise_white_sigma{};   // generating noise level when known
  bool skip_transient{true};
  TrainConfigd mlp{};
};

/// Measurement-noise variance for the Kalman update: explicit R when given,
/// else white_sigma^2 when the generating noise level is known (and nonzero),
/// else Q.
double resolve_kalman_r(const SchemeOptions& opt);

/// Error-statistics window for an M-tap filter output: the first M-1 samples
/// are startup transient, but never skip past the midpoint so short series
/// (and the flagship M = N case) keep a meaningful comparison window.
Index transient_skip(Index filter_length, Index n);

/// Result of executing one scheme over a trajectory.
struct SchemeRun {
  SchemeId scheme{};
  VectorX<double> estimates;           // estimates[i] targets sample first_index + i
  Index first_index{0};
  Index stats_first{0};                // start of the stats window
  ErrorStatsd stats{};
  std::optional<Index> mac_per_output{};
};

SchemeRun run_scheme(const Trajectoryd& traj, const SchemeId& id,
                     const SchemeOptions& opt = {});

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingResult {
  SchemeId scheme{};
  double processing_ms{0.0};  // median over repetitions
  double spread_ms{0.0};      // max - min over repetitions
  int repetitions{0};
  std::optional<Index> mac_per_output{};
};

/// Median wall time of the scheme's processing phase (Wiener: design +
/// apply, plus decompose/engine for parallel variants; Kalman: full run;
/// MLP: second-half forward pass with training done beforehand, untimed).
/// Three warm-up runs are discarded.
TimingResult time_scheme(const SchemeId& id, const Trajectoryd& traj, int repetitions,
                         const SchemeOptions& opt = {});

// ---------------------------------------------------------------------------
// Sampling-frequency requirement
// ---------------------------------------------------------------------------

enum class ReferenceScheme { Kalman, Neural };

/// The five filtering configurations compared against each reference:
/// full-length serial, 2-/3-parallel, and the two reduced lengths
/// (3/4 and 1/2 of the trajectory; 135 and 90 at the canonical N = 180).
enum class WienerVariant { Original, Par2, Par3, ThreeQuarter, Half };

Index variant_length(WienerVariant variant, Index n);
int variant_parallel(WienerVariant variant);
std::string variant_label(WienerVariant variant, Index n);  // "original", "par2", "par3", "L135", "L90"
std::string reference_label(ReferenceScheme ref);

/// Sampling rate at which a reduced/parallel filter variant finishes within
/// the reference scheme's total time budget, or infeasible when processing
/// alone already exceeds it.
struct FrequencyRequirement {
  ReferenceScheme reference{ReferenceScheme::Kalman};
  WienerVariant variant{WienerVariant::Original};
  Index samples_to_accumulate{0};
  bool feasible{false};
  double required_hz{0.0};
};

/// Solve t_ref = t_proc + n_samples / f for f (times in ms, result in Hz).
/// t_ref <= t_proc makes the requirement infeasible.
FrequencyRequirement required_frequency(double t_ref_ms, double t_proc_ms, Index n_samples);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Published reference processing times (ms) for the canonical N=180 setup;
/// injected in place of live measurements for reproducible frequency tables.
struct PublishedTimings {
  double kalman_ms{20.3281};
  double neural_ms{16.9648};
  double wiener180_ms{25.2656};
  double wiener180_par2_ms{20.234};
  double wiener180_par3_ms{15.1483};
  double wiener135_ms{15.5938};
  double wiener90_ms{9.688};
};

struct ReportOptions {
  SchemeOptions scheme{};
  int repetitions{50};
  bool inject_published{false};   // use PublishedTimings instead of measuring
  PublishedTimings published{};
};

struct VariantRow {
  WienerVariant variant{WienerVariant::Original};
  SchemeRun run{};
  double processing_ms{0.0};
  std::optional<Index> mac_per_output{};
};

/// Everything the text/JSON reports render: per-scheme precision, per-scheme
/// timing, the five-variant comparison, and the two-reference frequency
/// matrix.
struct ComparisonReport {
  Index samples{0};
  double dt{0.0};
  std::string timing_source;                     // "measured" | "published"
  std::vector<SchemeRun> precision;
  std::vector<TimingResult> timing;
  std::vector<VariantRow> variants;
  std::array<std::vector<FrequencyRequirement>, 2> frequency;  // kalman row, neural row
};

/// Assemble the full comparison. `schemes` selects the precision rows; the
/// timing trio (kalman, mlp, full-length wiener), the five-variant table and
/// the frequency matrix always have their canonical shape.
ComparisonReport build_report(const Trajectoryd& traj, const std::vector<SchemeId>& schemes,
                              const ReportOptions& opt = {});

std::string report_to_json(const ComparisonReport& report);
std::string report_to_text(const ComparisonReport& report);

}  // namespace gpsfilt
