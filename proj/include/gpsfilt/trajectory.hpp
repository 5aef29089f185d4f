#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Core>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/types.hpp"

namespace gpsfilt {

/// One axis of a position track: noise-free truth plus the measured
/// (receiver-output) series, sampled uniformly at `dt` seconds.
template <typename Scalar = double>
struct Trajectory {
  VectorX<Scalar> truth;
  VectorX<Scalar> measured;
  Scalar dt{Scalar(0.05)};
  std::string axis_label{"z"};

  Index size() const { return truth.size(); }

  void validate() const {
    if (truth.size() != measured.size())
      throw ParameterError("trajectory: truth/measured length mismatch");
    if (truth.size() < 2) throw ParameterError("trajectory: need at least 2 samples");
    if (!(dt > Scalar(0))) throw ParameterError("trajectory: dt must be positive");
    if (!truth.allFinite() || !measured.allFinite())
      throw ParameterError("trajectory: non-finite sample");
  }
};

using Trajectoryd = Trajectory<double>;

/// Measurement-noise model: first-order autoregressive coloured noise on top
/// of white Gaussian draws, plus a constant offset.
///   e[k] = ar_coeff * e[k-1] + w[k],  w ~ N(0, white_sigma^2)
///   measured[k] = truth[k] + bias + e[k]
template <typename Scalar = double>
struct NoiseSpec {
  Scalar white_sigma{Scalar(14.0)};
  Scalar ar_coeff{Scalar(0.3)};
  Scalar bias{Scalar(2.0)};
  std::uint64_t seed{7};

  void validate() const {
    if (!(white_sigma >= Scalar(0))) throw ParameterError("noise: white_sigma must be >= 0");
    if (!(std::abs(ar_coeff) < Scalar(1))) throw ParameterError("noise: |ar_coeff| must be < 1");
    if (!std::isfinite(static_cast<double>(bias))) throw ParameterError("noise: bias must be finite");
  }
};

using NoiseSpecd = NoiseSpec<double>;

enum class MotionKind { Static, ConstantVelocity };

/// Truth motion profile along the axis.
template <typename Scalar = double>
struct Motion {
  MotionKind kind{MotionKind::ConstantVelocity};
  Scalar position0{Scalar(10.0)};
  Scalar velocity{Scalar(0.5)};  // ignored for Static

  static Motion at_rest(Scalar p0) { return {MotionKind::Static, p0, Scalar(0)}; }
  static Motion constant_velocity(Scalar p0, Scalar v) {
    return {MotionKind::ConstantVelocity, p0, v};
  }

  void validate() const {
    if (!std::isfinite(static_cast<double>(position0)) ||
        !std::isfinite(static_cast<double>(velocity)))
      throw ParameterError("motion: parameters must be finite");
  }
};

using Motiond = Motion<double>;

/// Summary of an estimate-vs-truth comparison window.
template <typename Scalar = double>
struct ErrorStats {
  Scalar mean_abs{};   // mean of |estimate - truth|
  Scalar variance{};   // population variance of the absolute-error series
  Index count{};       // samples in the window
};

using ErrorStatsd = ErrorStats<double>;

/// Synthesise a trajectory of `n` samples. Deterministic for a fixed
/// NoiseSpec::seed. A zero white_sigma yields measured = truth + bias exactly
/// (no RNG draws at all).
template <typename Scalar = double>
Trajectory<Scalar> generate(Index n, Scalar dt, const Motion<Scalar>& motion = {},
                            const NoiseSpec<Scalar>& noise = {}) {
  if (n < 2) throw ParameterError("generate: need n >= 2");
  if (!(dt > Scalar(0))) throw ParameterError("generate: dt must be positive");
  motion.validate();
  noise.validate();

  Trajectory<Scalar> traj;
  traj.dt = dt;
  traj.truth.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Scalar t = Scalar(k) * dt;
    traj.truth[k] = motion.kind == MotionKind::Static
                        ? motion.position0
                        : motion.position0 + motion.velocity * t;
  }

  traj.measured = traj.truth.array() + noise.bias;
  if (noise.white_sigma > Scalar(0)) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<Scalar> white(Scalar(0), noise.white_sigma);
    Scalar e = Scalar(0);
    for (Index k = 0; k < n; ++k) {
      e = noise.ar_coeff * e + white(rng);
      traj.measured[k] += e;
    }
  }
  return traj;
}

/// Mean and population variance of the absolute-error series |estimate - truth|.
template <typename DerivedA, typename DerivedB>
ErrorStats<typename DerivedA::Scalar> error_stats(const Eigen::MatrixBase<DerivedA>& estimate,
                                                  const Eigen::MatrixBase<DerivedB>& truth) {
  using Scalar = typename DerivedA::Scalar;
  if (estimate.size() != truth.size())
    throw ParameterError("error_stats: length mismatch");
  if (estimate.size() == 0) throw ParameterError("error_stats: empty window");

  const VectorX<Scalar> abs_err = (estimate.derived() - truth.derived()).cwiseAbs();
  ErrorStats<Scalar> stats;
  stats.count = abs_err.size();
  stats.mean_abs = abs_err.mean();
  stats.variance = (abs_err.array() - stats.mean_abs).square().mean();
  return stats;
}

}  // namespace gpsfilt
