#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>

#include <Eigen/Core>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/trajectory.hpp"
#include "gpsfilt/types.hpp"

namespace gpsfilt {

/// Affine input/target scaling. Defaults are the identity, so an
/// un-normalized network is the special case mean 0 / scale 1.
template <typename Scalar = double>
struct Normalization {
  Eigen::Matrix<Scalar, 2, 1> input_mean = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Eigen::Matrix<Scalar, 2, 1> input_scale = Eigen::Matrix<Scalar, 2, 1>::Ones();
  Scalar target_mean{0};
  Scalar target_scale{1};
};

using Normalizationd = Normalization<double>;

/// 2-3-1 perceptron: tanh hidden layer, linear output, plus the affine
/// scaling the network was trained under (forward de-normalizes).
template <typename Scalar = double>
struct MlpParams {
  Eigen::Matrix<Scalar, 3, 2> w_hidden = Eigen::Matrix<Scalar, 3, 2>::Zero();
  Eigen::Matrix<Scalar, 3, 1> b_hidden = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Eigen::Matrix<Scalar, 1, 3> w_out = Eigen::Matrix<Scalar, 1, 3>::Zero();
  Scalar b_out{0};
  Normalization<Scalar> norm{};
  Scalar final_mse{std::numeric_limits<Scalar>::quiet_NaN()};  // set by train

  void validate() const {
    if (!w_hidden.allFinite() || !b_hidden.allFinite() || !w_out.allFinite() ||
        !std::isfinite(static_cast<double>(b_out)))
      throw ParameterError("mlp: non-finite parameter");
  }
};

using MlpParamsd = MlpParams<double>;

/// Gradient of the half-squared error w.r.t. every weight and bias.
template <typename Scalar = double>
struct MlpGradient {
  Eigen::Matrix<Scalar, 3, 2> w_hidden = Eigen::Matrix<Scalar, 3, 2>::Zero();
  Eigen::Matrix<Scalar, 3, 1> b_hidden = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Eigen::Matrix<Scalar, 1, 3> w_out = Eigen::Matrix<Scalar, 1, 3>::Zero();
  Scalar b_out{0};
};

using MlpGradientd = MlpGradient<double>;

template <typename Scalar = double>
struct TrainConfig {
  int epochs{500};
  Scalar learning_rate{Scalar(0.01)};
  std::uint64_t seed{7};
  // When set, training uses these scalings verbatim; otherwise they are
  // estimated from the training data (zero spread maps to scale 1).
  std::optional<Normalization<Scalar>> normalization{};

  void validate() const {
    if (epochs < 1) throw ParameterError("mlp train: epochs must be >= 1");
    if (!(learning_rate > Scalar(0))) throw ParameterError("mlp train: learning rate must be > 0");
  }
};

using TrainConfigd = TrainConfig<double>;

/// (input pair, target) rows; inputs and targets in raw (physical) units.
template <typename Scalar = double>
struct TrainingSet {
  MatrixX<Scalar> inputs;     // one row per sample, 2 columns
  VectorX<Scalar> targets;

  Index size() const { return targets.size(); }

  void validate() const {
    if (inputs.rows() != targets.size() || inputs.cols() != 2)
      throw ParameterError("mlp dataset: need Nx2 inputs matching N targets");
    if (targets.size() < 1) throw ParameterError("mlp dataset: empty");
    if (!inputs.allFinite() || !targets.allFinite())
      throw ParameterError("mlp dataset: non-finite value");
  }
};

using TrainingSetd = TrainingSet<double>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> normalize_input(const MlpParams<Scalar>& p,
                                            const Eigen::Matrix<Scalar, 2, 1>& input) {
  return (input - p.norm.input_mean).cwiseQuotient(p.norm.input_scale);
}

// Network output in normalized target space for a normalized input.
template <typename Scalar>
Scalar forward_normalized(const MlpParams<Scalar>& p, const Eigen::Matrix<Scalar, 2, 1>& z,
                          Eigen::Matrix<Scalar, 3, 1>* hidden_out = nullptr) {
  const Eigen::Matrix<Scalar, 3, 1> hidden = (p.w_hidden * z + p.b_hidden).array().tanh();
  if (hidden_out) *hidden_out = hidden;
  return (p.w_out * hidden)(0, 0) + p.b_out;
}

// One SGD step on pre-normalized (z, t_n); returns false on non-finite loss.
template <typename Scalar>
bool step_normalized(MlpParams<Scalar>& p, const Eigen::Matrix<Scalar, 2, 1>& z, Scalar t_n,
                     Scalar lr) {
  Eigen::Matrix<Scalar, 3, 1> hidden;
  const Scalar y_n = forward_normalized(p, z, &hidden);
  const Scalar residual = y_n - t_n;
  if (!std::isfinite(static_cast<double>(residual))) return false;

  const Scalar delta_out = residual;
  const Eigen::Matrix<Scalar, 3, 1> delta_hidden =
      (p.w_out.transpose() * delta_out).cwiseProduct(
          (Eigen::Matrix<Scalar, 3, 1>::Ones() - hidden.cwiseProduct(hidden)));

  p.w_out -= lr * delta_out * hidden.transpose();
  p.b_out -= lr * delta_out;
  p.w_hidden -= lr * delta_hidden * z.transpose();
  p.b_hidden -= lr * delta_hidden;
  return true;
}

}  // namespace detail

/// Network output in physical units for a raw input pair.
template <typename Scalar>
Scalar forward(const MlpParams<Scalar>& params, const Eigen::Matrix<Scalar, 2, 1>& input) {
  if (!input.allFinite()) throw ParameterError("mlp forward: non-finite input");
  const Scalar y_n = detail::forward_normalized(params, detail::normalize_input(params, input));
  return y_n * params.norm.target_scale + params.norm.target_mean;
}

/// Exact gradient of L = 1/2 (forward(input) - target)^2.
template <typename Scalar>
MlpGradient<Scalar> grad(const MlpParams<Scalar>& params,
                         const Eigen::Matrix<Scalar, 2, 1>& input, Scalar target) {
  if (!input.allFinite() || !std::isfinite(static_cast<double>(target)))
    throw ParameterError("mlp grad: non-finite input");

  const Eigen::Matrix<Scalar, 2, 1> z = detail::normalize_input(params, input);
  Eigen::Matrix<Scalar, 3, 1> hidden;
  const Scalar y_n = detail::forward_normalized(params, z, &hidden);
  const Scalar y = y_n * params.norm.target_scale + params.norm.target_mean;

  // dL/dy_n = (y - target) * target_scale; then the usual backprop chain.
  const Scalar delta_out = (y - target) * params.norm.target_scale;
  const Eigen::Matrix<Scalar, 3, 1> delta_hidden =
      (params.w_out.transpose() * delta_out).cwiseProduct(
          (Eigen::Matrix<Scalar, 3, 1>::Ones() - hidden.cwiseProduct(hidden)));

  MlpGradient<Scalar> g;
  g.w_out = delta_out * hidden.transpose();
  g.b_out = delta_out;
  g.w_hidden = delta_hidden * z.transpose();
  g.b_hidden = delta_hidden;
  return g;
}

/// One per-sample SGD step in normalized space (the exact step train() uses).
/// The normalized-space gradient is the physical-space gradient scaled by
/// 1/target_scale^2, so the default learning rate works at any data scale.
template <typename Scalar>
void sgd_step(MlpParams<Scalar>& params, const Eigen::Matrix<Scalar, 2, 1>& input, Scalar target,
              Scalar lr) {
  if (!(lr > Scalar(0))) throw ParameterError("mlp step: learning rate must be > 0");
  const Eigen::Matrix<Scalar, 2, 1> z = detail::normalize_input(params, input);
  const Scalar t_n = (target - params.norm.target_mean) / params.norm.target_scale;
  if (!detail::step_normalized(params, z, t_n, lr))
    throw DivergenceError("mlp step: non-finite loss");
}

/// Per-sample stochastic gradient descent over the dataset in row order,
/// `epochs` passes, weights initialised uniform in [-0.5, 0.5] from the
/// seeded generator. Deterministic for fixed (seed, data, config).
template <typename Scalar>
MlpParams<Scalar> train(const TrainingSet<Scalar>& dataset, const TrainConfig<Scalar>& config) {
  dataset.validate();
  config.validate();
  const Index n = dataset.size();

  MlpParams<Scalar> params;
  if (config.normalization) {
    params.norm = *config.normalization;
  } else {
    constexpr Scalar kMinSpread = Scalar(1e-12);
    for (Index c = 0; c < 2; ++c) {
      const Scalar mean = dataset.inputs.col(c).mean();
      const Scalar sd = std::sqrt((dataset.inputs.col(c).array() - mean).square().mean());
      params.norm.input_mean[c] = mean;
      params.norm.input_scale[c] = sd > kMinSpread ? sd : Scalar(1);
    }
    const Scalar t_mean = dataset.targets.mean();
    const Scalar t_sd = std::sqrt((dataset.targets.array() - t_mean).square().mean());
    params.norm.target_mean = t_mean;
    params.norm.target_scale = t_sd > kMinSpread ? t_sd : Scalar(1);
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<Scalar> init(Scalar(-0.5), Scalar(0.5));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) params.w_hidden(i, j) = init(rng);
  for (Index i = 0; i < 3; ++i) params.b_hidden[i] = init(rng);
  for (Index i = 0; i < 3; ++i) params.w_out(0, i) = init(rng);
  params.b_out = init(rng);

  MatrixX<Scalar> z(n, 2);
  for (Index c = 0; c < 2; ++c)
    z.col(c) = (dataset.inputs.col(c).array() - params.norm.input_mean[c]) /
               params.norm.input_scale[c];
  const VectorX<Scalar> t_n =
      (dataset.targets.array() - params.norm.target_mean) / params.norm.target_scale;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Index k = 0; k < n; ++k) {
      if (!detail::step_normalized(params, Eigen::Matrix<Scalar, 2, 1>(z.row(k).transpose()),
                                   t_n[k], config.learning_rate))
        throw DivergenceError("mlp train: non-finite loss", epoch);
    }
  }

  Scalar sse = Scalar(0);
  for (Index k = 0; k < n; ++k) {
    const Scalar y = forward(params, Eigen::Matrix<Scalar, 2, 1>(dataset.inputs.row(k).transpose()));
    sse += (y - dataset.targets[k]) * (y - dataset.targets[k]);
  }
  params.final_mse = sse / Scalar(n);
  params.validate();
  return params;
}

/// First-half training rows for the split protocol: inputs are the causal
/// pair (measured[k-1], measured[k]), the target is truth[k], for k in
/// [1, floor(N/2)).
template <typename Scalar>
TrainingSet<Scalar> split_training_set(const Trajectory<Scalar>& traj) {
  traj.validate();
  const Index n = traj.size();
  if (n < 4) throw ParameterError("mlp split: need at least 4 samples");
  const Index half = n / 2;

  TrainingSet<Scalar> set;
  set.inputs.resize(half - 1, 2);
  set.targets.resize(half - 1);
  for (Index k = 1; k < half; ++k) {
    set.inputs(k - 1, 0) = traj.measured[k - 1];
    set.inputs(k - 1, 1) = traj.measured[k];
    set.targets[k - 1] = traj.truth[k];
  }
  return set;
}

/// Train on the first half of the trajectory, predict the second half.
/// Returns the second-half estimates and their stats vs second-half truth.
template <typename Scalar>
std::pair<VectorX<Scalar>, ErrorStats<Scalar>> evaluate_split(const Trajectory<Scalar>& traj,
                                                              const TrainConfig<Scalar>& config) {
  const Index n = traj.size();
  const Index half = n / 2;
  const MlpParams<Scalar> params = train(split_training_set(traj), config);

  VectorX<Scalar> estimates(n - half);
  for (Index k = half; k < n; ++k) {
    const Eigen::Matrix<Scalar, 2, 1> input(traj.measured[k - 1], traj.measured[k]);
    estimates[k - half] = forward(params, input);
  }
  const ErrorStats<Scalar> stats = error_stats(estimates, traj.truth.tail(n - half));
  return {std::move(estimates), stats};
}

}  // namespace gpsfilt
