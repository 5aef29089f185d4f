#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/trajectory.hpp"
#include "gpsfilt/types.hpp"

namespace gpsfilt {

/// Constant-velocity measurement model for one position axis.
///
///   x = [position, velocity]',  A = [[1, dt], [0, 1]],  H = [1, 0]
///
/// Process noise enters the prediction as Q*I2 (scalar q on both states);
/// R is the scalar measurement-noise variance.
template <typename Scalar = double>
struct KalmanModel {
  Eigen::Matrix<Scalar, 2, 2> A;
  Eigen::Matrix<Scalar, 1, 2> H;
  Scalar q;
  Scalar r;
  Scalar dt;

  KalmanModel(Scalar dt_, Scalar q_, Scalar r_) : q(q_), r(r_), dt(dt_) {
    if (!(dt > Scalar(0))) throw ParameterError("kalman: dt must be positive");
    if (!(q > Scalar(0))) throw ParameterError("kalman: Q must be positive");
    if (!(r > Scalar(0))) throw ParameterError("kalman: R must be positive");
    A << Scalar(1), dt, Scalar(0), Scalar(1);
    H << Scalar(1), Scalar(0);
  }
};

using KalmanModeld = KalmanModel<double>;

/// Filter state after the most recent predict/update.
template <typename Scalar = double>
struct KalmanState {
  Eigen::Matrix<Scalar, 2, 1> x_hat = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Eigen::Matrix<Scalar, 2, 2> P = Eigen::Matrix<Scalar, 2, 2>::Zero();
  Eigen::Matrix<Scalar, 2, 1> gain = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Index step{0};
};

using KalmanStated = KalmanState<double>;

/// Initialise from the first two measurements: position is their mean,
/// velocity their finite difference; P starts at Q*I2.
template <typename Scalar>
KalmanState<Scalar> init(Scalar z1, Scalar z2, const KalmanModel<Scalar>& model) {
  if (!std::isfinite(static_cast<double>(z1)) || !std::isfinite(static_cast<double>(z2)))
    throw ParameterError("kalman: non-finite measurement");
  KalmanState<Scalar> state;
  state.x_hat << (z1 + z2) / Scalar(2), (z2 - z1) / model.dt;
  state.P = model.q * Eigen::Matrix<Scalar, 2, 2>::Identity();
  state.step = 2;
  return state;
}

/// Time update: x^- = A x, P^- = A P A' + Q*I2 (re-symmetrised).
template <typename Scalar>
KalmanState<Scalar> predict(KalmanState<Scalar> state, const KalmanModel<Scalar>& model) {
  state.x_hat = model.A * state.x_hat;
  Eigen::Matrix<Scalar, 2, 2> p =
      model.A * state.P * model.A.transpose() +
      model.q * Eigen::Matrix<Scalar, 2, 2>::Identity();
  state.P = (p + p.transpose()) / Scalar(2);
  return state;
}

/// Measurement update: K = P^- H' / (H P^- H' + R), then the standard
/// posterior mean and covariance P = (I - K H) P^- (re-symmetrised).
template <typename Scalar>
KalmanState<Scalar> update(KalmanState<Scalar> state, Scalar z,
                           const KalmanModel<Scalar>& model) {
  const Scalar innovation_var = (model.H * state.P * model.H.transpose())(0, 0) + model.r;
  if (!(innovation_var > Scalar(0)))
    throw DegeneracyError("kalman: non-positive innovation covariance");

  state.gain = state.P * model.H.transpose() / innovation_var;
  state.x_hat += state.gain * (z - (model.H * state.x_hat)(0, 0));
  Eigen::Matrix<Scalar, 2, 2> p =
      (Eigen::Matrix<Scalar, 2, 2>::Identity() - state.gain * model.H) * state.P;
  state.P = (p + p.transpose()) / Scalar(2);
  state.step += 1;
  return state;
}

/// Full pass over a trajectory: init from the first two measurements, then
/// predict/update per sample. estimates[0..1] hold the init position.
template <typename Scalar>
std::pair<VectorX<Scalar>, KalmanState<Scalar>> run(const Trajectory<Scalar>& traj,
                                                    const KalmanModel<Scalar>& model) {
  traj.validate();
  const Index n = traj.size();
  VectorX<Scalar> estimates(n);

  KalmanState<Scalar> state = init(traj.measured[0], traj.measured[1], model);
  estimates[0] = state.x_hat[0];
  estimates[1] = state.x_hat[0];
  for (Index k = 2; k < n; ++k) {
    state = update(predict(std::move(state), model), traj.measured[k], model);
    estimates[k] = state.x_hat[0];
  }
  return {std::move(estimates), std::move(state)};
}

}  // namespace gpsfilt
