#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/mlp.hpp"
#include "gpsfilt/trajectory.hpp"
#include "oracles.hpp"

using namespace gpsfilt;

namespace {

MlpParamsd random_params(std::mt19937_64& rng, double span = 0.5) {
  std::uniform_real_distribution<double> u(-span, span);
  MlpParamsd p;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) p.w_hidden(i, j) = u(rng);
  for (Index i = 0; i < 3; ++i) p.b_hidden[i] = u(rng);
  for (Index i = 0; i < 3; ++i) p.w_out(0, i) = u(rng);
  p.b_out = u(rng);
  return p;
}

double grad_inf_norm(const MlpGradientd& g) {
  double m = std::abs(g.b_out);
  m = std::max(m, g.w_hidden.cwiseAbs().maxCoeff());
  m = std::max(m, g.b_hidden.cwiseAbs().maxCoeff());
  m = std::max(m, g.w_out.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("forward: zero network emits the de-normalized zero") {
  MlpParamsd p;
  CHECK(forward(p, Eigen::Vector2d(1.0, -2.0)) == 0.0);

  p.norm.target_mean = 7.5;
  p.norm.target_scale = 2.0;
  CHECK(forward(p, Eigen::Vector2d(1.0, -2.0)) == doctest::Approx(7.5));
}

TEST_CASE("forward: output bias is the only active path") {
  MlpParamsd p;
  p.b_out = 1.25;
  CHECK(forward(p, Eigen::Vector2d(3.0, 4.0)) == doctest::Approx(1.25));
}

TEST_CASE("forward: single active path reduces to tanh") {
  MlpParamsd p;
  p.w_hidden(0, 0) = 1.0;
  p.w_out(0, 0) = 1.0;
  for (const double x : {-2.0, -0.5, 0.0, 0.7, 1.9})
    CHECK(forward(p, Eigen::Vector2d(x, 0.0)) == doctest::Approx(std::tanh(x)).epsilon(1e-12));
}

TEST_CASE("grad: zero residual means zero gradient") {
  MlpParamsd p;  // zero network, identity normalization -> forward == 0
  const auto g = grad(p, Eigen::Vector2d(0.3, -0.8), 0.0);
  CHECK(grad_inf_norm(g) == 0.0);
}

TEST_CASE("grad: no signal path through zero inputs and zero hidden biases") {
  std::mt19937_64 rng(1);
  MlpParamsd p = random_params(rng);
  p.b_hidden.setZero();
  const auto g = grad(p, Eigen::Vector2d(0.0, 0.0), 0.4);
  CHECK(g.w_hidden.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grad: matches central finite differences on 50 random draws") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const MlpParamsd p = random_params(rng, 0.8);
    const Eigen::Vector2d input(u(rng), u(rng));
    const double target = u(rng);

    const auto a = grad(p, input, target);
    const auto fd = oracle::finite_diff_grad(p, input, target);

    auto close = [](double analytic, double numeric) {
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      return std::abs(analytic - numeric) / denom < 1e-4;
    };
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j) CHECK(close(a.w_hidden(i, j), fd.w_hidden(i, j)));
    for (Index i = 0; i < 3; ++i) CHECK(close(a.b_hidden[i], fd.b_hidden[i]));
    for (Index i = 0; i < 3; ++i) CHECK(close(a.w_out(0, i), fd.w_out(0, i)));
    CHECK(close(a.b_out, fd.b_out));
  }
}

TEST_CASE("grad: respects normalization scaling") {
  std::mt19937_64 rng(3);
  MlpParamsd p = random_params(rng);
  p.norm.input_mean << 10.0, 12.0;
  p.norm.input_scale << 3.0, 4.0;
  p.norm.target_mean = 11.0;
  p.norm.target_scale = 5.0;

  const Eigen::Vector2d input(12.5, 9.0);
  const double target = 13.0;
  const auto a = grad(p, input, target);
  const auto fd = oracle::finite_diff_grad(p, input, target);
  const double denom = std::max(grad_inf_norm(fd), 1e-6);
  CHECK(std::abs(a.b_out - fd.b_out) / denom < 1e-4);
  CHECK((a.w_hidden - fd.w_hidden).cwiseAbs().maxCoeff() / denom < 1e-4);
}

TEST_CASE("sgd_step: small steps never increase the sample loss") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    MlpParamsd p = random_params(rng);
    const Eigen::Vector2d input(u(rng), u(rng));
    const double target = u(rng);

    const double before = 0.5 * std::pow(forward(p, input) - target, 2.0);
    sgd_step(p, input, target, 1e-3);
    const double after = 0.5 * std::pow(forward(p, input) - target, 2.0);
    CHECK(after <= before + 1e-15);
  }
}

TEST_CASE("train: representable linear map is learned") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrainingSetd data;
  data.inputs.resize(40, 2);
  data.targets.resize(40);
  for (Index k = 0; k < 40; ++k) {
    data.inputs(k, 0) = u(rng);
    data.inputs(k, 1) = u(rng);
    data.targets[k] = 0.5 * data.inputs(k, 0);
  }

  TrainConfigd config;
  config.epochs = 200;
  config.learning_rate = 0.05;
  const auto params = train(data, config);
  CHECK(params.final_mse < 1e-3);
}

TEST_CASE("train: configuration contract") {
  TrainingSetd data;
  data.inputs = MatrixX<double>::Zero(4, 2);
  data.targets = VectorX<double>::Zero(4);

  TrainConfigd config;
  config.epochs = 0;
  CHECK_THROWS_AS(train(data, config), ParameterError);

  config.epochs = 1;
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(train(data, config), ParameterError);

  TrainingSetd empty;
  empty.inputs = MatrixX<double>::Zero(0, 2);
  empty.targets = VectorX<double>::Zero(0);
  CHECK_THROWS_AS(train(empty, TrainConfigd{}), ParameterError);
}

TEST_CASE("train: fixed seed is bit-deterministic") {
  const auto traj = generate<double>(40, 0.05, Motiond{}, NoiseSpecd{});
  const auto data = split_training_set(traj);

  TrainConfigd config;
  config.epochs = 50;
  const auto a = train(data, config);
  const auto b = train(data, config);
  CHECK((a.w_hidden.array() == b.w_hidden.array()).all());
  CHECK((a.b_hidden.array() == b.b_hidden.array()).all());
  CHECK((a.w_out.array() == b.w_out.array()).all());
  CHECK(a.b_out == b.b_out);
  CHECK(a.final_mse == b.final_mse);

  TrainConfigd other = config;
  other.seed = 99;
  const auto c = train(data, other);
  CHECK_FALSE((a.w_hidden.array() == c.w_hidden.array()).all());
}

TEST_CASE("train: runaway learning rate raises a divergence error") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrainingSetd data;
  data.inputs.resize(16, 2);
  data.targets.resize(16);
  for (Index k = 0; k < 16; ++k) {
    data.inputs(k, 0) = u(rng);
    data.inputs(k, 1) = u(rng);
    data.targets[k] = u(rng);
  }

  TrainConfigd config;
  config.epochs = 200;
  config.learning_rate = 1e6;
  config.normalization = Normalizationd{};  // identity: no damping rescale
  CHECK_THROWS_AS(train(data, config), DivergenceError);
}

TEST_CASE("split protocol: training rows are the causal pairs of the first half") {
  const auto traj = generate<double>(180, 0.05, Motiond{}, NoiseSpecd{});
  const auto data = split_training_set(traj);
  REQUIRE(data.size() == 89);  // k = 1 .. 89
  for (Index k = 1; k < 90; ++k) {
    CHECK(data.inputs(k - 1, 0) == traj.measured[k - 1]);
    CHECK(data.inputs(k - 1, 1) == traj.measured[k]);
    CHECK(data.targets[k - 1] == traj.truth[k]);
  }

  Trajectoryd tiny;
  tiny.truth = Eigen::VectorXd::Zero(3);
  tiny.measured = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(split_training_set(tiny), ParameterError);
}

TEST_CASE("evaluate_split: second half yields exactly N/2 estimates") {
  const auto traj = generate<double>(180, 0.05, Motiond{}, NoiseSpecd{});
  TrainConfigd config;
  config.epochs = 20;  // keep the unit test quick
  const auto [estimates, stats] = evaluate_split(traj, config);
  CHECK(estimates.size() == 90);
  CHECK(stats.count == 90);
}

TEST_CASE("evaluate_split: noiseless static data is reproduced almost exactly") {
  NoiseSpecd quiet{0.0, 0.0, 0.0, 1};
  const auto traj = generate<double>(180, 0.05, Motiond::at_rest(10.0), quiet);
  const auto [estimates, stats] = evaluate_split(traj, TrainConfigd{});
  CHECK(stats.mean_abs < 0.1);
}

TEST_CASE("evaluate_split: estimates never read second-half truth") {
  const auto traj = generate<double>(80, 0.05, Motiond{}, NoiseSpecd{});
  auto poked = traj;
  poked.truth.tail(40).array() += 50.0;

  TrainConfigd config;
  config.epochs = 10;
  const auto [est_a, stats_a] = evaluate_split(traj, config);
  const auto [est_b, stats_b] = evaluate_split(poked, config);
  CHECK((est_a.array() == est_b.array()).all());
  CHECK(stats_a.mean_abs != stats_b.mean_abs);
}
