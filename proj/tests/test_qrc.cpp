#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fluxlattice/error.hpp"
#include "fluxlattice/network.hpp"
#include "fluxlattice/qrc.hpp"
#include "fluxlattice/rng.hpp"
#include "fluxlattice/spectra.hpp"

using namespace fluxlattice;

namespace {

NetworkSpec reservoir_network(Topology t) {
  NetworkSpec spec = NetworkSpec::uniform({1.0, 0.2, 0.45}, std::move(t));
  spec.delta_profile = inhomogeneous_deltas(0.2, 0.1, spec.n_qubits());
  return spec;
}

// Two qubits and a short window keep the end-to-end cases cheap.
ReservoirConfig small_config() {
  ReservoirConfig cfg;
  cfg.l_r = 40;
  cfg.n_t = 4;
  cfg.t_max = 15.0;
  cfg.washout = 5;
  cfg.drive_amplitude = 0.05;
  return cfg;
}

FeatureVector features_of(std::vector<double> v) { return FeatureVector{std::move(v)}; }

double inf_norm(const std::vector<double>& v) {
  double w = 0.0;
  for (double x : v) w = std::max(w, std::abs(x));
  return w;
}

}  // namespace

TEST_CASE("frequency encoding") {
  const ReservoirConfig cfg;
  CHECK(encode_frequency(0.0, cfg) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(encode_frequency(1.0, cfg) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(encode_frequency(0.5, cfg) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(encode_frequency(-0.01, cfg), std::invalid_argument);
  CHECK_THROWS_AS(encode_frequency(1.01, cfg), std::invalid_argument);
}

TEST_CASE("reservoir config validation names the field") {
  ReservoirConfig cfg;
  cfg.l_r = 30;
  try {
    cfg.validate(5);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("reservoir.l_r") != std::string::npos);
  }
  cfg = ReservoirConfig{};
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
  cfg = ReservoirConfig{};
  cfg.omega_max = 0.1;
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
  CHECK_NOTHROW(ReservoirConfig{}.validate(5));
}

TEST_CASE("feature layout at reservoir parameters") {
  const NetworkSpec spec = reservoir_network(Topology::linear(5, -0.2));
  const ReservoirConfig cfg;
  const FeatureMap map(spec, cfg);
  CHECK(map.feature_length() == 31);

  const auto ground = sigma_z_profile(diagonalize(build_hamiltonian(spec)).state(0).amplitudes(), 5);
  for (double s : {0.0, 0.7}) {
    const auto m = map.measure_input(s).entries;
    REQUIRE(m.size() == 31);
    CHECK(m.back() == 1.0);
    for (std::size_t k = 0; k + 1 < m.size(); ++k) CHECK(std::abs(m[k]) <= 1.0);
    // Nothing has evolved at t0.
    for (int i = 0; i < 5; ++i) CHECK(m[static_cast<std::size_t>(i)] == doctest::Approx(ground[i]).epsilon(1e-12));
  }

  ReservoirConfig off = cfg;
  off.drive_amplitude = 0.0;
  const auto flat = FeatureMap(spec, off).measure_input(0.3).entries;
  for (int j = 1; j < off.n_t; ++j) {
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(flat[static_cast<std::size_t>(5 * j + i)] - flat[static_cast<std::size_t>(i)]) < 1e-10);
    }
  }
  CHECK(flat.back() == 1.0);
}

TEST_CASE("optional sigma-x channels and input bias slot") {
  const NetworkSpec spec = reservoir_network(Topology::linear(2, -0.2));
  ReservoirConfig cfg = small_config();
  cfg.include_sigma_x = true;
  cfg.bias_slot = BiasSlot::input;
  const FeatureMap map(spec, cfg);
  CHECK(map.feature_length() == 2 * 2 * 4 + 1);
  const auto m = map.measure_input(0.25).entries;
  REQUIRE(static_cast<int>(m.size()) == map.feature_length());
  CHECK(m.back() == 0.25);
  // The free function always appends a constant 1.
  CHECK(measure_features(spec, 0.3, cfg).entries.back() == 1.0);
}

TEST_CASE("cyclic shift") {
  const ReservoirState r{{1.0, 2.0, 3.0, 4.0}};
  CHECK(shift(r, 1).entries == std::vector<double>{2.0, 3.0, 4.0, 1.0});
  CHECK(shift(r, 0).entries == r.entries);
  CHECK(shift(r, 4).entries == r.entries);
  CHECK(shift(r, 6).entries == std::vector<double>{3.0, 4.0, 1.0, 2.0});
}

TEST_CASE("lengthen and unlengthen") {
  CHECK(lengthen(features_of({5.0, 7.0}), 4).entries == std::vector<double>{5.0, 0.0, 7.0, 0.0});
  CHECK(lengthen(features_of({5.0, 7.0}), 2).entries == std::vector<double>{5.0, 7.0});
  CHECK_THROWS_AS(lengthen(features_of({1.0, 2.0, 3.0}), 2), std::invalid_argument);

  std::vector<double> m(31);
  for (std::size_t q = 0; q < m.size(); ++q) m[q] = 0.5 + static_cast<double>(q);
  const auto r = lengthen(features_of(m), 400);
  REQUIRE(r.entries.size() == 400);
  for (std::size_t i = 0; i < 400; ++i) {
    const bool on_stride = i % 12 == 0 && i <= 360;
    CHECK((r.entries[i] != 0.0) == on_stride);
  }
  CHECK(r.entries[360] == m.back());
  CHECK(unlengthen(r, 31).entries == m);
}

TEST_CASE("reservoir recursion examples") {
  ReservoirConfig cfg;
  cfg.l_r = 4;
  cfg.gamma = 0.5;
  const auto m = features_of({1.0, 2.0});
  CHECK(reservoir_step({}, m, cfg).entries == lengthen(m, 4).entries);

  // r = 0.5 * shift((1, 0, 2, 0)) + (1, 0, 2, 0) = (1, 1, 2, 0.5)
  const auto r1 = reservoir_step({}, m, cfg);
  CHECK(reservoir_step(r1, m, cfg).entries == std::vector<double>{1.0, 1.0, 2.0, 0.5});

  ReservoirConfig memoryless = cfg;
  memoryless.gamma = 0.0;
  const auto other = features_of({-3.0, 4.0});
  CHECK(reservoir_step(r1, other, memoryless).entries == lengthen(other, 4).entries);

  CHECK_THROWS_AS(reservoir_step(ReservoirState{{1.0, 2.0}}, m, cfg), std::invalid_argument);
}

TEST_CASE("bias channel accumulates geometrically") {
  ReservoirConfig cfg;
  cfg.l_r = 31;
  cfg.n_shift = 0;
  std::vector<double> m(31, 0.0);
  m.back() = 1.0;
  ReservoirState r;
  for (int k = 1; k <= 200; ++k) {
    r = reservoir_step(r, features_of(m), cfg);
    const double expect = (1.0 - std::pow(cfg.gamma, k)) / (1.0 - cfg.gamma);
    CHECK(r.entries.back() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.entries.back() <= 1.0 / (1.0 - cfg.gamma));
  }
}

TEST_CASE("reservoir stays bounded under adversarial features") {
  ReservoirConfig cfg;
  Xoshiro256pp rng(7);
  ReservoirState r;
  const double bound = 1.0 / (1.0 - cfg.gamma);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> m(31);
    for (double& x : m) x = rng.next() & 1 ? 1.0 : -1.0;
    r = reservoir_step(r, features_of(m), cfg);
    CHECK(inf_norm(r.entries) <= bound + 1e-12);
  }
  // All +1 features with a shift that returns every 31 steps is the worst case.
  cfg.l_r = 31;
  cfg.n_shift = 31;
  r = {};
  for (int k = 0; k < 200; ++k) r = reservoir_step(r, features_of(std::vector<double>(31, 1.0)), cfg);
  CHECK(inf_norm(r.entries) == doctest::Approx(bound).epsilon(1e-12));
}

TEST_CASE("fading memory contracts by gamma per step") {
  ReservoirConfig cfg;
  Xoshiro256pp rng(11);
  std::vector<FeatureVector> inputs;
  for (int k = 0; k < 30; ++k) {
    std::vector<double> m(31);
    for (double& x : m) x = rng.symmetric(1.0);
    inputs.push_back(features_of(m));
  }
  auto perturbed = inputs;
  perturbed[0].entries[3] += 0.5;
  ReservoirState a, b;
  double first = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    a = reservoir_step(a, inputs[k], cfg);
    b = reservoir_step(b, perturbed[k], cfg);
    std::vector<double> d(a.entries.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.entries[i] - b.entries[i];
    const double gap = inf_norm(d);
    if (k == 0) {
      first = gap;
      CHECK(first == doctest::Approx(0.5));
    } else {
      CHECK(gap == doctest::Approx(std::pow(cfg.gamma, static_cast<double>(k)) * first).epsilon(1e-9));
    }
  }
}

TEST_CASE("readout training") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  const Readout w = train_readout(id, Eigen::Vector2d(1.0, 2.0));
  CHECK(w.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.weights[1] == doctest::Approx(2.0).epsilon(1e-12));

  // Duplicate column: the minimum-norm solution splits the weight.
  Eigen::MatrixXd dup(3, 2);
  dup << 1.0, 1.0, 2.0, 2.0, 3.0, 3.0;
  const Readout split = train_readout(dup, Eigen::Vector3d(2.0, 4.0, 6.0));
  CHECK(split.weights[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(split.weights[1] == doctest::Approx(1.0).epsilon(1e-10));

  Xoshiro256pp rng(3);
  Eigen::MatrixXd r(60, 12);
  Eigen::VectorXd truth(12);
  for (Eigen::Index j = 0; j < 12; ++j) truth(j) = rng.symmetric(2.0);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = rng.symmetric(1.0);
  }
  const Readout fit = train_readout(r, r * truth);
  for (Eigen::Index j = 0; j < 12; ++j) CHECK(std::abs(fit.weights[static_cast<std::size_t>(j)] - truth(j)) < 1e-9);

  // Interleaved zero columns get zero weight.
  Eigen::MatrixXd sparse = Eigen::MatrixXd::Zero(60, 24);
  for (Eigen::Index j = 0; j < 12; ++j) sparse.col(2 * j) = r.col(j);
  const Readout padded = train_readout(sparse, r * truth);
  for (Eigen::Index j = 0; j < 12; ++j) {
    CHECK(std::abs(padded.weights[static_cast<std::size_t>(2 * j)] - truth(j)) < 1e-9);
    CHECK(std::abs(padded.weights[static_cast<std::size_t>(2 * j + 1)]) < 1e-12);
  }

  CHECK_THROWS_AS(train_readout(Eigen::MatrixXd::Zero(3, 2), Eigen::Vector3d(1.0, 2.0, 3.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_readout(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), std::invalid_argument);
}

TEST_CASE("valid prediction time") {
  const std::vector<double> truth{0.0, 0.0, 0.0};
  CHECK(valid_prediction_time(truth, truth, 0.3, 1.0) == 3);
  CHECK(valid_prediction_time(std::vector<double>{0.1, 0.2, 0.4}, truth, 0.3, 1.0) == 2);
  CHECK(valid_prediction_time(std::vector<double>{0.5, 0.0, 0.0}, truth, 0.3, 1.0) == 0);
  // Errors are measured in units of sigma.
  CHECK(valid_prediction_time(std::vector<double>{0.05, 0.1, 0.2}, truth, 0.3, 0.5) == 2);
  CHECK_THROWS_AS(valid_prediction_time(std::vector<double>{0.0}, truth, 0.3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(valid_prediction_time(truth, truth, 0.3, 0.0), std::invalid_argument);

  CHECK(standard_deviation(std::vector<double>{1.0, 3.0}) == doctest::Approx(1.0));
}

TEST_CASE("window offsets are seeded and bounded") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto o = window_offset(seed, 500);
    CHECK(o <= 500);
    CHECK(o == window_offset(seed, 500));
  }
  CHECK(window_offset(9, 0) == 0);
}

TEST_CASE("closed loop") {
  const NetworkSpec spec = reservoir_network(Topology::linear(2, -0.2));
  const ReservoirConfig cfg = small_config();
  const FeatureMap map(spec, cfg);
  const Readout zero{std::vector<double>(static_cast<std::size_t>(cfg.l_r), 0.0)};
  const ReservoirState warm{std::vector<double>(static_cast<std::size_t>(cfg.l_r), 0.0)};
  CHECK(forecast_closed_loop(map, zero, warm, 0.5, 0).empty());

  // A readout that always predicts 0 reproduces the constant series 0.
  const auto flat = forecast_closed_loop(map, zero, warm, 0.0, 5);
  CHECK(flat == std::vector<double>(5, 0.0));

  // The monitor can stop the loop early.
  std::size_t calls = 0;
  const auto early = forecast_closed_loop(map, zero, warm, 0.0, 5, [&](std::size_t k, double) {
    ++calls;
    return k < 1;
  });
  CHECK(early.size() == 2);
  CHECK(calls == 2);

  Readout broken = zero;
  broken.weights[0] = std::nan("");
  CHECK_THROWS_AS(forecast_closed_loop(map, broken, warm, 0.0, 3), NumericalError);
}

TEST_CASE("prediction run is deterministic and consistent") {
  const NetworkSpec spec = reservoir_network(Topology::linear(2, -0.2));
  const ReservoirConfig cfg = small_config();
  const FeatureMap map(spec, cfg);
  std::vector<double> series;
  for (int k = 0; k < 80; ++k) series.push_back(0.5 + 0.45 * std::sin(0.3 * k));
  PredictionTask task;
  task.n_train = 40;
  task.horizon = 12;

  const auto a = run_prediction(map, series, 3, task);
  const auto b = run_prediction(map, series, 3, task);
  CHECK(a.forecast == b.forecast);
  CHECK(a.vpt == b.vpt);
  REQUIRE(a.forecast.size() == 12);
  REQUIRE(a.truth.size() == 12);
  CHECK(a.train_inputs.size() == 45);
  for (std::size_t k = 0; k < a.train_inputs.size(); ++k) {
    CHECK(a.train_inputs[k] == series[3 + k]);
    CHECK(a.train_targets[k] == series[4 + k]);
  }
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::isnan(a.train_fit[k]));
  // The forecast starts one step after the last training target.
  CHECK(a.truth.front() == series[3 + 45 + 1]);
  CHECK(a.sigma == doctest::Approx(standard_deviation(series)));
  CHECK(a.vpt == valid_prediction_time(a.forecast, a.truth, task.epsilon, a.sigma));

  // Cached features give the same answer as direct measurement.
  const auto cache = measure_series(map, series, 0, series.size(), 2);
  const auto c = run_prediction(map, series, 3, task,
                                [&](std::size_t idx) { return cache[idx]; });
  CHECK(c.forecast == a.forecast);

  task.stop_at_failure = true;
  const auto stopped = run_prediction(map, series, 3, task);
  CHECK(stopped.vpt == a.vpt);
  CHECK(stopped.forecast.size() == std::min<std::size_t>(12, static_cast<std::size_t>(a.vpt) + 1));

  CHECK_THROWS_AS(run_prediction(map, series, 30, task), std::out_of_range);
}
