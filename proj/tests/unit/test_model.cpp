#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "isac/model.hpp"

using namespace isac;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScenarioGenConfig default_config() { return ScenarioGenConfig{}; }
}  // namespace

TEST_CASE("steering vector closed form") {
  CVec v = steering_vector(4, 0.0);
  for (int m = 0; m < 4; ++m) {
    CHECK(v[m].real() == doctest::Approx(0.5));
    CHECK(v[m].imag() == doctest::Approx(0.0));
  }

  CVec endfire = steering_vector(2, kPi / 2);
  CHECK(endfire[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(endfire[1].real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(std::abs(endfire[1].imag()) < 1e-12);

  CHECK_THROWS_AS(steering_vector(0, 0.0), std::invalid_argument);
}

TEST_CASE("steering vector unit norm for random draws") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    int n = 1 + static_cast<int>(rng.uniform(0, 128));
    double theta = rng.uniform(-kPi / 2, kPi / 2);
    CHECK(std::abs(steering_vector(n, theta).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("path gain variance at the reference distance") {
  ChannelGenParams params;
  params.shadowing_std = 0.0;
  CHECK(path_gain_variance(1.0, params, true, 0.0) ==
        doctest::Approx(std::pow(10.0, -6.14)).epsilon(1e-12));
  CHECK(path_gain_variance(1.0, params, false, 0.0) ==
        doctest::Approx(std::pow(10.0, -6.84)).epsilon(1e-12));
  CHECK_THROWS_AS(path_gain_variance(0.0, params, true, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(path_gain_variance(-1.0, params, true, 0.0),
                  std::invalid_argument);
}

TEST_CASE("path gain sample second moment matches the variance") {
  ChannelGenParams params;
  params.shadowing_std = 0.0;
  Rng rng(123);
  const int n = 1000000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += std::norm(path_gain_sample(rng, 1.0, params, true));
  double expected = std::pow(10.0, -6.14);
  CHECK(std::abs(acc / n - expected) / expected < 0.01);
}

TEST_CASE("user channel from explicit gains") {
  SystemDims dims;
  dims.n_tx = 2;
  dims.n_rx = 2;
  dims.n_rf_tx = 2;
  dims.n_rf_rx = 1;
  dims.n_streams = 1;
  dims.n_users = 1;

  std::vector<PathSpec> paths = {{1.0, 0.0, 0.0}};
  CMat h = user_channel_from_gains(dims, paths, {Complex(1.0, 0.0)});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(h(i, j) - 0.5) < 1e-14);

  // Opposite gains on identical angles cancel.
  std::vector<PathSpec> twin = {{1.0, 0.3, -0.2}, {1.0, 0.3, -0.2}};
  CMat zero = user_channel_from_gains(dims, twin,
                                      {Complex(2.0, 1.0), Complex(-2.0, -1.0)});
  CHECK(zero.norm() < 1e-14);

  CHECK_THROWS_AS(user_channel_from_gains(dims, paths, {}),
                  std::invalid_argument);
}

TEST_CASE("generated channel equals the independent outer-product sum") {
  SystemDims dims;
  dims.n_tx = 8;
  dims.n_rx = 4;
  dims.n_rf_tx = 4;
  dims.n_rf_rx = 2;
  dims.n_streams = 2;
  dims.n_users = 1;
  Rng rng(99);
  std::vector<PathSpec> paths;
  for (int l = 0; l < 3; ++l)
    paths.push_back(
        {0.5 + rng.uniform(), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});

  Rng draw(5);
  UserChannel uc = generate_user_channel(draw, dims, paths);

  CMat ref = CMat::Zero(dims.n_rx, dims.n_tx);
  for (std::size_t l = 0; l < paths.size(); ++l) {
    CVec ar = steering_vector(dims.n_rx, paths[l].aoa);
    CVec at = steering_vector(dims.n_tx, paths[l].aod);
    for (int i = 0; i < dims.n_rx; ++i)
      for (int j = 0; j < dims.n_tx; ++j)
        ref(i, j) += uc.gains[l] * ar[i] * std::conj(at[j]);
  }
  CHECK((uc.h - ref).norm() < 1e-12);

  Eigen::JacobiSVD<CMat> svd(uc.h);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * svd.singularValues()[0]) ++rank;
  CHECK(rank <= 3);
}

TEST_CASE("response matrix basics") {
  CMat r = response_matrix(1.0, 0.0, 0.0, 2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(r(i, j) - 0.5) < 1e-14);

  CMat r2 = response_matrix(3.7, 0.4, -0.9, 5, 9);
  CHECK(r2.norm() == doctest::Approx(std::sqrt(3.7)).epsilon(1e-12));

  CHECK(response_matrix(0.0, 0.1, 0.2, 3, 4).norm() == 0.0);
  CHECK_THROWS_AS(response_matrix(-1.0, 0, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("default scenario matches the reference parameterization") {
  Scenario sc = build_scenario(Rng(42), default_config());
  CHECK(sc.dims.n_tx == 64);
  CHECK(sc.dims.n_users == 5);
  CHECK(sc.dims.n_rx == 4);
  CHECK(sc.dims.n_streams == 2);
  CHECK(sc.dims.n_rf_tx == 10);
  CHECK(sc.dims.n_rf_rx == 2);
  CHECK(sc.noise_radar == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(sc.noise_user[0] == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(sc.power_budget == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sc.target_var / sc.noise_radar == doctest::Approx(100.0));
  double mean_cnr = 0.0;
  for (double v : sc.clutter_vars) mean_cnr += v / sc.noise_radar;
  mean_cnr /= sc.clutter_vars.size();
  CHECK(mean_cnr == doctest::Approx(1e4).epsilon(1e-9));
  CHECK(sc.total_paths() == 18);  // 5 users x 3 paths + 2 clutters + target

  // Target response has rank one.
  Eigen::JacobiSVD<CMat> svd(sc.target);
  CHECK(svd.singularValues()[0] > 0.0);
  CHECK(svd.singularValues()[1] < 1e-12 * svd.singularValues()[0]);
}

TEST_CASE("seeded scenario generation is bit-for-bit reproducible") {
  Scenario a = build_scenario(Rng(1234), default_config());
  Scenario b = build_scenario(Rng(1234), default_config());
  for (int k = 0; k < a.dims.n_users; ++k)
    CHECK(a.channels[k] == b.channels[k]);
  CHECK(a.target == b.target);
  for (int i = 0; i < a.dims.n_clutter; ++i)
    CHECK(a.clutters[i] == b.clutters[i]);
  CHECK(a.target_aod == b.target_aod);

  Scenario c = build_scenario(Rng(1235), default_config());
  CHECK(a.channels[0] != c.channels[0]);
}

TEST_CASE("zero clutter scenario") {
  ScenarioGenConfig cfg = default_config();
  cfg.dims.n_clutter = 0;
  Scenario sc = build_scenario(Rng(3), cfg);
  CHECK(sc.clutters.empty());
  CHECK(sc.clutter_vars.empty());
  CHECK(sc.total_paths() == 16);
}

TEST_CASE("geometry inconsistencies are rejected") {
  ScenarioGenConfig cfg = default_config();
  cfg.geometry.ue_aod = std::vector<double>{0.1, 0.2};  // needs 5
  CHECK_THROWS_AS(build_scenario(Rng(1), cfg), std::invalid_argument);

  ScenarioGenConfig bad_dims = default_config();
  bad_dims.dims.n_rf_tx = 4;  // K*Ns = 10 > 4
  CHECK_THROWS_AS(build_scenario(Rng(1), bad_dims), std::invalid_argument);
}

TEST_CASE("pinned angles land in the realized scenario") {
  ScenarioGenConfig cfg = default_config();
  cfg.dims.n_users = 3;
  cfg.dims.n_streams = 1;
  cfg.dims.n_rf_tx = 3;
  cfg.dims.n_rf_rx = 1;
  cfg.chan.n_paths_per_user = 1;
  cfg.geometry.ue_aod =
      std::vector<double>{10 * kPi / 180, 15 * kPi / 180, 25 * kPi / 180};
  cfg.geometry.target_aod = 30 * kPi / 180;
  cfg.geometry.clutter_aod = std::vector<double>{50 * kPi / 180, 60 * kPi / 180};
  Scenario sc = build_scenario(Rng(8), cfg);
  CHECK(sc.user_paths[0][0].aod == doctest::Approx(10 * kPi / 180));
  CHECK(sc.user_paths[2][0].aod == doctest::Approx(25 * kPi / 180));
  CHECK(sc.target_aod == doctest::Approx(30 * kPi / 180));
  CHECK(sc.clutter_aod[1] == doctest::Approx(60 * kPi / 180));
}
