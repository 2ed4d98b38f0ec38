#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "helpers.hpp"
#include "isac/metrics.hpp"

using namespace isac;
using isac_test::random_solution;
using isac_test::structured_scenario;

namespace {

// Effectively scalar instance: every user's channel and precoder live on
// the first transmit antenna, so all products collapse to scalars.
Scenario scalar_scenario(double h, double sigma_a, double noise, double pt,
                         int users = 1) {
  Scenario sc;
  sc.dims = SystemDims{users, 1, 1, users, users, 1, 1, 0};
  CMat row = CMat::Zero(1, users);
  row(0, 0) = Complex(h, 0.0);
  sc.channels.assign(users, row);
  sc.user_paths.assign(users, {PathSpec{1.0, 0.0, 0.0}});
  CMat target = CMat::Zero(1, users);
  target(0, 0) = Complex(sigma_a, 0.0);
  sc.target = target;
  sc.target_var = sigma_a * sigma_a;
  sc.noise_user.assign(users, noise);
  sc.noise_radar = noise;
  sc.power_budget = pt;
  sc.user_weights.assign(users, 1.0);
  sc.validate();
  return sc;
}

DigitalSolution scalar_solution(const Scenario& sc,
                                const std::vector<double>& amps) {
  DigitalSolution sol;
  for (double a : amps) {
    CMat f = CMat::Zero(sc.dims.n_tx, 1);
    f(0, 0) = Complex(a, 0.0);
    sol.precoders.push_back(f);
    sol.combiners.push_back(CMat::Constant(1, 1, Complex(1.0, 0.0)));
  }
  sol.radar_beamformer = CVec::Constant(1, Complex(1.0, 0.0));
  return sol;
}

// Straight-line re-evaluation of the per-user rate: explicit loops, no
// shared code with the library path.
double rate_by_hand(const Scenario& sc, const DigitalSolution& sol, int k) {
  const int ns = sc.dims.n_streams;
  CMat wh = sol.combiners[k].adjoint() * sc.channels[k];
  CMat j = CMat::Zero(ns, ns);
  for (int i = 0; i < sc.dims.n_users; ++i) {
    if (i == k) continue;
    CMat t = wh * sol.precoders[i];
    j += t * t.adjoint();
  }
  j += sc.noise_user[k] * sol.combiners[k].adjoint() * sol.combiners[k];
  CMat s = wh * sol.precoders[k];
  CMat m = CMat::Identity(ns, ns) + s * s.adjoint() * j.inverse();
  return std::log2(std::abs(m.determinant()));
}

}  // namespace

TEST_CASE("scalar rate reduces to log2(1 + SNR)") {
  Scenario sc = scalar_scenario(1.0, 1.0, 1.0, 9.0);
  DigitalSolution sol = scalar_solution(sc, {3.0});  // F = sqrt(P), P = 9
  CHECK(user_rate(sc, sol, 0) ==
        doctest::Approx(std::log2(10.0)).epsilon(1e-12));

  DigitalSolution zero = scalar_solution(sc, {0.0});
  CHECK(user_rate(sc, zero, 0) == doctest::Approx(0.0));
}

TEST_CASE("scalar two-user rate sees the interference") {
  Scenario sc = scalar_scenario(1.0, 1.0, 0.5, 10.0, 2);
  DigitalSolution sol = scalar_solution(sc, {2.0, 1.0});  // P1=4, P2=1
  CHECK(user_rate(sc, sol, 0) ==
        doctest::Approx(std::log2(1.0 + 4.0 / 1.5)).epsilon(1e-12));
  CHECK(user_rate(sc, sol, 1) ==
        doctest::Approx(std::log2(1.0 + 1.0 / 4.5)).epsilon(1e-12));
}

TEST_CASE("degenerate combiner is reported") {
  Scenario sc = structured_scenario(11);
  DigitalSolution sol = random_solution(1, sc);
  sol.combiners[0].setZero();
  CHECK_THROWS_AS(user_rate(sc, sol, 0), std::runtime_error);
}

TEST_CASE("weighted sum rate weights and oracle agreement") {
  Scenario sc = structured_scenario(21);
  DigitalSolution sol = random_solution(2, sc);

  Scenario zero_w = sc;
  zero_w.user_weights.assign(sc.dims.n_users, 0.0);
  CHECK(weighted_sum_rate(zero_w, sol) == doctest::Approx(0.0));

  double sum = 0.0;
  for (int k = 0; k < sc.dims.n_users; ++k) sum += user_rate(sc, sol, k);
  CHECK(weighted_sum_rate(sc, sol) == doctest::Approx(sum).epsilon(1e-12));

  for (int k = 0; k < sc.dims.n_users; ++k)
    CHECK(user_rate(sc, sol, k) ==
          doctest::Approx(rate_by_hand(sc, sol, k)).epsilon(1e-9));
  CHECK(weighted_sum_rate(sc, sol) >= 0.0);
}

TEST_CASE("rate invariant under invertible combiner rotation") {
  Scenario sc = structured_scenario(31, {8, 3, 2, 2, 4, 1, 2, 1.0, 4.0});
  DigitalSolution sol = random_solution(3, sc);
  double base = user_rate(sc, sol, 0);
  Rng rng(77);
  CMat t(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t(i, j) = rng.cnormal(1.0);
  t += 2.0 * CMat::Identity(2, 2);  // keep it comfortably invertible
  DigitalSolution rotated = sol;
  rotated.combiners[0] = sol.combiners[0] * t;
  CHECK(user_rate(sc, rotated, 0) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("scalar SCNR closed form and beamformer scaling invariance") {
  Scenario sc = scalar_scenario(1.0, 2.0, 0.5, 9.0);
  DigitalSolution sol = scalar_solution(sc, {3.0});
  // sigma_A^2 P / sigma^2 = 4 * 9 / 0.5
  CHECK(scnr(sc, sol) == doctest::Approx(4.0 * 9.0 / 0.5).epsilon(1e-12));

  Scenario sc2 = structured_scenario(41);
  DigitalSolution sol2 = random_solution(4, sc2);
  double base = scnr(sc2, sol2);
  sol2.radar_beamformer *= Complex(0.3, -1.2);
  CHECK(scnr(sc2, sol2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("SCNR is zero when the beamformer ignores the target direction") {
  Scenario sc = structured_scenario(51, {8, 2, 1, 1, 4, 0, 2, 1.0, 4.0});
  DigitalSolution sol = random_solution(5, sc);
  CVec as = steering_vector(sc.dims.n_sensor, sc.target_aoa);
  CVec w = CVec::Zero(sc.dims.n_sensor);
  w[0] = -std::conj(as[1]);
  w[1] = std::conj(as[0]);
  sol.radar_beamformer = w;
  CHECK(scnr(sc, sol) <= 1e-25);
}

TEST_CASE("SCNR matches a Monte Carlo average over symbols and gains") {
  Scenario sc = structured_scenario(61, {6, 2, 1, 2, 3, 2, 2, 0.8, 3.0});
  DigitalSolution sol = random_solution(6, sc);
  double analytic = scnr(sc, sol);

  Rng rng(2024);
  const int draws = 100000;
  CVec as_t = steering_vector(sc.dims.n_sensor, sc.target_aoa);
  CVec at_t = steering_vector(sc.dims.n_tx, sc.target_aod);
  double num = 0.0, den = 0.0;
  for (int it = 0; it < draws; ++it) {
    CVec x = CVec::Zero(sc.dims.n_tx);
    for (int k = 0; k < sc.dims.n_users; ++k)
      for (int s = 0; s < sc.dims.n_streams; ++s)
        x += sol.precoders[k].col(s) * rng.cnormal(1.0);
    Complex alpha0 = rng.cnormal(sc.target_var);
    Complex sig = (sol.radar_beamformer.adjoint() * as_t)(0) * alpha0 *
                  (at_t.adjoint() * x)(0);
    num += std::norm(sig);
    Complex clut = 0.0;
    for (int i = 0; i < sc.dims.n_clutter; ++i) {
      CVec as_i = steering_vector(sc.dims.n_sensor, sc.clutter_aoa[i]);
      CVec at_i = steering_vector(sc.dims.n_tx, sc.clutter_aod[i]);
      clut += (sol.radar_beamformer.adjoint() * as_i)(0) *
              rng.cnormal(sc.clutter_vars[i]) * (at_i.adjoint() * x)(0);
    }
    CVec noise(sc.dims.n_sensor);
    for (int i = 0; i < sc.dims.n_sensor; ++i)
      noise[i] = rng.cnormal(sc.noise_radar);
    clut += (sol.radar_beamformer.adjoint() * noise)(0);
    den += std::norm(clut);
  }
  double mc = num / den;
  CHECK(std::abs(mc - analytic) / analytic < 0.02);
}

TEST_CASE("objective endpoints isolate each term") {
  Scenario sc = structured_scenario(71);
  DigitalSolution sol = random_solution(7, sc);
  double wsr = weighted_sum_rate(sc, sol);
  double s = scnr(sc, sol);

  CHECK(isac_objective(sc, sol, {1.0, 1.0, 1.0}) ==
        doctest::Approx(wsr).epsilon(1e-12));
  CHECK(isac_objective(sc, sol, {0.0, 1.0, 1.0}) ==
        doctest::Approx(s).epsilon(1e-12));
  CHECK(isac_objective(sc, sol, {0.5, 1.0, 1.0}) ==
        doctest::Approx(0.5 * (wsr + s)).epsilon(1e-12));
  CHECK_THROWS_AS(isac_objective(sc, sol, {1.5, 1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("mse matrix limits and positivity") {
  Scenario sc = structured_scenario(81, {8, 3, 2, 2, 4, 1, 2, 1.0, 4.0});
  DigitalSolution sol = random_solution(8, sc);

  MseOperands op;
  op.heff = sc.channels[0];
  op.x = {sol.precoders[0], sol.precoders[1]};
  op.combiner = CMat::Zero(sc.dims.n_rx, sc.dims.n_streams);
  op.gram = CMat::Identity(sc.dims.n_tx, sc.dims.n_tx);
  op.noise = sc.noise_user[0];
  op.power_budget = sc.power_budget;
  CMat e0 = mse_matrix(op, 0);
  CHECK((e0 - CMat::Identity(2, 2)).norm() < 1e-14);

  op.combiner = sol.combiners[0];
  CMat e = mse_matrix(op, 0);
  CHECK((e - e.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<CMat> eig(e);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("mse matrix vanishes under perfect scalar equalization") {
  MseOperands op;
  op.heff = CMat::Constant(1, 1, Complex(2.0, 0.0));
  op.x = {CMat::Constant(1, 1, Complex(1.0, 0.0))};
  op.combiner = CMat::Constant(1, 1, Complex(0.5, 0.0));  // w h x = 1
  op.gram = CMat::Identity(1, 1);
  op.noise = 0.0;
  op.power_budget = 1.0;
  CHECK(mse_matrix(op, 0).norm() < 1e-14);
}

TEST_CASE("beam pattern peaks on a matched steering direction") {
  const int nt = 32;
  const double target = 0.42;
  CMat f = steering_vector(nt, target) * Complex(2.0, 1.0);
  RVec grid(182);
  for (int i = 0; i <= 180; ++i)
    grid[i] = (-90.0 + i) * 3.14159265358979323846 / 180.0;
  grid[181] = target;  // exact angle on the grid
  RVec pat = transmit_beam_pattern(f, grid);
  Eigen::Index argmax;
  pat.maxCoeff(&argmax);
  CHECK(argmax == grid.size() - 1);
  CHECK(pat[argmax] ==
        doctest::Approx(std::norm(Complex(2.0, 1.0))).epsilon(1e-9));

  CMat zero = CMat::Zero(nt, 2);
  CHECK(transmit_beam_pattern(zero, grid).maxCoeff() == 0.0);
  CHECK_THROWS_AS(transmit_beam_pattern(f, RVec()), std::invalid_argument);
}

TEST_CASE("solution power accounting and validation") {
  Scenario sc = structured_scenario(91);
  DigitalSolution sol = random_solution(9, sc);
  CHECK(sol.transmit_power() == doctest::Approx(sc.power_budget));
  CHECK_NOTHROW(sol.validate(sc));
  sol.precoders[0] *= 2.0;
  CHECK_THROWS_AS(sol.validate(sc), std::invalid_argument);
}
