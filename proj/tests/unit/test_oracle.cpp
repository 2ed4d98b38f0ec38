#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "isac/oracle.hpp"

using namespace isac;
using isac_test::Shape;
using isac_test::random_solution;
using isac_test::structured_scenario;

TEST_CASE("analytic gradients match central finite differences") {
  double worst = 0.0;
  for (int inst = 0; inst < 4; ++inst) {
    Scenario sc = structured_scenario(700 + inst, {8, 2, 1, 2, 3, 1, 2, 1.0, 3.0});
    TradeoffWeights w{0.5, 1.0, 1.0};
    DigitalSolution sol = random_solution(31 + inst, sc, 0.8);
    auto grads = analytic_gradients(sc, sol, w);
    for (int k = 0; k < sc.dims.n_users; ++k) {
      CMat fd = fd_gradient(sc, sol, w, k);
      worst = std::max(worst, (grads[k] - fd).norm() / fd.norm());
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("rate gradient vanishes when every combiner is channel-orthogonal") {
  Scenario sc = structured_scenario(1, {8, 3, 1, 2, 3, 1, 2, 1.0, 3.0});
  DigitalSolution sol = random_solution(5, sc);
  // Channels have rank <= 2 inside C^3; point each combiner at the
  // orthogonal complement of its own channel's column space.
  for (int k = 0; k < sc.dims.n_users; ++k) {
    CMat left = null_space_basis(sc.channels[k].adjoint());  // columns _|_ range(H)
    REQUIRE(left.cols() >= 1);
    sol.combiners[k] = left.leftCols(1);
  }
  TradeoffWeights comm_only{1.0, 1.0, 1.0};
  auto grads = analytic_gradients(sc, sol, comm_only);
  for (const auto& g : grads) CHECK(g.norm() < 1e-12);
}

TEST_CASE("SCNR gradient near the origin keeps only the target term") {
  Scenario sc = structured_scenario(2, {8, 2, 1, 2, 3, 1, 2, 1.0, 3.0});
  DigitalSolution sol = random_solution(7, sc);
  for (auto& f : sol.precoders) f *= 1e-6;  // f1 = O(eps^2)
  TradeoffWeights sense_only{0.0, 1.0, 1.0};
  auto grads = analytic_gradients(sc, sol, sense_only);

  const CVec aw = sc.target.adjoint() * sol.radar_beamformer;
  double f2 = sc.noise_radar * sol.radar_beamformer.squaredNorm();
  for (const auto& b : sc.clutters)
    for (const auto& f : sol.precoders)
      f2 += (f.adjoint() * b.adjoint() * sol.radar_beamformer).squaredNorm();
  for (int k = 0; k < sc.dims.n_users; ++k) {
    CMat expected = (1.0 / f2) * aw * (aw.adjoint() * sol.precoders[k]);
    CHECK((grads[k] - expected).norm() <= 1e-6 * expected.norm());
  }
}

TEST_CASE("kkt report flags hand-built trivial points") {
  Scenario sc = structured_scenario(3, {10, 2, 1, 2, 3, 1, 2, 1.0, 3.0});
  const auto& d = sc.dims;
  CMat stacked(d.n_users * d.n_rx + d.n_sensor, d.n_tx);
  Eigen::Index at = 0;
  for (const auto& h : sc.channels) {
    stacked.middleRows(at, d.n_rx) = h;
    at += d.n_rx;
  }
  stacked.middleRows(at, d.n_sensor) = sc.target;
  CMat joint_null = null_space_basis(stacked);
  REQUIRE(joint_null.cols() >= 1);

  DigitalSolution sol = random_solution(9, sc);
  for (auto& f : sol.precoders)
    f = joint_null.leftCols(1) * CMat::Constant(1, 1, Complex(1.0, 0.0));
  TradeoffWeights w{0.5, 1.0, 1.0};
  KktReport rep = kkt_report(sc, sol, w);
  CHECK(rep.is_trivial_point);

  DigitalSolution generic = random_solution(10, sc);
  CHECK_FALSE(kkt_report(sc, generic, w).is_trivial_point);
}

TEST_CASE("converged solver output fits a positive dual variable") {
  Scenario sc = structured_scenario(4, {12, 2, 1, 2, 4, 1, 2, 1.0, 3.0});
  TradeoffWeights w{0.5, 1.0, 1.0};
  BcdConfig cfg;
  cfg.weights = w;
  cfg.init_seed = 11;
  cfg.max_iter = 200;
  cfg.tol = 1e-10;
  DigitalSolution sol = solve_bcd(sc, cfg);
  KktReport rep = kkt_report(sc, sol, w);
  CHECK_FALSE(rep.is_trivial_point);
  CHECK(rep.dual_lambda > 0.0);
  CHECK(rep.power_slack >= -1e-9);
}

TEST_CASE("projected gradient reference reaches single-user capacity") {
  Scenario sc = structured_scenario(5, {8, 2, 2, 1, 3, 0, 2, 1.0, 4.0});
  TradeoffWeights comm_only{1.0, 1.0, 1.0};
  PgConfig pg;
  pg.max_iter = 2500;
  pg.init_seed = 3;
  DigitalSolution sol = projected_gradient_reference(sc, comm_only, pg);

  // Water-filling capacity over the channel singular values.
  Eigen::JacobiSVD<CMat> svd(sc.channels[0]);
  RVec sv = svd.singularValues();
  double lo = 0.0, hi = 1e6;
  for (int it = 0; it < 200; ++it) {
    double mu = 0.5 * (lo + hi);
    double used = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      used += std::max(0.0, mu - sc.noise_user[0] / (sv[i] * sv[i]));
    (used > sc.power_budget ? hi : lo) = mu;
  }
  double capacity = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    double p = std::max(0.0, 0.5 * (lo + hi) - sc.noise_user[0] / (sv[i] * sv[i]));
    capacity += std::log2(1.0 + sv[i] * sv[i] * p / sc.noise_user[0]);
  }
  CHECK(weighted_sum_rate(sc, sol) >= 0.98 * capacity);

  for (std::size_t t = 1; t < sol.objective_trace.size(); ++t)
    CHECK(sol.objective_trace[t] >= sol.objective_trace[t - 1] - 1e-9);
}

TEST_CASE("reference solutions live in the steering subspace") {
  for (int inst = 0; inst < 3; ++inst) {
    Scenario sc =
        structured_scenario(800 + inst, {16, 2, 1, 2, 4, 1, 2, 1.0, 4.0});
    TradeoffWeights w{0.5, 1.0, 1.0};
    PgConfig pg;
    pg.max_iter = 2500;
    pg.init_seed = 21 + inst;
    DigitalSolution sol = projected_gradient_reference(sc, w, pg);
    REQUIRE_FALSE(kkt_report(sc, sol, w).is_trivial_point);

    SubspaceBasis basis = subspace_basis(sc);
    CMat fcat(sc.dims.n_tx, sc.dims.n_users * sc.dims.n_streams);
    for (int k = 0; k < sc.dims.n_users; ++k)
      fcat.col(k) = sol.precoders[k];
    CHECK(projection_residual(basis.basis, fcat) <= 1e-3);
  }
}

TEST_CASE("scaling equivalence between the two objective routes") {
  Scenario sc = structured_scenario(6, {12, 2, 1, 2, 4, 1, 2, 1.0, 3.0});
  TradeoffWeights w{0.6, 1.0, 1.0};
  ScalingReport rep = scaling_equivalence_check(sc, w, 17);
  CHECK(std::abs(rep.constrained_value - rep.unconstrained_value) <=
        1e-6 * std::max(1.0, std::abs(rep.unconstrained_value)));
  CHECK(std::abs(rep.alpha - rep.alpha_formula) <= 1e-10);
}

TEST_CASE("reference solver and BCD land in the same objective range") {
  int checked = 0;
  for (int inst = 0; inst < 10; ++inst) {
    Scenario sc =
        structured_scenario(900 + inst, {16, 2, 1, 2, 4, 1, 2, 1.0, 4.0});
    TradeoffWeights w{0.5, 1.0, 1.0};
    BcdConfig cfg;
    cfg.weights = w;
    cfg.init_seed = 5 + inst;
    cfg.max_iter = 200;
    cfg.tol = 1e-9;
    DigitalSolution bcd_sol = solve_bcd(sc, cfg);
    PgConfig pg;
    pg.max_iter = 3000;
    pg.init_seed = 5 + inst;
    DigitalSolution ref = projected_gradient_reference(sc, w, pg);
    double a = isac_objective(sc, bcd_sol, w);
    double b = isac_objective(sc, ref, w);
    CHECK(std::abs(a - b) <= 0.05 * std::max(a, b));
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("grid oracle agrees with the closed-form allocation on 3-4 variables") {
  Rng rng(41);
  for (int inst = 0; inst < 4; ++inst) {
    PowerProblem prob;
    int streams = 2 + inst % 2;  // 3 or 4 simplex variables with sensing
    prob.user_weights = {1.0, 0.7};
    prob.stream_gains = {RVec(1), RVec(streams - 1)};
    prob.noises = {1.0, 0.6};
    prob.d_coeff = {RVec(1), RVec(streams - 1)};
    prob.stream_gains[0][0] = 1.0 + rng.uniform();
    prob.d_coeff[0][0] = 0.1 * rng.uniform();
    for (int i = 0; i < streams - 1; ++i) {
      prob.stream_gains[1][i] = 0.5 + rng.uniform();
      prob.d_coeff[1][i] = 0.1 * rng.uniform();
    }
    prob.g_coeff = inst % 2 ? 0.4 : 0.0;
    prob.rho_c = 1.0;
    prob.rho_s = 0.6;
    prob.power_budget = 3.0;

    PowerAllocation wf = allocate_power(prob.rho_c, prob.rho_s,
                                        prob.user_weights, prob.stream_gains,
                                        prob.noises, prob.d_coeff,
                                        prob.g_coeff, prob.power_budget);
    double wf_obj =
        power_objective(prob.rho_c, prob.rho_s, prob.user_weights,
                        prob.stream_gains, prob.noises, prob.d_coeff,
                        prob.g_coeff, wf);
    GridOracleResult grid = waterfilling_grid_oracle(prob);
    CHECK(wf_obj >= grid.objective - 1e-4);
    CHECK(std::abs(wf_obj - grid.objective) <= 1e-4);
    CHECK(std::abs(wf.total() - prob.power_budget) <= 1e-8);
  }
}
