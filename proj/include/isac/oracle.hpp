#pragma once

#include <cstdint>
#include <vector>

#include "isac/bcd.hpp"
#include "isac/bd.hpp"

namespace isac {

// Independent verification machinery: analytic gradients of the scalarized
// objective, KKT residuals, a full-dimensional reference solver, scaling
// equivalence and brute-force power allocation. Consumed by tests and the
// CLI `verify` subcommand.

/// Gradient of the scalarized objective w.r.t. each F_k (conjugate-Wirtinger
/// convention: the finite-difference derivative along Re/Im of an entry is
/// twice the Re/Im of the returned entry). Rate terms carry the 1/ln2 of
/// base-2 logarithms. Throws when a Z-type matrix is singular.
std::vector<CMat> analytic_gradients(const Scenario& sc,
                                     const DigitalSolution& sol,
                                     const TradeoffWeights& weights);

/// Same gradient by central finite differences of isac_objective (test
/// oracle; step h applied to real and imaginary parts independently).
CMat fd_gradient(const Scenario& sc, const DigitalSolution& sol,
                 const TradeoffWeights& weights, int k, double h = 1e-6);

struct KktReport {
  double stationarity_residual = 0.0;  // || G_k - lambda F_k || over all k
  double dual_lambda = 0.0;            // least-squares fit, > 0 off trivial points
  double power_slack = 0.0;            // P_t - used power
  bool is_trivial_point = false;       // H_k F_k ~ 0 and A F_k ~ 0 for all k
  double gradient_scale = 0.0;         // || G || for relative residuals
};

KktReport kkt_report(const Scenario& sc, const DigitalSolution& sol,
                     const TradeoffWeights& weights);

struct PgConfig {
  int max_iter = 1500;
  double init_step = 1.0;
  double shrink = 0.5;
  int max_backtracks = 40;
  std::uint64_t init_seed = 1;
};

/// Projected gradient ascent on the full-dimensional problem: combiners set
/// to the MMSE solution and the radar beamformer to the dominant generalized
/// eigenvector each iteration, F stepped along the analytic gradient and
/// projected back onto the power ball. Independent of the subspace-reduced
/// path; meant for desk-scale instances.
DigitalSolution projected_gradient_reference(const Scenario& sc,
                                             const TradeoffWeights& weights,
                                             const PgConfig& cfg = {});

struct ScalingReport {
  double alpha = 0.0;                // empirical scaling of the normalization
  double alpha_formula = 0.0;        // sqrt(Pt / sum tr(Htilde X X^H))
  double unconstrained_value = 0.0;  // power-absorbed objective at the iterate
  double constrained_value = 0.0;    // true objective of the normalized point
};

/// Runs the unconstrained block-coordinate sweeps, normalizes once at the
/// end, and evaluates both objective routes.
ScalingReport scaling_equivalence_check(const Scenario& sc,
                                        const TradeoffWeights& weights,
                                        std::uint64_t seed = 1,
                                        int sweeps = 30);

// Problem data of the scalarized power-allocation problem.
struct PowerProblem {
  double rho_c = 1.0;
  double rho_s = 0.0;
  std::vector<double> user_weights;
  std::vector<RVec> stream_gains;
  std::vector<double> noises;
  std::vector<RVec> d_coeff;
  double g_coeff = 0.0;
  double power_budget = 1.0;

  int n_vars() const;  // total streams + 1 sensing variable
};

struct GridOracleResult {
  PowerAllocation best;
  double objective = 0.0;
};

/// Brute-force search over the full-power simplex with window refinement.
/// The sensing powers enter through their sum (their coefficient is the
/// shared g), so one simplex coordinate covers them.
GridOracleResult waterfilling_grid_oracle(const PowerProblem& prob,
                                          int resolution = 16,
                                          int passes = 6);

}  // namespace isac
