#pragma once

#include <vector>

#include "isac/model.hpp"

namespace isac {

// Fully-digital transceiver design: per-user precoders/combiners plus the
// radar receive beamformer. objective_trace carries the per-sweep history
// when produced by a solver.
struct DigitalSolution {
  std::vector<CMat> precoders;    // F_k, Nt x Ns
  std::vector<CMat> combiners;    // W_k, Nr x Ns
  CVec radar_beamformer;          // w, Nsen
  std::vector<double> objective_trace;
  bool converged = true;
  int iterations = 0;

  double transmit_power() const;

  // Dimension and power-budget consistency; throws on violation.
  void validate(const Scenario& sc) const;
};

// Scalarization weights of the joint objective. cons1/cons2 rescale WSR
// and SCNR so that neither term dominates purely by its units.
struct TradeoffWeights {
  double eta = 0.5;
  double cons1 = 1.0;
  double cons2 = 1.0;

  double rho_c() const { return eta / cons1; }
  double rho_s() const { return (1.0 - eta) / cons2; }

  void validate() const;
};

/// Achievable rate of user k in bits/s/Hz. Throws a degenerate-combiner
/// error when the interference-plus-noise matrix J_k is singular.
double user_rate(const Scenario& sc, const DigitalSolution& sol, int k);

double weighted_sum_rate(const Scenario& sc, const DigitalSolution& sol);

/// Radar output SCNR for the stacked precoder F = [F_1 ... F_K].
double scnr(const Scenario& sc, const DigitalSolution& sol);

/// rho_c * WSR + rho_s * SCNR.
double isac_objective(const Scenario& sc, const DigitalSolution& sol,
                      const TradeoffWeights& weights);

// Operands of the per-user MSE matrix. Covers both the subspace-reduced
// iterates (heff = H_k V, gram = V^H V) and the full-dimensional case
// (heff = H_k, gram = I).
struct MseOperands {
  CMat heff;                 // Nr x m
  std::vector<CMat> x;       // m x Ns, one per user
  CMat combiner;             // Nr x Ns
  CMat gram;                 // m x m
  double noise = 1.0;        // sigma_k^2
  double power_budget = 1.0; // P_t
};

/// E_k = (I - W^H Heff X_k)(...)^H + W^H Jbar_k W; Hermitian PSD.
CMat mse_matrix(const MseOperands& op, int k);

/// P(theta) = ||a_t(theta)^H F||^2 on the given angle grid (radians).
RVec transmit_beam_pattern(const CMat& precoder, const RVec& angle_grid);

}  // namespace isac
