#pragma once

#include <vector>

#include "isac/metrics.hpp"

namespace isac {

// Per-user pieces of the block-diagonalization construction plus the SCNR
// decomposition coefficients, all at unit per-stream power.
struct BdDecomposition {
  std::vector<CMat> null_basis;      // Vhat_k^(0), Nt x null-dim
  std::vector<CMat> comm_dirs;       // Vhat^(0) Vbd(:,1:Ns), Nt x Ns, unit cols
  std::vector<CMat> combiners;       // W_k = Ubd(:,1:Ns)
  std::vector<RVec> stream_gains;    // varrho_{k,i}, non-increasing, size Ns
  CVec sensing_dir;                  // f_sen (zero vector when infeasible gain)
  CMat sensing_precoder;             // F_sen = f_sen 1^T, ||F_sen||_F in {0,1}
  std::vector<RVec> d_coeff;         // d_{k,i} >= 0
  std::vector<RVec> e_coeff;         // e_{k,i} (cross terms)
  double g_coeff = 0.0;              // g >= 0
};

struct PowerAllocation {
  std::vector<RVec> comm_powers;   // p_{k,i} >= 0, watts
  std::vector<double> sense_powers;  // p_{s,k} >= 0
  double water_level = 0.0;          // mu

  double total() const;
};

/// Orthonormal basis of the null space of a stacked channel matrix
/// (rank by singular-value threshold). Zero-width when full column rank.
CMat bd_null_space(const CMat& stacked, double rel_tol = 1e-10);

/// Null-space communication precoder for user k: interference-free at all
/// other UEs and dark at every clutter patch. stream_powers holds the
/// per-stream transmit powers (size Ns). Throws when the null space is too
/// small for Ns streams.
struct CommPrecoder {
  CMat precoder;       // F_ck
  CMat combiner;       // W_k
  RVec stream_gains;   // varrho_{k,i}
};
CommPrecoder comm_precoder(const Scenario& sc, int k,
                           const RVec& stream_powers);
/// Equal split of a per-user power over the Ns streams.
CommPrecoder comm_precoder(const Scenario& sc, int k, double user_power);

/// Sensing direction: normalized projection of a_t(theta0) onto the null
/// space of all user channels and clutter responses. Returns a zero vector
/// when a_t(theta0) lies in the communication subspace.
struct SensingPrecoder {
  CVec f_sen;  // Nt
  CMat f_sen_mat;  // f_sen * 1^T, Frobenius norm 1 (or 0)
};
SensingPrecoder sensing_precoder(const Scenario& sc);

/// Full decomposition with the d/e/g SCNR coefficients evaluated at unit
/// per-stream power and w = a_s(phi0).
BdDecomposition bd_decompose(const Scenario& sc);

/// SCNR linear-gain coefficients of a decomposition (also exposed
/// standalone for testing).
void scnr_coefficients(const Scenario& sc, BdDecomposition& dec);

/// Water-filling power allocation of the scalarized objective
///   rho_c sum w_k log2(1 + gains^2 p / noise) + rho_s (sum d p + g sum p_s)
/// over the simplex sum p + sum p_s = P_t (Proposition-4 closed form with
/// the water level found by bisection).
PowerAllocation allocate_power(double rho_c, double rho_s,
                               const std::vector<double>& user_weights,
                               const std::vector<RVec>& stream_gains,
                               const std::vector<double>& noises,
                               const std::vector<RVec>& d_coeff,
                               double g_coeff, double power_budget);

/// Assembled analytical solution: F_k = F_ck + sqrt(p_sk) F_sen with powers
/// from allocate_power, SVD combiners, and w = a_s(phi0).
DigitalSolution solve_bd(const Scenario& sc, const TradeoffWeights& weights);

/// Magnitude of the neglected SCNR cross term relative to the kept linear
/// terms, |sum e sqrt(p p_s)| / (sum d p + g sum p_s).
double bd_cross_term_ratio(const BdDecomposition& dec,
                           const PowerAllocation& alloc);

/// Objective value of the power-allocation problem (used by the oracle).
double power_objective(double rho_c, double rho_s,
                       const std::vector<double>& user_weights,
                       const std::vector<RVec>& stream_gains,
                       const std::vector<double>& noises,
                       const std::vector<RVec>& d_coeff, double g_coeff,
                       const PowerAllocation& alloc);

}  // namespace isac
