#pragma once

#include <cstdint>
#include <vector>

#include "isac/metrics.hpp"

namespace isac {

// Which steering columns enter the basis. When the scalarization zeroes one
// side of the objective, the columns serving only that side can be dropped
// without moving the solution set (drop_clutter additionally assumes the
// radar beamformer nulls the clutter).
enum class BasisSelection {
  all,          // UE paths + target + clutter (r columns)
  comm_only,    // UE paths (r - I - 1 columns), for rho_s == 0
  drop_clutter, // UE paths + target (r - I columns)
  sensing_only  // target + clutter (I + 1 columns), for rho_c == 0
};

struct SubspaceBasis {
  CMat basis;                     // Nt x r, unit-norm steering columns
  bool identity_fallback = false; // true when r would exceed Nt
  // Column layout: [comm | target | clutter]; zero for the fallback basis.
  int comm_cols = 0;
  int target_cols = 0;
  int clutter_cols = 0;

  int r() const { return static_cast<int>(basis.cols()); }
};

/// Basis whose range contains every non-trivial stationary precoder:
/// transmit steering vectors of all UE paths, then the target AoD, then
/// all clutter AoDs. Falls back to the identity when r > Nt.
SubspaceBasis subspace_basis(const Scenario& sc,
                             BasisSelection sel = BasisSelection::all);

// Subspace-reduced problem data plus the block-coordinate iterates.
struct ReducedState {
  std::vector<CMat> reduced_channels;  // Hbar_k = H_k V, Nr x r
  CMat reduced_target;                 // Abar = A V, Nsen x r
  std::vector<CMat> reduced_clutters;  // Bbar_i = B_i V, Nsen x r
  CMat gram;                           // Htilde = V^H V, r x r

  std::vector<CMat> x;                 // X_k, r x Ns
  std::vector<CMat> combiners;         // W_k, Nr x Ns
  std::vector<CMat> weight_mats;       // Lambda_k, Ns x Ns Hermitian PD
  CVec radar_w;                        // w, Nsen
  CVec aux_u;                          // u stacked, K*Ns

  int r() const { return static_cast<int>(gram.rows()); }
  CMat x_cat() const;                  // [X_1 ... X_K], r x K*Ns
  double power_trace() const;          // sum_k tr(Htilde X_k X_k^H)
};

struct BcdConfig {
  double tol = 1e-4;
  int max_iter = 100;
  TradeoffWeights weights;
  // Structured start: per-user eigen-beams plus the target steering
  // direction granted to the best-aligned user. Deterministic, and it
  // resolves the sensing-assignment ambiguity that otherwise drags out
  // convergence. random_init falls back to a seeded Gaussian X.
  bool random_init = false;
  std::uint64_t init_seed = 1;
  double init_sense_fraction = 0.4;
  // Re-scale X to the power boundary after every sweep instead of once at
  // the end. Equivalent trajectory in normalized coordinates; used by the
  // scaling-equivalence checks.
  bool renormalize_each_sweep = false;
  // Drop basis columns that are irrelevant when rho_c or rho_s is zero.
  bool shrink_pure_basis = false;
};

struct BcdTraceRow {
  int iteration = 0;
  double surrogate = 0.0;   // minimization-form surrogate, monotone non-increasing
  double objective = 0.0;   // scalarized objective at the power boundary
  double wsr = 0.0;         // bits/s/Hz
  double scnr = 0.0;        // linear
};

/// Reduced matrices only; iterates are left empty.
ReducedState reduce_scenario(const Scenario& sc, const SubspaceBasis& basis);

/// Power-feasible X (structured eigen-beam start, or seeded random when
/// random_init), identity-embedded W, Lambda = I, w = a_s(phi0), and one u
/// refresh so the first radar update is well-posed.
void init_bcd_state(ReducedState& state, const Scenario& sc,
                    const SubspaceBasis& basis, const BcdConfig& config);

// --- block updates (each is the exact minimizer of its subproblem) ---

/// Radar beamformer update; requires ||u|| > 0.
CVec update_radar_beamformer(const ReducedState& state, const Scenario& sc);

/// MMSE combiner of the reduced problem for user k.
CMat update_combiner(const ReducedState& state, const Scenario& sc, int k);

/// Lambda_k = (I - W_k^H Hbar_k X_k)^{-1}, Hermitized.
CMat update_weight_matrix(const ReducedState& state, int k);

/// Joint update of all X_k (shared system matrix, one factorization).
std::vector<CMat> update_reduced_precoders(const ReducedState& state,
                                           const Scenario& sc,
                                           const TradeoffWeights& weights);

/// Single-user convenience wrapper around the joint update.
CMat update_reduced_precoder(const ReducedState& state, const Scenario& sc,
                             const TradeoffWeights& weights, int k);

/// u_k for the quadratic transform; requires sigma^2 > 0 and ||w|| > 0.
CVec update_auxiliary_u(const ReducedState& state, const Scenario& sc, int k);

/// F_k = alpha * V * X_k with alpha = sqrt(Pt / sum_k tr(Htilde X_k X_k^H)).
std::vector<CMat> normalize_precoder(const ReducedState& state,
                                     const SubspaceBasis& basis,
                                     const Scenario& sc);

// --- evaluation of the reduced problem ---

/// Minimization-form surrogate objective of the block updates.
double surrogate_value(const ReducedState& state, const Scenario& sc,
                       const TradeoffWeights& weights);

/// WSR of the power-absorbed reduced problem (equals the true WSR of the
/// normalized precoder with the same combiners), bits/s/Hz.
double reduced_wsr(const ReducedState& state, const Scenario& sc);

/// SCNR of the power-absorbed reduced problem (equals the true SCNR of the
/// normalized precoder).
double reduced_scnr(const ReducedState& state, const Scenario& sc);

/// rho_c * reduced_wsr + rho_s * reduced_scnr.
double reduced_objective(const ReducedState& state, const Scenario& sc,
                         const TradeoffWeights& weights);

/// Block-coordinate solver for the fully-digital design. Sweeps
/// w -> W_k -> Lambda_k -> X_k -> u_k until the absolute objective change
/// drops below tol or max_iter is hit; returns the normalized precoders,
/// final combiners and radar beamformer, plus the per-sweep trace. A caller
/// supplying `init` must pass the basis it was reduced with.
DigitalSolution solve_bcd(const Scenario& sc, const BcdConfig& config,
                          const ReducedState* init = nullptr,
                          std::vector<BcdTraceRow>* trace = nullptr,
                          const SubspaceBasis* init_basis = nullptr);

/// cons1 = WSR of the eta=1 solution, cons2 = SCNR of the eta=0 solution;
/// puts both objective terms near one. Skips the runs a pure eta makes
/// irrelevant.
TradeoffWeights calibrate_weights(const Scenario& sc, double eta,
                                  const BcdConfig& base);

}  // namespace isac
