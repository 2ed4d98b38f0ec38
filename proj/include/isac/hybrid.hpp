#pragma once

#include <optional>
#include <vector>

#include "isac/bcd.hpp"

namespace isac {

// Analog/digital factorization of a set of per-user precoders (or of a
// single combiner). Every analog entry lies on the unit circle.
struct HybridFactors {
  CMat analog;                // Nt x Nrf
  std::vector<CMat> digital;  // Nrf x Ns per user
  double residual = 0.0;      // ||F* - Frf Fbb||_F after rescaling

  std::vector<CMat> composed() const;  // Frf * Fbb_k per user
  double composed_power() const;
};

struct HybridOptConfig {
  int max_outer = 200;          // alternating digital/analog rounds
  double rel_tol = 1e-8;        // relative objective-change stop
  int manifold_steps = 50;      // Riemannian GD steps per round
  double armijo_step = 1.0;
  double armijo_contraction = 0.5;
  double armijo_slope = 1e-4;
  int armijo_backtracks = 30;
  std::optional<CMat> analog_init;  // overrides the SVD-phase start
};

/// SVD-phase initialization: Frf = exp(j angle(U(:,1:Nrf))) from the ordered
/// SVD of [F_1* ... F_K*], digital factors by least squares, then a common
/// scale restoring the power constraint.
HybridFactors init_hybrid(const std::vector<CMat>& opt_precoders, int n_rf,
                          double power_budget);

/// Alternating least-squares / Riemannian descent on the product of unit
/// circles. Digital step is the exact LS minimizer; the analog step uses
/// projected gradients with the retraction z -> z/|z| and Armijo line
/// search. Digital factors are rescaled at the end if the power budget is
/// exceeded.
HybridFactors factorize_hybrid(const std::vector<CMat>& opt_precoders,
                               int n_rf, double power_budget,
                               const HybridOptConfig& cfg = {});

/// Analog matrix that makes the factorization exact whenever the digital
/// precoder lies in the range of the basis: phase-only versions of the
/// basis columns padded with arbitrary unit-modulus columns. When
/// clutter_nulled, the trailing clutter columns are dropped first, so
/// n_rf >= r - I suffices.
CMat sufficient_rf_analog(const SubspaceBasis& basis, int n_rf,
                          bool clutter_nulled = false);

/// Per-user combiner factorization; same machinery, no power constraint.
HybridFactors factorize_combiner(const CMat& opt_combiner, int n_rf_rx,
                                 const HybridOptConfig& cfg = {});

/// Norm of the Riemannian gradient of the LS objective at the given
/// factors (diagnostic for the critical-point property).
double riemannian_grad_norm(const std::vector<CMat>& opt_precoders,
                            const HybridFactors& factors);

}  // namespace isac
