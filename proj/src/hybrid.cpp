#include "isac/hybrid.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "isac/rng.hpp"

namespace isac {

namespace {

Complex unit_modulus(Complex z) {
  double a = std::abs(z);
  return a > 0.0 ? z / a : Complex(1.0, 0.0);
}

CMat phase_only(const CMat& m) {
  return m.unaryExpr([](Complex z) { return unit_modulus(z); });
}

CMat concat_cols(const std::vector<CMat>& ms) {
  if (ms.empty()) throw std::invalid_argument("empty precoder list");
  Eigen::Index cols = 0;
  for (const auto& m : ms) cols += m.cols();
  CMat cat(ms[0].rows(), cols);
  Eigen::Index at = 0;
  for (const auto& m : ms) {
    cat.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  return cat;
}

std::vector<CMat> split_cols(const CMat& cat, const std::vector<CMat>& like) {
  std::vector<CMat> out;
  out.reserve(like.size());
  Eigen::Index at = 0;
  for (const auto& m : like) {
    out.push_back(cat.middleCols(at, m.cols()));
    at += m.cols();
  }
  return out;
}

// Least-squares digital factor for fixed analog; min-norm when analog is
// rank deficient.
CMat digital_ls(const CMat& analog, const CMat& target_cat) {
  return analog.completeOrthogonalDecomposition().solve(target_cat);
}

double ls_objective(const CMat& target_cat, const CMat& analog,
                    const CMat& digital_cat) {
  return (target_cat - analog * digital_cat).squaredNorm();
}

// Projection of the Euclidean gradient onto the tangent space of the
// product-of-circles manifold.
CMat riemannian_grad(const CMat& target_cat, const CMat& analog,
                     const CMat& digital_cat) {
  CMat egrad = (analog * digital_cat - target_cat) * digital_cat.adjoint();
  CMat radial = egrad.cwiseProduct(analog.conjugate()).real().cast<Complex>();
  return egrad - radial.cwiseProduct(analog);
}

HybridFactors finalize(const CMat& target_cat, const CMat& analog,
                       const CMat& digital_cat,
                       const std::vector<CMat>& like, double power_budget) {
  HybridFactors hf;
  hf.analog = analog;
  CMat dig = digital_cat;
  if (power_budget > 0.0) {
    double p = (analog * dig).squaredNorm();
    if (p > power_budget) dig *= std::sqrt(power_budget / p);
  }
  hf.digital = split_cols(dig, like);
  hf.residual = std::sqrt(ls_objective(target_cat, analog, dig));
  return hf;
}

}  // namespace

std::vector<CMat> HybridFactors::composed() const {
  std::vector<CMat> out;
  out.reserve(digital.size());
  for (const auto& d : digital) out.push_back(analog * d);
  return out;
}

double HybridFactors::composed_power() const {
  double p = 0.0;
  for (const auto& d : digital) p += (analog * d).squaredNorm();
  return p;
}

HybridFactors init_hybrid(const std::vector<CMat>& opt_precoders, int n_rf,
                          double power_budget) {
  if (n_rf < 1) throw std::invalid_argument("init_hybrid: n_rf must be >= 1");
  CMat cat = concat_cols(opt_precoders);
  if (n_rf > cat.rows())
    throw std::invalid_argument("init_hybrid: n_rf exceeds antenna count");
  Eigen::JacobiSVD<CMat> svd(cat, Eigen::ComputeFullU);
  CMat analog = phase_only(svd.matrixU().leftCols(n_rf));
  CMat digital = digital_ls(analog, cat);
  return finalize(cat, analog, digital, opt_precoders, power_budget);
}

HybridFactors factorize_hybrid(const std::vector<CMat>& opt_precoders,
                               int n_rf, double power_budget,
                               const HybridOptConfig& cfg) {
  CMat cat = concat_cols(opt_precoders);
  if (n_rf < 1 || n_rf > cat.rows())
    throw std::invalid_argument("factorize_hybrid: need 1 <= n_rf <= Nt");

  CMat analog;
  if (cfg.analog_init) {
    if (cfg.analog_init->rows() != cat.rows() ||
        cfg.analog_init->cols() != n_rf)
      throw std::invalid_argument("factorize_hybrid: analog_init shape");
    analog = phase_only(*cfg.analog_init);
  } else {
    Eigen::JacobiSVD<CMat> svd(cat, Eigen::ComputeFullU);
    analog = phase_only(svd.matrixU().leftCols(n_rf));
  }

  CMat digital = digital_ls(analog, cat);
  double obj = ls_objective(cat, analog, digital);
  const double floor = 1e-30 * cat.squaredNorm();

  for (int outer = 0; outer < cfg.max_outer && obj > floor; ++outer) {
    // Analog step: Riemannian descent with Armijo backtracking.
    for (int it = 0; it < cfg.manifold_steps; ++it) {
      CMat rgrad = riemannian_grad(cat, analog, digital);
      if (!rgrad.allFinite())
        throw std::runtime_error("factorize_hybrid: non-finite gradient");
      double g2 = rgrad.squaredNorm();
      if (g2 <= 1e-24 * std::max(1.0, obj)) break;
      double t = cfg.armijo_step;
      bool accepted = false;
      for (int bt = 0; bt < cfg.armijo_backtracks; ++bt) {
        CMat cand = phase_only(analog - t * rgrad);
        double cand_obj = ls_objective(cat, cand, digital);
        if (cand_obj <= obj - cfg.armijo_slope * t * g2) {
          analog = cand;
          obj = cand_obj;
          accepted = true;
          break;
        }
        t *= cfg.armijo_contraction;
      }
      if (!accepted) break;
    }

    // Digital step: exact LS minimizer.
    digital = digital_ls(analog, cat);
    double new_obj = ls_objective(cat, analog, digital);
    bool done = (obj - new_obj) <= cfg.rel_tol * std::max(obj, 1e-300);
    obj = new_obj;
    if (done) break;
  }
  return finalize(cat, analog, digital, opt_precoders, power_budget);
}

CMat sufficient_rf_analog(const SubspaceBasis& basis, int n_rf,
                          bool clutter_nulled) {
  const CMat& v = basis.basis;
  int keep = basis.r();
  if (clutter_nulled) keep -= basis.clutter_cols;
  if (n_rf < keep)
    throw std::invalid_argument(
        "sufficient_rf_analog: n_rf below the resolvable path count (need " +
        std::to_string(keep) + ", got " + std::to_string(n_rf) + ")");
  const int nt = static_cast<int>(v.rows());
  if (n_rf > nt)
    throw std::invalid_argument("sufficient_rf_analog: n_rf exceeds Nt");

  CMat analog(nt, n_rf);
  analog.leftCols(keep) = phase_only(v.leftCols(keep));
  // Arbitrary unit-modulus padding; deterministic so runs reproduce.
  Rng pad(0x70ADu);
  for (int j = keep; j < n_rf; ++j)
    for (int i = 0; i < nt; ++i)
      analog(i, j) = std::exp(kImag * pad.uniform(0.0, 6.283185307179586));
  return analog;
}

HybridFactors factorize_combiner(const CMat& opt_combiner, int n_rf_rx,
                                 const HybridOptConfig& cfg) {
  return factorize_hybrid({opt_combiner}, n_rf_rx, 0.0, cfg);
}

double riemannian_grad_norm(const std::vector<CMat>& opt_precoders,
                            const HybridFactors& factors) {
  CMat cat = concat_cols(opt_precoders);
  CMat dig = concat_cols(factors.digital);
  return riemannian_grad(cat, factors.analog, dig).norm();
}

}  // namespace isac
