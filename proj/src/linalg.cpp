#include "isac/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace isac {

double logdet_hpd(const CMat& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(hermitize(m));
  const RVec& ev = eig.eigenvalues();
  double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i] > 0.0) || ev[i] < 1e-15 * lmax) {
      throw std::runtime_error(std::string(what) +
                               " is not numerically positive definite");
    }
    sum += std::log(ev[i]);
  }
  return sum;
}

double log2det_ratio(const CMat& s, const CMat& j, const char* what) {
  constexpr double kLn2 = 0.6931471805599453;
  return (logdet_hpd(j + s, what) - logdet_hpd(j, what)) / kLn2;
}

CMat null_space_basis(const CMat& m, double rel_tol) {
  if (m.rows() == 0) return CMat::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

CMat row_space_basis(const CMat& m, double rel_tol) {
  if (m.rows() == 0) return CMat::Zero(m.cols(), 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * smax) ++rank;
  return svd.matrixV().leftCols(rank);
}

CMat range_projector(const CMat& m, double rel_tol) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU);
  const RVec& sv = svd.singularValues();
  double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * smax) ++rank;
  CMat u = svd.matrixU().leftCols(rank);
  return u * u.adjoint();
}

CMat orthonormal_range(const CMat& m, double rel_threshold) {
  Eigen::ColPivHouseholderQR<CMat> qr(m);
  qr.setThreshold(rel_threshold);
  Eigen::Index rank = qr.rank();
  return qr.householderQ() * CMat::Identity(m.rows(), rank);
}

double projection_residual(const CMat& basis, const CMat& x) {
  double nx = x.norm();
  if (nx == 0.0) return 0.0;
  CMat p = range_projector(basis);
  return (x - p * x).norm() / nx;
}

CVec dominant_generalized_eigvec(const CMat& a, const CMat& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> eig(hermitize(a),
                                                     hermitize(b));
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("generalized eigensolver failed");
  CVec v = eig.eigenvectors().col(a.rows() - 1);  // eigenvalues ascending
  return v / v.norm();
}

}  // namespace isac
