#ifndef PUBDP_LINALG_HPP
#define PUBDP_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pubdp/errors.hpp"

namespace pubdp {

/// Symmetric matrix power via eigendecomposition, with eigenvalues floored at
/// `floor` before exponentiation (floor <= 0 means no flooring).
inline Eigen::MatrixXd sym_power(const Eigen::MatrixXd& a, double p, double floor = 0.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double v = ev[i];
    if (floor > 0.0) v = std::max(v, floor);
    ev[i] = std::pow(v, p);
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) { return sym_power(a, 0.5, 0.0); }

/// Projection onto the PSD cone with a relative eigenvalue floor: eigenvalues
/// below max(1e-12 * lambda_max, 1e-12) are raised to that floor, so the
/// result is always symmetric positive definite.
inline Eigen::MatrixXd psd_project(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  const double lmax = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  const double floor = std::max(1e-12 * lmax, 1e-12);
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::max(ev[i], floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Clip rows (samples) to the L2 ball of radius `radius` about the origin.
/// The post-condition max row norm <= radius holds exactly, including for
/// adversarially large inputs.
inline Eigen::MatrixXd clip_rows(const Eigen::MatrixXd& x, double radius) {
  if (!(radius > 0.0)) throw ParameterError("clip_rows: radius must be positive");
  Eigen::MatrixXd out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > radius) {
      out.row(i) *= radius / norm;
      // One rescale can land a last-ulp above the radius; nudge down until
      // the bound holds exactly.
      while (out.row(i).norm() > radius) out.row(i) *= 0.9999999999999999;
    }
  }
  return out;
}

}  // namespace pubdp

#endif  // PUBDP_LINALG_HPP
