#ifndef PUBDP_PCA_HPP
#define PUBDP_PCA_HPP

#include <Eigen/Dense>
#include <cmath>

#include "pubdp/budget.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/linalg.hpp"
#include "pubdp/mechanisms.hpp"
#include "pubdp/rng.hpp"

namespace pubdp {

struct PcaConfig {
  int ell = 1;          // target dimension
  double radius = 0.0;  // clip radius r; the moment matrix has sensitivity 2r^2
};

/// Noise multiplier for the private PCA moment release:
/// zCDP: 1/sqrt(2*rho); approx DP: sqrt(2*ln(2/delta))/eps.
inline double f_pca(const PrivacyBudget& budget) {
  if (budget.kind == BudgetKind::kZCDP) {
    if (!(budget.rho > 0.0)) throw ParameterError("f_pca: rho must be > 0");
    return 1.0 / std::sqrt(2.0 * budget.rho);
  }
  if (!(budget.eps > 0.0 && budget.delta > 0.0))
    throw ParameterError("f_pca: eps and delta must be > 0");
  return std::sqrt(2.0 * std::log(2.0 / budget.delta)) / budget.eps;
}

/// Differentially private PCA: clip the (pre-centered) rows to radius r,
/// perturb the moment matrix Y^T Y with symmetric Gaussian noise at
/// per-entry sigma_P = 2 r^2 f_pca(budget), and return the top-ell
/// eigenprojector (a symmetric idempotent d x d matrix of rank ell).
inline Eigen::MatrixXd private_pca(const Eigen::MatrixXd& z, const PcaConfig& cfg,
                                   const PrivacyBudget& budget, RngStream& rng) {
  const Eigen::Index d = z.cols();
  if (cfg.ell < 1 || cfg.ell > d) throw ParameterError("private_pca: need 1 <= ell <= d");
  if (!(cfg.radius > 0.0)) throw ParameterError("private_pca: radius must be positive");

  const Eigen::MatrixXd y = clip_rows(z, cfg.radius);
  const double sigma_p = 2.0 * cfg.radius * cfg.radius * f_pca(budget);

  Eigen::MatrixXd moment = y.transpose() * y;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double e = rng.noise_normal(sigma_p);
      moment(i, j) += e;
      if (j != i) moment(j, i) += e;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment);
  // Eigen sorts ascending; the top-ell eigenvectors are the last ell columns.
  const Eigen::MatrixXd top = es.eigenvectors().rightCols(cfg.ell);
  return top * top.transpose();
}

}  // namespace pubdp

#endif  // PUBDP_PCA_HPP
