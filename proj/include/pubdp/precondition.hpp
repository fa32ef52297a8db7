#ifndef PUBDP_PRECONDITION_HPP
#define PUBDP_PRECONDITION_HPP

#include <Eigen/Dense>
#include <cmath>

#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"
#include "pubdp/linalg.hpp"

namespace pubdp {

/// Invertible affine recentering/rescaling built from a handful of public
/// samples, together with the range constants (L, U) it certifies: after the
/// map y = sigma_hat^{-1/2} (x - mu_hat) / sqrt(L), the private distribution's
/// covariance satisfies I <= Sigma_Y <= (U/L) I and its mean norm is bounded,
/// each with probability >= 1 - beta over the public draw.
struct PreconditionTransform {
  Eigen::VectorXd mu_hat;
  Eigen::MatrixXd sigma_hat;
  double L = 0.0;
  double U = 0.0;
  double beta = 0.0;   // failure probability the constants were computed for
  double gamma = 0.0;  // public-data contamination level (0 = trusted public data)

  // Cached symmetric square root and inverse square root of sigma_hat.
  Eigen::MatrixXd sqrt_sigma;
  Eigen::MatrixXd inv_sqrt_sigma;

  [[nodiscard]] Eigen::Index dim() const { return mu_hat.size(); }

  /// Certified bound on the transformed mean norm.
  [[nodiscard]] double mean_norm_bound() const {
    const double base = std::sqrt(5.0 * std::log(3.0 / beta));
    const double shift = gamma > 0.0 ? std::sqrt(10.0 * gamma / (1.0 - gamma)) : 0.0;
    return std::sqrt(U / L) * (base + shift);
  }
};

/// Certified range bounds handed to the inner learner: R bounds the mean
/// norm, K the covariance condition number, both in transformed coordinates.
struct RangeBounds {
  double R = 0.0;
  double K = 1.0;
};

namespace detail {

inline void finish_transform(PreconditionTransform& t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.sigma_hat);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (ev.minCoeff() < 1e-12 * lmax)
    throw DegenerateDataError("precondition: public empirical covariance numerically singular");
  Eigen::VectorXd sq = ev.cwiseSqrt();
  t.sqrt_sigma = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
  t.inv_sqrt_sigma =
      es.eigenvectors() * sq.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Preconditioner from r >= d+1 public rows. The canonical construction uses
/// exactly d+1 rows; with more rows the same moment formulas apply with the
/// 1/(r-1) normalization (identical at r = d+1) and the (L, U) constants stay
/// at their d+1 values, which are only conservative for larger r.
inline PreconditionTransform precondition_from_rows(const Eigen::MatrixXd& pub, double beta) {
  const Eigen::Index d = pub.cols();
  const Eigen::Index r = pub.rows();
  if (d < 1) throw ArityError("precondition: dimension must be >= 1");
  if (r < d + 1) throw ArityError("precondition: need at least d+1 public rows");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("precondition: beta must lie in (0,1)");
  if (!pub.allFinite()) throw InputError("precondition: non-finite public row");

  PreconditionTransform t;
  t.beta = beta;
  t.mu_hat = pub.colwise().mean();
  const Eigen::MatrixXd centered = pub.rowwise() - t.mu_hat.transpose();
  t.sigma_hat = centered.transpose() * centered / static_cast<double>(r - 1);

  const double dd = static_cast<double>(d);
  const double lg = std::log(3.0 / beta);
  t.L = dd / (4.0 * dd + 4.0 * std::sqrt(2.0 * dd * lg) + 2.0 * lg);
  t.U = 9.0 * dd * dd / (beta * beta);
  detail::finish_transform(t);
  return t;
}

/// Canonical public-data preconditioner: exactly d+1 rows.
inline PreconditionTransform public_precondition(const Eigen::MatrixXd& pub, double beta) {
  if (pub.rows() != pub.cols() + 1)
    throw ArityError("public_precondition: expected exactly d+1 public rows");
  return precondition_from_rows(pub, beta);
}

/// Relax (L, U) to tolerate public data drawn from a distribution at TV
/// distance gamma from the private one: L_g = (1-g)^4/4 * L, U_g = 4/(1-g)^4 * U.
inline PreconditionTransform robust_bounds(const PreconditionTransform& t, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("robust_bounds: gamma must lie in [0,1)");
  PreconditionTransform out = t;
  const double shrink = std::pow(1.0 - gamma, 4.0) / 4.0;
  out.L = shrink * t.L;
  out.U = t.U / shrink;
  out.gamma = gamma;
  return out;
}

/// Row-wise forward map y = sigma_hat^{-1/2} (x - mu_hat) / sqrt(L).
inline Eigen::MatrixXd apply_transform(const Eigen::MatrixXd& x, const PreconditionTransform& t) {
  return ((x.rowwise() - t.mu_hat.transpose()) * t.inv_sqrt_sigma.transpose()) / std::sqrt(t.L);
}

/// Push Gaussian parameters through the forward map.
inline GaussianParams transform_params(const GaussianParams& p, const PreconditionTransform& t) {
  GaussianParams out;
  out.mean = t.inv_sqrt_sigma * (p.mean - t.mu_hat) / std::sqrt(t.L);
  out.cov = t.inv_sqrt_sigma * p.cov * t.inv_sqrt_sigma / t.L;
  return out;
}

/// Pull estimated parameters back to the original coordinates:
/// mu = sqrt(L) sigma_hat^{1/2} mu_Y + mu_hat, Sigma = L sigma_hat^{1/2} Sigma_Y sigma_hat^{1/2}.
inline GaussianParams invert_params(const GaussianParams& p, const PreconditionTransform& t) {
  GaussianParams out;
  out.mean = std::sqrt(t.L) * (t.sqrt_sigma * p.mean) + t.mu_hat;
  out.cov = t.L * (t.sqrt_sigma * p.cov * t.sqrt_sigma);
  return out;
}

/// Range bounds in transformed coordinates: R from the certified mean-norm
/// bound, K = U/L.
inline RangeBounds range_bounds(const PreconditionTransform& t) {
  return RangeBounds{t.mean_norm_bound(), t.U / t.L};
}

}  // namespace pubdp

#endif  // PUBDP_PRECONDITION_HPP
