#ifndef PUBDP_LEARNER_HPP
#define PUBDP_LEARNER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "pubdp/budget.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"
#include "pubdp/linalg.hpp"
#include "pubdp/mechanisms.hpp"
#include "pubdp/precondition.hpp"
#include "pubdp/rng.hpp"

namespace pubdp {

/// Optional clip-radius overrides for the bounded learner. The defaults are
/// the worst-case radii implied by the (R, K) range bounds; pipelines that
/// know the data scale from public information pass tighter radii (public
/// data carries no privacy constraint, so a public-derived radius is free).
struct LearnerOptions {
  std::optional<double> mean_clip;  // step-1 clip radius (default: B(R, K))
  std::optional<double> cov_clip;   // step-3 clip radius (default: 2 * step-1 radius)
};

/// Clip-and-noise Gaussian learner for data with mean norm <= R and
/// covariance between I and K*I:
///   1. clip rows to radius B = R + sqrt(K) * (sqrt(d) + sqrt(2 ln(4n/beta)));
///   2. release the noisy empirical mean (sensitivity 2B/n) at half budget;
///   3. recenter by the noisy mean, clip to 2B, release the noisy empirical
///      second moment (sensitivity 2*(2B)^2/n) with symmetric-matrix noise at
///      the other half;
///   4. symmetrize and project onto the PSD cone.
/// Total privacy cost: the full budget, by composition of the two releases.
inline GaussianParams bounded_gaussian_learner(const Eigen::MatrixXd& y, const RangeBounds& bounds,
                                               double alpha, double beta,
                                               const PrivacyBudget& budget, RngStream& rng,
                                               const LearnerOptions& opts = {}) {
  (void)alpha;  // part of the utility contract, not of the computation
  const Eigen::Index n = y.rows();
  const Eigen::Index d = y.cols();
  if (n < 2) throw ArityError("bounded_gaussian_learner: need at least 2 rows");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("learner: beta must lie in (0,1)");
  if (!(std::isfinite(bounds.R) && std::isfinite(bounds.K)) || bounds.K < 1.0 || bounds.R <= 0.0)
    throw ParameterError("learner: invalid range bounds");

  const double nn = static_cast<double>(n);
  const double b_default = bounds.R + std::sqrt(bounds.K) *
                                          (std::sqrt(static_cast<double>(d)) +
                                           std::sqrt(2.0 * std::log(4.0 * nn / beta)));
  const double b1 = opts.mean_clip.value_or(b_default);
  const double b2 = opts.cov_clip.value_or(2.0 * b1);

  const PrivacyBudget half = budget.fraction(1, 2);

  const Eigen::MatrixXd x1 = clip_rows(y, b1);
  const Eigen::VectorXd emp_mean = x1.colwise().mean();
  const Eigen::VectorXd mu = gaussian_mechanism(emp_mean, 2.0 * b1 / nn, half, rng);

  const Eigen::MatrixXd x2 = clip_rows(x1.rowwise() - mu.transpose(), b2);
  const Eigen::MatrixXd second = x2.transpose() * x2 / nn;
  const Eigen::MatrixXd noisy =
      gaussian_mechanism_symmetric(second, 2.0 * b2 * b2 / nn, half, rng);

  GaussianParams out;
  out.mean = mu;
  out.cov = psd_project(noisy);
  return out;
}

/// zCDP entry point with the budget given directly as rho.
inline GaussianParams bounded_zcdp_gaussian_learner(const Eigen::MatrixXd& y,
                                                    const RangeBounds& bounds, double alpha,
                                                    double beta, double rho, RngStream& rng,
                                                    const LearnerOptions& opts = {}) {
  return bounded_gaussian_learner(y, bounds, alpha, beta, PrivacyBudget::Zcdp(rho), rng, opts);
}

namespace detail {

// Default cushion on the public-scale clip radius used by the public-private
// estimator; calibrated once against the end-to-end harness baselines.
inline constexpr double kClipCushion = 2.0;

// Clip radius from public information only: the transformed public rows have
// empirical covariance exactly (1/L) I, so sqrt(1/L) is the public-implied
// per-direction spread of the private data in transformed coordinates.
//
// With only m public rows the empirical covariance can understate the true
// scale by roughly (1 + sqrt(d/(m-d)))^2 in its smallest direction (the
// small-sample Wishart edge), so the radius is widened by that factor; it
// decays to ~1 once m >> d, keeping the clip tight when the public sample is
// actually informative.
inline double public_scale_clip(const PreconditionTransform& t, Eigen::Index d, Eigen::Index m,
                                double n, double beta) {
  const double scale = std::sqrt(1.0 / t.L);
  const double shift =
      t.gamma > 0.0 ? 1.0 + std::sqrt(10.0 * t.gamma / (1.0 - t.gamma)) : 1.0;
  const double edge =
      1.0 + std::sqrt(static_cast<double>(d) / static_cast<double>(std::max<Eigen::Index>(m - d, 1)));
  return kClipCushion * edge * edge * shift * scale *
         (std::sqrt(static_cast<double>(d)) + std::sqrt(2.0 * std::log(4.0 * n / beta)));
}

}  // namespace detail

/// Public-private Gaussian estimator: precondition with the public rows at
/// failure beta/2 (relaxed bounds when the public source is gamma-far), run
/// the bounded learner on the transformed private rows at beta/2, and invert
/// the transform. The release is a post-processing of the learner's output,
/// so the whole budget is spent on the private rows only.
inline GaussianParams pub_dp_gaussian_estimator(const Eigen::MatrixXd& pub,
                                                const Eigen::MatrixXd& priv, double alpha,
                                                double beta, const PrivacyBudget& budget,
                                                double gamma, RngStream& rng) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ParameterError("pub_dp_gaussian_estimator: gamma must lie in [0,1)");
  if (pub.cols() != priv.cols())
    throw InputError("pub_dp_gaussian_estimator: public/private dimension mismatch");

  PreconditionTransform t = precondition_from_rows(pub, beta / 2.0);
  if (gamma > 0.0) t = robust_bounds(t, gamma);
  const RangeBounds rb = range_bounds(t);

  const Eigen::MatrixXd y = apply_transform(priv, t);
  LearnerOptions opts;
  opts.mean_clip = detail::public_scale_clip(t, priv.cols(), pub.rows(),
                                             static_cast<double>(priv.rows()), beta / 2.0);
  // The transform already centers by the public mean, so after recentering by
  // the (small) noisy mean the rows still fit inside the same radius; the
  // worst-case doubling would only inflate the second-moment sensitivity.
  opts.cov_clip = opts.mean_clip;
  const GaussianParams est_y =
      bounded_gaussian_learner(y, rb, alpha, beta / 2.0, budget, rng, opts);
  return invert_params(est_y, t);
}

/// Concentration radius of a standard d-dimensional Gaussian at confidence
/// 1-beta: sqrt(d + 2 sqrt(d ln(1/beta)) + 2 ln(1/beta)).
inline double one_sample_radius(Eigen::Index d, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("one_sample_radius: beta in (0,1)");
  const double dd = static_cast<double>(d);
  const double lg = std::log(1.0 / beta);
  return std::sqrt(dd + 2.0 * std::sqrt(dd * lg) + 2.0 * lg);
}

/// Mean estimator for an identity-covariance Gaussian given one public
/// sample: recenter by the public sample (which lies within R of the mean
/// with probability 1 - beta/2), clip-and-noise the mean, shift back.
inline Eigen::VectorXd one_sample_mean_estimator(const Eigen::VectorXd& public_sample,
                                                 const Eigen::MatrixXd& priv, double alpha,
                                                 double beta, double rho, RngStream& rng) {
  (void)alpha;
  const Eigen::Index n = priv.rows();
  const Eigen::Index d = priv.cols();
  if (n < 1) throw ArityError("one_sample_mean_estimator: need at least 1 private row");
  if (public_sample.size() != d)
    throw InputError("one_sample_mean_estimator: dimension mismatch");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("one_sample_mean_estimator: beta in (0,1)");

  const double nn = static_cast<double>(n);
  const double r = one_sample_radius(d, beta / 2.0);
  const double lambda = r + one_sample_radius(d, beta / (2.0 * nn));

  const Eigen::MatrixXd shifted =
      clip_rows(priv.rowwise() - public_sample.transpose(), lambda);
  const Eigen::VectorXd emp_mean = shifted.colwise().mean();
  const Eigen::VectorXd noisy =
      gaussian_mechanism(emp_mean, 2.0 * lambda / nn, PrivacyBudget::Zcdp(rho), rng);
  return noisy + public_sample;
}

}  // namespace pubdp

#endif  // PUBDP_LEARNER_HPP
