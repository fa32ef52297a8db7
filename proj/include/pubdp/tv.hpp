#ifndef PUBDP_TV_HPP
#define PUBDP_TV_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"
#include "pubdp/rng.hpp"

namespace pubdp {

struct TvEstimate {
  double estimate = 0.0;
  double std_error = 0.0;   // 0 for the exact 1-D form
  double error_bound = 0.0; // 3 standard errors
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Exact total variation distance between two univariate normals via the
/// density crossing points and the standard-normal CDF.
inline double tv_distance_1d(double mu1, double var1, double mu2, double var2) {
  if (!(var1 > 0.0 && var2 > 0.0)) throw ParameterError("tv_distance_1d: variances must be > 0");
  const double s1 = std::sqrt(var1), s2 = std::sqrt(var2);
  if (mu1 == mu2 && var1 == var2) return 0.0;
  if (var1 == var2) {
    // Equal variances: densities cross once, at the midpoint.
    return 2.0 * normal_cdf(std::abs(mu2 - mu1) / (2.0 * s1)) - 1.0;
  }
  // log p1 - log p2 is a quadratic with exactly two real roots when the
  // variances differ.
  const double a = 0.5 / var2 - 0.5 / var1;
  const double b = mu1 / var1 - mu2 / var2;
  const double c =
      0.5 * (mu2 * mu2 / var2 - mu1 * mu1 / var1) + std::log(s2 / s1);
  const double disc = b * b - 4.0 * a * c;
  const double sq = std::sqrt(std::max(disc, 0.0));
  double x1 = (-b - sq) / (2.0 * a);
  double x2 = (-b + sq) / (2.0 * a);
  if (x1 > x2) std::swap(x1, x2);
  const double p_mass = normal_cdf((x2 - mu1) / s1) - normal_cdf((x1 - mu1) / s1);
  const double q_mass = normal_cdf((x2 - mu2) / s2) - normal_cdf((x1 - mu2) / s2);
  return std::abs(p_mass - q_mass);
}

namespace detail {

// Log-density of N(mean, cov) with factors precomputed.
struct GaussLogDensity {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd mean;
  double log_norm = 0.0;

  explicit GaussLogDensity(const GaussianParams& p) : llt(p.cov), mean(p.mean) {
    if (llt.info() != Eigen::Success)
      throw InputError("tv_distance: covariance not positive definite");
    double log_det = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    log_norm = -0.5 * (static_cast<double>(p.dim()) * std::log(2.0 * M_PI) + log_det);
  }

  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
    return log_norm - 0.5 * z.squaredNorm();
  }
};

}  // namespace detail

/// Total variation distance between two multivariate normals. d = 1 uses the
/// exact crossing-point form (std_error 0); d > 1 uses the likelihood-ratio
/// Monte-Carlo estimator (1/2) E_p |1 - q(x)/p(x)| with a reported standard
/// error, error_bound = 3 SE.
inline TvEstimate tv_distance(const GaussianParams& p, const GaussianParams& q, RngStream& rng,
                              int n_samples = 20000) {
  if (p.dim() != q.dim()) throw InputError("tv_distance: dimension mismatch");
  if (p.dim() == 1) {
    const double est = tv_distance_1d(p.mean[0], p.cov(0, 0), q.mean[0], q.cov(0, 0));
    return TvEstimate{est, 0.0, 0.0};
  }
  if (n_samples < 2) throw ParameterError("tv_distance: need at least 2 samples");

  const detail::GaussLogDensity logp(p), logq(q);
  const Eigen::MatrixXd l = logp.llt.matrixL();
  const Eigen::Index d = p.dim();

  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd z(d), x(d);
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
    x = p.mean + l * z;
    const double w = std::abs(1.0 - std::exp(logq(x) - logp(x)));
    sum += w;
    sumsq += w * w;
  }
  const double nn = static_cast<double>(n_samples);
  const double mean = sum / nn;
  const double var = std::max(sumsq / nn - mean * mean, 0.0);
  const double se = 0.5 * std::sqrt(var / nn);
  return TvEstimate{0.5 * mean, se, 3.0 * se};
}

/// Closed-form parameter bounds implied by a TV distance of gamma between
/// two Gaussians: squared-mean-distance/max-variance bound, condition-number
/// bound, and the two-sided Loewner sandwich constants.
struct TvParamBounds {
  double mean_bound = 0.0;  // (mu2-mu1)^2 / sigma_max^2 <= 8*gamma/(1-gamma)
  double cond_bound = 0.0;  // sigma_max/sigma_min <= 2/(1-gamma)^2
  double loewner_lo = 0.0;  // (1-gamma)^4/4
  double loewner_hi = 0.0;  // 4/(1-gamma)^4
};

inline TvParamBounds tv_param_bounds(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("tv_param_bounds: gamma in [0,1)");
  const double om = 1.0 - gamma;
  return TvParamBounds{8.0 * gamma / om, 2.0 / (om * om), std::pow(om, 4.0) / 4.0,
                       4.0 / std::pow(om, 4.0)};
}

}  // namespace pubdp

#endif  // PUBDP_TV_HPP
