#ifndef PUBDP_MECHANISMS_HPP
#define PUBDP_MECHANISMS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "pubdp/budget.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/rng.hpp"

namespace pubdp {

/// Gaussian-mechanism noise level for a given L2 sensitivity:
///   zCDP:   sigma = delta2 / sqrt(2*rho)
///   approx: sigma = delta2 * sqrt(2*ln(2/delta)) / eps
inline double gaussian_sigma(double l2_sensitivity, const PrivacyBudget& budget) {
  if (!(l2_sensitivity > 0.0) || !std::isfinite(l2_sensitivity))
    throw ParameterError("gaussian_mechanism: sensitivity must be positive and finite");
  if (budget.kind == BudgetKind::kZCDP) {
    if (!(budget.rho > 0.0)) throw ParameterError("gaussian_mechanism: rho must be > 0");
    return l2_sensitivity / std::sqrt(2.0 * budget.rho);
  }
  if (!(budget.eps > 0.0)) throw ParameterError("gaussian_mechanism: eps must be > 0");
  if (!(budget.delta > 0.0)) throw ParameterError("gaussian_mechanism: delta must be > 0");
  return l2_sensitivity * std::sqrt(2.0 * std::log(2.0 / budget.delta)) / budget.eps;
}

/// value + i.i.d. Laplace(l1_sensitivity/eps) per coordinate.
inline Eigen::VectorXd laplace_mechanism(const Eigen::VectorXd& value, double l1_sensitivity,
                                         double eps, RngStream& rng) {
  if (!(l1_sensitivity > 0.0) || !std::isfinite(l1_sensitivity))
    throw ParameterError("laplace_mechanism: sensitivity must be positive and finite");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ParameterError("laplace_mechanism: eps must be positive and finite");
  if (!value.allFinite()) throw InputError("laplace_mechanism: non-finite input coordinate");
  const double b = l1_sensitivity / eps;
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.noise_laplace(b);
  return out;
}

/// Gaussian mechanism on a vector.
inline Eigen::VectorXd gaussian_mechanism(const Eigen::VectorXd& value, double l2_sensitivity,
                                          const PrivacyBudget& budget, RngStream& rng) {
  if (!value.allFinite()) throw InputError("gaussian_mechanism: non-finite input coordinate");
  const double sigma = gaussian_sigma(l2_sensitivity, budget);
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.noise_normal(sigma);
  return out;
}

/// Gaussian mechanism on a symmetric matrix: noise is drawn on the upper
/// triangle (including the diagonal) and mirrored, so symmetric input yields
/// exactly symmetric output.
inline Eigen::MatrixXd gaussian_mechanism_symmetric(const Eigen::MatrixXd& value,
                                                    double l2_sensitivity,
                                                    const PrivacyBudget& budget, RngStream& rng) {
  if (!value.allFinite()) throw InputError("gaussian_mechanism: non-finite input entry");
  if (value.rows() != value.cols() ||
      (value - value.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw InputError("gaussian_mechanism: matrix input must be symmetric within 1e-9");
  const double sigma = gaussian_sigma(l2_sensitivity, budget);
  Eigen::MatrixXd out = value;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = i; j < out.cols(); ++j) {
      const double e = rng.noise_normal(sigma);
      out(i, j) += e;
      if (j != i) out(j, i) += e;
    }
  }
  return out;
}

/// Noisy count: n_items + Laplace(1/eps). The budget is interpreted as pure
/// DP (zCDP rho converts via eps = sqrt(2*rho)). Accuracy: the result is
/// within ln(1/beta)/eps of n_items with probability >= 1-beta.
inline double pcount(std::int64_t n_items, const PrivacyBudget& budget, RngStream& rng) {
  if (n_items < 0) throw ParameterError("pcount: n_items must be >= 0");
  const double eps = budget.as_pure_eps();
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("pcount: budget must be positive");
  return static_cast<double>(n_items) + rng.noise_laplace(1.0 / eps);
}

/// Accuracy radius of pcount at confidence 1-beta.
inline double pcount_accuracy(double beta, double eps) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("pcount_accuracy: beta in (0,1)");
  if (!(eps > 0.0)) throw ParameterError("pcount_accuracy: eps > 0");
  return std::log(1.0 / beta) / eps;
}

}  // namespace pubdp

#endif  // PUBDP_MECHANISMS_HPP
