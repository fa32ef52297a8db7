#ifndef PUBDP_PARTITION_HPP
#define PUBDP_PARTITION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>

#include "pubdp/budget.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/mechanisms.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/supercluster.hpp"

namespace pubdp {

namespace detail {

// Counts of points in the closed ball, the annulus out to outer_factor*r, and
// the exterior beyond it.
struct RegionCounts {
  std::int64_t inner = 0;
  std::int64_t annulus = 0;
  std::int64_t exterior = 0;
};

inline RegionCounts count_regions(const Eigen::MatrixXd& points, const Eigen::VectorXd& c,
                                  double r, double outer_factor) {
  RegionCounts out;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double dist = (points.row(i).transpose() - c).norm();
    if (dist <= r)
      ++out.inner;
    else if (dist <= outer_factor * r)
      ++out.annulus;
    else
      ++out.exterior;
  }
  return out;
}

}  // namespace detail

/// Public terrific-ball query: at least t points inside B(c, r), an empty
/// annulus out to 11r, and at least t points beyond 11r.
inline bool q_pub(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, double r, double t) {
  const auto counts = detail::count_regions(points, c, r, 11.0);
  return static_cast<double>(counts.inner) >= t && counts.annulus == 0 &&
         static_cast<double>(counts.exterior) >= t;
}

/// Private terrific-ball query: noisy counts of the ball, the annulus out to
/// 5r, and the exterior, compared against t, t/320, and t. The budget is
/// split evenly across the three counting calls.
inline bool q_priv(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, double r, double t,
                   const PrivacyBudget& budget, RngStream& rng) {
  const auto counts = detail::count_regions(points, c, r, 5.0);
  const auto slices = split_budget(budget, 3);
  const double inner = pcount(counts.inner, slices[0], rng);
  const double annulus = pcount(counts.annulus, slices[1], rng);
  const double exterior = pcount(counts.exterior, slices[2], rng);
  return inner >= t && annulus < t / 320.0 && exterior >= t;
}

/// Radius scan shared by the two partitioners: radii r_max/2^i for
/// i = 0..floor(log2(r_max/r_min)), centers tried in dataset order, first
/// public hit wins.
///
/// The private variant then asks the private query at (c, 2r, n*w_min/4) and
/// returns the ball (c, 2r) on success, bot on failure; the public variant
/// returns (c, 2r) directly. Returning bot signals "only one component here".
inline std::optional<Ball> dp_low_dim_partitioner(const Eigen::MatrixXd& zp,
                                                  const Eigen::MatrixXd& yp, double r_max,
                                                  double r_min, std::int64_t n, std::int64_t m,
                                                  double w_min, const PrivacyBudget& budget,
                                                  RngStream& rng) {
  if (!(r_min > 0.0)) throw ParameterError("partitioner: r_min must be positive");
  if (!(r_max >= r_min)) throw ParameterError("partitioner: need r_max >= r_min");
  const int steps = static_cast<int>(std::floor(std::log2(r_max / r_min)));
  const double t_pub = static_cast<double>(m) * w_min / 2.0;
  const double t_priv = static_cast<double>(n) * w_min / 4.0;
  for (int i = 0; i <= steps; ++i) {
    const double r = r_max / std::pow(2.0, i);
    for (Eigen::Index j = 0; j < yp.rows(); ++j) {
      const Eigen::VectorXd c = yp.row(j).transpose();
      if (q_pub(yp, c, r, t_pub)) {
        if (q_priv(zp, c, 2.0 * r, t_priv, budget, rng)) return Ball{c, 2.0 * r};
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

/// Public-only partitioner: same scan, no private confirmation.
inline std::optional<Ball> low_dim_partitioner(const Eigen::MatrixXd& yp, double r_max,
                                               double r_min, std::int64_t m, double w_min) {
  if (!(r_min > 0.0)) throw ParameterError("partitioner: r_min must be positive");
  if (!(r_max >= r_min)) throw ParameterError("partitioner: need r_max >= r_min");
  const int steps = static_cast<int>(std::floor(std::log2(r_max / r_min)));
  const double t_pub = static_cast<double>(m) * w_min / 2.0;
  for (int i = 0; i <= steps; ++i) {
    const double r = r_max / std::pow(2.0, i);
    for (Eigen::Index j = 0; j < yp.rows(); ++j) {
      const Eigen::VectorXd c = yp.row(j).transpose();
      if (q_pub(yp, c, r, t_pub)) return Ball{c, 2.0 * r};
    }
  }
  return std::nullopt;
}

}  // namespace pubdp

#endif  // PUBDP_PARTITION_HPP
