#ifndef PUBDP_SUPERCLUSTER_HPP
#define PUBDP_SUPERCLUSTER_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pubdp/errors.hpp"

namespace pubdp {

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;

  [[nodiscard]] bool contains(const Eigen::VectorXd& x) const {
    return (x - center).norm() <= radius;  // closed ball everywhere
  }
};

/// Superclustering on public data: grow a ball around the most isolated
/// public point in shells of the isolation radius r, stopping once a shell
/// stays empty. Under the regularity conditions the returned ball is pure
/// (contains every component it touches entirely) with radius <= (3k+1) r.
inline Ball supercluster(const Eigen::MatrixXd& pub, int k) {
  const Eigen::Index m = pub.rows();
  if (m < 2) throw ArityError("supercluster: need at least 2 public points");
  if (k < 1) throw ParameterError("supercluster: k must be >= 1");

  // r = 16 * max_x min_{y != x} ||x - y||, c = the argmax point.
  double max_min = -1.0;
  Eigen::Index c_idx = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      nn = std::min(nn, (pub.row(i) - pub.row(j)).norm());
    }
    if (nn > max_min) {
      max_min = nn;
      c_idx = i;
    }
  }
  const double r = 16.0 * max_min;
  const Eigen::VectorXd c = pub.row(c_idx).transpose();

  const auto count_within = [&](double radius) {
    Eigen::Index cnt = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      if ((pub.row(i).transpose() - c).norm() <= radius) ++cnt;
    return cnt;
  };

  bool pure = false;
  double R = r;
  for (int i = 1; i <= k; ++i) {
    const Eigen::Index m_i = count_within(R);
    if (count_within(R + r) == m_i) {
      if (pure) {
        return Ball{c, R};
      } else if (count_within(R + 2.0 * r) == m_i) {
        return Ball{c, R + r};
      } else {
        pure = false;
        R += 3.0 * r;
      }
    } else {
      pure = count_within(R + 2.0 * r) == count_within(R + r);
      R += 2.0 * r;
    }
  }
  return Ball{c, R};
}

}  // namespace pubdp

#endif  // PUBDP_SUPERCLUSTER_HPP
