#ifndef PUBDP_CLUSTERING_HPP
#define PUBDP_CLUSTERING_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "pubdp/budget.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"
#include "pubdp/learner.hpp"
#include "pubdp/mechanisms.hpp"
#include "pubdp/partition.hpp"
#include "pubdp/pca.hpp"
#include "pubdp/precondition.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/supercluster.hpp"

namespace pubdp {

/// Disjoint index sets over the private dataset.
struct Partition {
  std::vector<std::vector<int>> clusters;

  void validate(Eigen::Index n) const {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const auto& c : clusters) {
      for (const int idx : c) {
        if (idx < 0 || idx >= n) throw InputError("Partition: index out of range");
        if (seen[static_cast<std::size_t>(idx)]) throw InputError("Partition: clusters overlap");
        seen[static_cast<std::size_t>(idx)] = 1;
      }
    }
  }
};

/// One banked cluster: private indices, the matching public indices, and the
/// ball it was isolated in (used downstream for recentering and clip radii).
struct ClusterBank {
  std::vector<int> private_indices;
  std::vector<int> public_indices;
  Ball ball;
};

struct ClusteringResult {
  std::vector<ClusterBank> clusters;

  [[nodiscard]] Partition partition() const {
    Partition p;
    p.clusters.reserve(clusters.size());
    for (const auto& c : clusters) p.clusters.push_back(c.private_indices);
    return p;
  }
};

/// The iteration cap was reached before k clusters were banked; carries the
/// partial result.
class IncompleteClusteringError : public std::runtime_error {
 public:
  IncompleteClusteringError(std::string what, ClusteringResult partial)
      : std::runtime_error(std::move(what)), partial_(std::move(partial)) {}

  [[nodiscard]] const ClusteringResult& partial() const { return partial_; }

 private:
  ClusteringResult partial_;
};

/// Hook into a pipeline-level accountant: this unit's local budget is
/// num/den of the accountant's declared budget, so a local a/b slice charges
/// (num*a)/(den*b) globally. A null accountant just slices the local budget.
struct BudgetShare {
  BudgetAccountant* acct = nullptr;
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  PrivacyBudget take(const PrivacyBudget& local, std::uint64_t a, std::uint64_t b) const {
    if (acct) return acct->charge(num * a, den * b);
    return local.fraction(a, b);
  }
};

namespace detail {

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& src, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
  return out;
}

// Split indices by closed-ball membership of the corresponding rows of
// `points` (which must be aligned with idx).
inline std::pair<std::vector<int>, std::vector<int>> split_by_ball(
    const std::vector<int>& idx, const Eigen::MatrixXd& points, const Ball& ball) {
  std::vector<int> in, out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (ball.contains(points.row(static_cast<Eigen::Index>(i)).transpose()))
      in.push_back(idx[i]);
    else
      out.push_back(idx[i]);
  }
  return {std::move(in), std::move(out)};
}

inline Ball enclosing_ball(const Eigen::MatrixXd& rows) {
  Ball b;
  b.center = rows.colwise().mean().transpose();
  b.radius = 1e-9;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    b.radius = std::max(b.radius, (rows.row(i).transpose() - b.center).norm());
  return b;
}

}  // namespace detail

/// Queue-driven hard-regime clustering: repeatedly pop matched public/private
/// subsets, isolate a pure supercluster ball on the public side, split both
/// datasets by it, project the ball's contents to the top-k private-PCA
/// subspace, and either bank the contents as one cluster (partitioner says
/// "single component") or split them further by the returned terrific ball.
/// Budget: `budget` is the clustering share, pre-split over 2k iterations
/// with two private touches (PCA + private query) per iteration.
inline ClusteringResult dp_hard_clustering(const Eigen::MatrixXd& pub,
                                           const Eigen::MatrixXd& priv, int k, double w_min,
                                           double beta, const PrivacyBudget& budget,
                                           RngStream& rng, const BudgetShare& share = {}) {
  if (k < 1) throw ParameterError("dp_hard_clustering: k must be >= 1");
  if (!(w_min > 0.0 && w_min <= 1.0)) throw ParameterError("dp_hard_clustering: w_min in (0,1]");
  (void)beta;
  const Eigen::Index n = priv.rows();
  const Eigen::Index m = pub.rows();
  const Eigen::Index d = priv.cols();
  const std::uint64_t kk = static_cast<std::uint64_t>(k);

  std::deque<std::vector<int>> q_pub_sets, q_priv_sets;
  {
    std::vector<int> all_pub(static_cast<std::size_t>(m)), all_priv(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < m; ++i) all_pub[static_cast<std::size_t>(i)] = static_cast<int>(i);
    for (Eigen::Index i = 0; i < n; ++i) all_priv[static_cast<std::size_t>(i)] = static_cast<int>(i);
    q_pub_sets.push_back(std::move(all_pub));
    q_priv_sets.push_back(std::move(all_priv));
  }

  ClusteringResult result;
  int count = 0;
  for (int it = 1; it <= 2 * k && count < k && !q_priv_sets.empty(); ++it) {
    std::vector<int> y_idx = std::move(q_pub_sets.front());
    std::vector<int> z_idx = std::move(q_priv_sets.front());
    q_pub_sets.pop_front();
    q_priv_sets.pop_front();

    if (y_idx.size() < 2) {
      // Too little public signal left to run the superclusterer; bank what
      // remains as one cluster.
      if (!z_idx.empty()) {
        ClusterBank bank;
        bank.ball = detail::enclosing_ball(detail::gather_rows(priv, z_idx));
        bank.private_indices = std::move(z_idx);
        bank.public_indices = std::move(y_idx);
        result.clusters.push_back(std::move(bank));
        ++count;
      }
      continue;
    }

    const Eigen::MatrixXd y_rows = detail::gather_rows(pub, y_idx);
    const Ball sc = supercluster(y_rows, k);

    auto [yi, y_rest] = detail::split_by_ball(y_idx, y_rows, sc);
    const Eigen::MatrixXd z_rows = detail::gather_rows(priv, z_idx);
    auto [zi, z_rest] = detail::split_by_ball(z_idx, z_rows, sc);
    if (!z_rest.empty()) {
      q_pub_sets.push_back(std::move(y_rest));
      q_priv_sets.push_back(std::move(z_rest));
    }

    // Two private touches per iteration, each at 1/(4k) of the clustering
    // share. Charged even when a branch short-circuits (conservative).
    const PrivacyBudget pca_budget = share.take(budget, 1, 4 * kk);
    const PrivacyBudget query_budget = share.take(budget, 1, 4 * kk);

    if (zi.empty()) continue;  // public-only ball carries no private mass

    const Eigen::MatrixXd zi_centered =
        detail::gather_rows(priv, zi).rowwise() - sc.center.transpose();
    PcaConfig cfg;
    cfg.ell = static_cast<int>(std::min<Eigen::Index>(k, d));
    cfg.radius = sc.radius;
    const Eigen::MatrixXd proj = private_pca(zi_centered, cfg, pca_budget, rng);

    const Eigen::MatrixXd yp =
        (detail::gather_rows(pub, yi).rowwise() - sc.center.transpose()) * proj;
    const Eigen::MatrixXd zp = zi_centered * proj;

    const std::optional<Ball> b = dp_low_dim_partitioner(
        zp, yp, sc.radius, sc.radius / std::sqrt(static_cast<double>(d)), n, m, w_min,
        query_budget, rng);

    if (!b) {
      ClusterBank bank;
      bank.private_indices = std::move(zi);
      bank.public_indices = std::move(yi);
      bank.ball = sc;
      result.clusters.push_back(std::move(bank));
      ++count;
    } else {
      auto [s_idx, s_rest] = detail::split_by_ball(yi, yp, *b);
      auto [t_idx, t_rest] = detail::split_by_ball(zi, zp, *b);
      if (!t_idx.empty()) {
        q_pub_sets.push_back(std::move(s_idx));
        q_priv_sets.push_back(std::move(t_idx));
      }
      if (!t_rest.empty()) {
        q_pub_sets.push_back(std::move(s_rest));
        q_priv_sets.push_back(std::move(t_rest));
      }
    }
  }

  if (count < k)
    throw IncompleteClusteringError("dp_hard_clustering: iteration cap reached with " +
                                        std::to_string(count) + " of " + std::to_string(k) +
                                        " clusters",
                                    std::move(result));
  return result;
}

/// Easy-regime clustering: enough public data for exact PCA, so no private
/// access at all — the output is pure post-processing of public information
/// plus the fixed queue logic, and carries no privacy cost.
inline ClusteringResult easy_clustering(const Eigen::MatrixXd& pub, const Eigen::MatrixXd& priv,
                                        int k, double w_min, double beta) {
  if (k < 1) throw ParameterError("easy_clustering: k must be >= 1");
  if (!(w_min > 0.0 && w_min <= 1.0)) throw ParameterError("easy_clustering: w_min in (0,1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("easy_clustering: beta in (0,1)");
  const Eigen::Index n = priv.rows();
  const Eigen::Index m = pub.rows();
  const Eigen::Index d = priv.cols();

  std::deque<std::vector<int>> q_pub_sets, q_priv_sets;
  {
    std::vector<int> all_pub(static_cast<std::size_t>(m)), all_priv(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < m; ++i) all_pub[static_cast<std::size_t>(i)] = static_cast<int>(i);
    for (Eigen::Index i = 0; i < n; ++i) all_priv[static_cast<std::size_t>(i)] = static_cast<int>(i);
    q_pub_sets.push_back(std::move(all_pub));
    q_priv_sets.push_back(std::move(all_priv));
  }

  ClusteringResult result;
  int count = 0;
  for (int it = 1; it <= 2 * k && count < k && !q_priv_sets.empty(); ++it) {
    std::vector<int> y_idx = std::move(q_pub_sets.front());
    std::vector<int> z_idx = std::move(q_priv_sets.front());
    q_pub_sets.pop_front();
    q_priv_sets.pop_front();

    if (y_idx.size() < 2) {
      if (!z_idx.empty()) {
        ClusterBank bank;
        bank.ball = detail::enclosing_ball(detail::gather_rows(priv, z_idx));
        bank.private_indices = std::move(z_idx);
        bank.public_indices = std::move(y_idx);
        result.clusters.push_back(std::move(bank));
        ++count;
      }
      continue;
    }

    const Eigen::MatrixXd y_rows = detail::gather_rows(pub, y_idx);
    const Eigen::MatrixXd z_rows = detail::gather_rows(priv, z_idx);

    // Exact top-k eigenprojector of the public moment matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y_rows.transpose() * y_rows);
    const Eigen::Index ell = std::min<Eigen::Index>(k, d);
    const Eigen::MatrixXd top = es.eigenvectors().rightCols(ell);
    const Eigen::MatrixXd proj = top * top.transpose();

    const Eigen::MatrixXd yp = y_rows * proj;
    const Eigen::MatrixXd zp = z_rows * proj;

    double max_dist = 0.0, min_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < y_rows.rows(); ++a) {
      for (Eigen::Index b2 = a + 1; b2 < y_rows.rows(); ++b2) {
        const double dist = (y_rows.row(a) - y_rows.row(b2)).norm();
        max_dist = std::max(max_dist, dist);
        if (dist > 0.0) min_dist = std::min(min_dist, dist);
      }
    }
    if (!std::isfinite(min_dist)) min_dist = std::max(max_dist, 1e-9);
    const double r_max = 4.0 * std::max(max_dist, 1e-9);
    const double factor = std::sqrt(2.0 * k *
                                    std::log(2.0 * static_cast<double>(n + m) * k / beta)) /
                          (4.0 * std::sqrt(static_cast<double>(d)));
    const double r_min = std::min(std::max(factor * min_dist, 1e-12 * r_max), r_max);

    const std::optional<Ball> b = low_dim_partitioner(yp, r_max, r_min, m, w_min);

    if (!b) {
      ClusterBank bank;
      bank.ball = detail::enclosing_ball(y_rows);
      bank.private_indices = std::move(z_idx);
      bank.public_indices = std::move(y_idx);
      result.clusters.push_back(std::move(bank));
      ++count;
    } else {
      auto [s_idx, s_rest] = detail::split_by_ball(y_idx, yp, *b);
      auto [t_idx, t_rest] = detail::split_by_ball(z_idx, zp, *b);
      if (!t_idx.empty()) {
        q_pub_sets.push_back(std::move(s_idx));
        q_priv_sets.push_back(std::move(t_idx));
      }
      if (!t_rest.empty()) {
        q_pub_sets.push_back(std::move(s_rest));
        q_priv_sets.push_back(std::move(t_rest));
      }
    }
  }

  if (count < k)
    throw IncompleteClusteringError("easy_clustering: iteration cap reached with " +
                                        std::to_string(count) + " of " + std::to_string(k) +
                                        " clusters",
                                    std::move(result));
  return result;
}

enum class EstimateMode { kHard, kEasy };

/// Estimated mixture plus per-component success flags (a component can fail
/// — empty cluster, too few public rows — without aborting the others).
struct MixtureEstimate {
  MixtureParams params;
  std::vector<bool> component_ok;
};

/// Per-cluster parameter estimation plus the noisy-count weight rule
/// w_i = max{PCount(|C_i|)/n, alpha/2k}, renormalized. Budget: learners get
/// budget/2 (each cluster the full half — parallel composition over disjoint
/// clusters), the weight counts get the other half.
inline MixtureEstimate estimate_mixture(const Eigen::MatrixXd& priv, const Eigen::MatrixXd& pub,
                                        const ClusteringResult& clusters, EstimateMode mode,
                                        double alpha, double beta, const PrivacyBudget& budget,
                                        RngStream& rng, const BudgetShare& share = {}) {
  const std::size_t k = clusters.clusters.size();
  if (k == 0) throw ParameterError("estimate_mixture: empty clustering");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("estimate_mixture: alpha in (0,1)");
  const double nn = static_cast<double>(priv.rows());
  const Eigen::Index d = priv.cols();

  const PrivacyBudget learner_budget = share.take(budget, 1, 2);
  const PrivacyBudget weight_budget = share.take(budget, 1, 2);

  MixtureEstimate out;
  out.params.components.resize(k);
  out.component_ok.assign(k, false);

  double weight_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const ClusterBank& bank = clusters.clusters[i];
    const Eigen::MatrixXd rows = detail::gather_rows(priv, bank.private_indices);
    GaussianParams est;
    bool ok = rows.rows() >= 2;

    if (ok) {
      try {
        if (mode == EstimateMode::kHard) {
          const Eigen::MatrixXd pub_rows = detail::gather_rows(pub, bank.public_indices);
          // Clip radii from the public cluster's geometry (free of privacy
          // cost). On regular data private radii are at most sqrt(2) times
          // public radii, so 3x leaves headroom and clipping stays inactive.
          double prad = bank.ball.radius;
          Eigen::VectorXd pmean = bank.ball.center;
          if (pub_rows.rows() > 0) {
            pmean = pub_rows.colwise().mean().transpose();
            prad = 1e-9;
            for (Eigen::Index r = 0; r < pub_rows.rows(); ++r)
              prad = std::max(prad, (pub_rows.row(r).transpose() - pmean).norm());
          }
          const double mean_clip =
              std::min(bank.ball.radius + 1e-9,
                       (pmean - bank.ball.center).norm() + 3.0 * prad);
          const double cov_clip = std::min(bank.ball.radius + 1e-9, 2.0 * prad);
          LearnerOptions opts;
          opts.mean_clip = mean_clip;
          opts.cov_clip = cov_clip;
          RangeBounds rb{mean_clip, std::max(1.0, mean_clip * mean_clip)};
          const Eigen::MatrixXd centered = rows.rowwise() - bank.ball.center.transpose();
          est = bounded_gaussian_learner(centered, rb, alpha, beta / static_cast<double>(k),
                                         learner_budget, rng, opts);
          est.mean += bank.ball.center;
        } else {
          const Eigen::MatrixXd pub_rows = detail::gather_rows(pub, bank.public_indices);
          if (pub_rows.rows() < d + 1) throw ArityError("too few public rows in cluster");
          est = pub_dp_gaussian_estimator(pub_rows, rows, alpha,
                                          beta / static_cast<double>(k), learner_budget, 0.0,
                                          rng);
        }
      } catch (const std::exception&) {
        ok = false;
      }
    }

    if (!ok) {
      // Per-component failure: keep a placeholder so the other components
      // still come out; callers see the flag.
      est.mean = bank.ball.center.size() == d ? bank.ball.center : Eigen::VectorXd::Zero(d);
      est.cov = Eigen::MatrixXd::Identity(d, d);
    }

    const double counted =
        pcount(static_cast<std::int64_t>(bank.private_indices.size()), weight_budget, rng);
    const double w = std::max(counted / nn, alpha / (2.0 * static_cast<double>(k)));

    out.params.components[i].params = std::move(est);
    out.params.components[i].weight = w;
    out.component_ok[i] = ok;
    weight_sum += w;
  }

  for (auto& c : out.params.components) c.weight /= weight_sum;
  return out;
}

/// End-to-end hard-regime pipeline with the canonical budget split:
/// clustering half (2k iterations x two touches), learners quarter,
/// weights quarter — all recorded in the accountant when one is supplied.
inline MixtureEstimate dp_hard_pipeline(const Eigen::MatrixXd& pub, const Eigen::MatrixXd& priv,
                                        int k, double w_min, double alpha, double beta,
                                        const PrivacyBudget& budget, RngStream& rng,
                                        BudgetAccountant* acct = nullptr,
                                        ClusteringResult* clusters_out = nullptr) {
  const ClusteringResult clusters =
      dp_hard_clustering(pub, priv, k, w_min, beta, budget.fraction(1, 2), rng,
                         BudgetShare{acct, 1, 2});
  if (clusters_out) *clusters_out = clusters;
  return estimate_mixture(priv, pub, clusters, EstimateMode::kHard, alpha, beta,
                          budget.fraction(1, 2), rng, BudgetShare{acct, 1, 2});
}

/// End-to-end easy-regime pipeline: clustering is public-only (no budget),
/// the full budget goes to estimation.
inline MixtureEstimate easy_pipeline(const Eigen::MatrixXd& pub, const Eigen::MatrixXd& priv,
                                     int k, double w_min, double alpha, double beta,
                                     const PrivacyBudget& budget, RngStream& rng,
                                     BudgetAccountant* acct = nullptr,
                                     ClusteringResult* clusters_out = nullptr) {
  const ClusteringResult clusters = easy_clustering(pub, priv, k, w_min, beta);
  if (clusters_out) *clusters_out = clusters;
  return estimate_mixture(priv, pub, clusters, EstimateMode::kEasy, alpha, beta, budget, rng,
                          BudgetShare{acct, 1, 1});
}

}  // namespace pubdp

#endif  // PUBDP_CLUSTERING_HPP
