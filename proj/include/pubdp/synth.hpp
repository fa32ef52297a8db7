#ifndef PUBDP_SYNTH_HPP
#define PUBDP_SYNTH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pubdp/errors.hpp"
#include "pubdp/gaussian.hpp"
#include "pubdp/linalg.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/tv.hpp"

namespace pubdp {

/// n i.i.d. draws via the symmetric square root: x = mu + Sigma^{1/2} z.
inline LabeledDataset sample_gaussian(const GaussianParams& params, Eigen::Index n,
                                      RngStream& rng) {
  params.validate();
  const Eigen::Index d = params.dim();
  const Eigen::MatrixXd root = sym_sqrt(params.cov);
  LabeledDataset out;
  out.rows.resize(n, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    out.rows.row(i) = (params.mean + root * z).transpose();
  }
  out.labels.assign(static_cast<std::size_t>(n), 0);
  return out;
}

namespace detail {

// Random rotation via QR of a Gaussian matrix (sign-fixed for determinism).
inline Eigen::MatrixXd random_rotation(Eigen::Index d, RngStream& rng) {
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace detail

/// Build a k-component mixture whose pairwise mean distances satisfy the
/// separation requirement ||mu_i - mu_j|| >= (s + 10/sqrt(w_i) + 10/sqrt(w_j))
/// * max(sigma_i, sigma_j), where sigma_i^2 is the top covariance eigenvalue
/// and s = separation_multiplier. Covariances are well-conditioned (condition
/// number <= spread). The pairwise requirement is verified exhaustively
/// before returning.
inline MixtureParams make_separated_mixture(Eigen::Index d, int k, double separation_multiplier,
                                            double w_min, double spread, RngStream& rng) {
  if (d < 1 || k < 1) throw ParameterError("make_separated_mixture: d, k must be >= 1");
  if (!(w_min > 0.0) || k * w_min > 1.0 + 1e-12)
    throw ParameterError("make_separated_mixture: need k * w_min <= 1");
  if (!(spread >= 1.0)) throw ParameterError("make_separated_mixture: spread must be >= 1");
  if (k > d) throw ParameterError("make_separated_mixture: need k <= d for mean placement");

  MixtureParams mix;
  mix.components.resize(static_cast<std::size_t>(k));

  // Weights: w_min plus a random share of the slack.
  double slack = 1.0 - k * w_min;
  std::vector<double> shares(static_cast<std::size_t>(k));
  double share_total = 0.0;
  for (auto& s : shares) {
    s = rng.uniform() + 0.05;
    share_total += s;
  }
  for (int i = 0; i < k; ++i)
    mix.components[static_cast<std::size_t>(i)].weight =
        w_min + slack * shares[static_cast<std::size_t>(i)] / share_total;

  // Covariances: random eigenbasis, eigenvalues uniform in [1, spread].
  for (int i = 0; i < k; ++i) {
    const Eigen::MatrixXd q = detail::random_rotation(d, rng);
    Eigen::VectorXd ev(d);
    for (Eigen::Index j = 0; j < d; ++j) ev[j] = 1.0 + (spread - 1.0) * rng.uniform();
    mix.components[static_cast<std::size_t>(i)].params.cov =
        q * ev.asDiagonal() * q.transpose();
  }

  // Means: scaled orthonormal directions (rotated), spaced to meet the
  // worst pairwise requirement with 10% headroom.
  double req = 0.0;
  for (int i = 0; i < k; ++i) {
    const double si = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                    mix.components[static_cast<std::size_t>(i)].params.cov)
                                    .eigenvalues()
                                    .maxCoeff());
    for (int j = 0; j < i; ++j) {
      const double sj = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                      mix.components[static_cast<std::size_t>(j)].params.cov)
                                      .eigenvalues()
                                      .maxCoeff());
      const double wi = mix.components[static_cast<std::size_t>(i)].weight;
      const double wj = mix.components[static_cast<std::size_t>(j)].weight;
      req = std::max(req, (separation_multiplier + 10.0 / std::sqrt(wi) +
                           10.0 / std::sqrt(wj)) *
                              std::max(si, sj));
    }
  }
  const double scale = 1.1 * req / std::sqrt(2.0);  // orthogonal axes are sqrt(2)*scale apart
  const Eigen::MatrixXd basis = detail::random_rotation(d, rng);
  Eigen::VectorXd common_shift(d);
  for (Eigen::Index j = 0; j < d; ++j) common_shift[j] = scale * 0.1 * rng.normal();
  for (int i = 0; i < k; ++i)
    mix.components[static_cast<std::size_t>(i)].params.mean =
        scale * basis.col(i) + common_shift;

  // Exhaustive verification of the pairwise separation requirement.
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) {
      const auto& ci = mix.components[static_cast<std::size_t>(i)];
      const auto& cj = mix.components[static_cast<std::size_t>(j)];
      const double si = std::sqrt(
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ci.params.cov).eigenvalues().maxCoeff());
      const double sj = std::sqrt(
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cj.params.cov).eigenvalues().maxCoeff());
      const double need = (separation_multiplier + 10.0 / std::sqrt(ci.weight) +
                           10.0 / std::sqrt(cj.weight)) *
                          std::max(si, sj);
      if ((ci.params.mean - cj.params.mean).norm() < need)
        throw InputError("make_separated_mixture: construction failed separation check");
    }
  }
  mix.validate();
  return mix;
}

/// Multinomial component choice by weight, then a Gaussian draw; hidden
/// labels recorded for the test oracles.
inline LabeledDataset sample_mixture(const MixtureParams& params, Eigen::Index n,
                                     RngStream& rng) {
  params.validate();
  const Eigen::Index d = params.dim();
  const std::size_t k = params.k();
  std::vector<Eigen::MatrixXd> roots(k);
  for (std::size_t i = 0; i < k; ++i) roots[i] = sym_sqrt(params.components[i].params.cov);

  LabeledDataset out;
  out.rows.resize(n, d);
  out.labels.assign(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = k - 1;
    for (std::size_t c = 0; c < k; ++c) {
      acc += params.components[c].weight;
      if (u < acc) {
        pick = c;
        break;
      }
    }
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    out.rows.row(i) =
        (params.components[pick].params.mean + roots[pick] * z).transpose();
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(pick);
  }
  return out;
}

/// Construct a Gaussian at exact total-variation distance gamma from `base`
/// by scaling one covariance eigendirection and shifting the mean along it.
/// Both parameter sets share the eigenbasis, so the TV distance reduces to
/// the exact 1-D form along the modified direction; a pair of binary
/// searches hits the target to ~1e-12.
inline GaussianParams make_gamma_far_params(const GaussianParams& base, double gamma,
                                            RngStream& rng) {
  (void)rng;  // construction is deterministic given base
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("make_gamma_far_params: gamma in (0,1)");
  base.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(base.cov);
  const Eigen::Index top = base.dim() - 1;
  const Eigen::VectorXd v = es.eigenvectors().col(top);
  const double lambda = es.eigenvalues()[top];

  // Half the TV budget from a variance scale, half from a mean shift.
  double lo = 1.0, hi = 64.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tv_distance_1d(0.0, 1.0, 0.0, mid * mid) < gamma / 2.0 ? lo : hi) = mid;
  }
  const double vscale = 0.5 * (lo + hi);
  double tlo = 0.0, thi = 64.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (tlo + thi);
    (tv_distance_1d(0.0, 1.0, mid, vscale * vscale) < gamma ? tlo : thi) = mid;
  }
  const double t = 0.5 * (tlo + thi);

  GaussianParams far = base;
  far.cov += (vscale * vscale - 1.0) * lambda * (v * v.transpose());
  far.mean += t * std::sqrt(lambda) * v;
  return far;
}

/// Per-condition outcome of the regularity check; margin is the smallest
/// slack of the condition's inequalities (negative = violated).
struct ConditionResult {
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
};

struct RegularityReport {
  ConditionResult cond1_frequency;
  ConditionResult cond2_mean_dist;
  ConditionResult cond3_point_dist;
  ConditionResult cond4_inter_dist;
  ConditionResult cond5_mean_dist_low;
  ConditionResult cond6_point_dist_low;
  ConditionResult assumption;  // covariances neither flat nor degenerate

  [[nodiscard]] bool all_pass() const {
    return cond1_frequency.pass && cond2_mean_dist.pass && cond3_point_dist.pass &&
           cond4_inter_dist.pass && cond5_mean_dist_low.pass && cond6_point_dist_low.pass &&
           assumption.pass;
  }
};

namespace detail {

inline void tighten(ConditionResult& c, double slack) {
  c.margin = std::min(c.margin, slack);
  if (slack < 0.0) c.pass = false;
}

}  // namespace detail

/// Evaluate the deterministic regularity conditions of a labeled sample
/// against its generating mixture. n_total is the total number of points the
/// log terms are sized for (public + private across the whole experiment).
inline RegularityReport check_regularity(const LabeledDataset& data, const MixtureParams& params,
                                         double beta, Eigen::Index n_total) {
  if (!data.has_labels()) throw ParameterError("check_regularity: labels required");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("check_regularity: beta in (0,1)");
  params.validate();
  const Eigen::Index n = data.rows.rows();
  const std::size_t k = params.k();
  const double nn = static_cast<double>(n);
  const double big_n = static_cast<double>(n_total > 0 ? n_total : n);

  RegularityReport rep;

  std::vector<std::vector<Eigen::Index>> by_comp(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int lbl = data.labels[static_cast<std::size_t>(i)];
    if (lbl < 0 || static_cast<std::size_t>(lbl) >= k)
      throw InputError("check_regularity: label out of range");
    by_comp[static_cast<std::size_t>(lbl)].push_back(i);
  }

  std::vector<double> traces(k), sigmas(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& cov = params.components[c].params.cov;
    traces[c] = cov.trace();
    sigmas[c] = std::sqrt(
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().maxCoeff());
  }

  // Condition 1: per-component counts within [n w/2, 3 n w/2].
  for (std::size_t c = 0; c < k; ++c) {
    const double cnt = static_cast<double>(by_comp[c].size());
    const double w = params.components[c].weight;
    detail::tighten(rep.cond1_frequency, cnt - nn * w / 2.0);
    detail::tighten(rep.cond1_frequency, 3.0 * nn * w / 2.0 - cnt);
  }

  const Eigen::Index ell = data.rows.cols();
  const double low_dim_factor =
      std::sqrt(2.0 * static_cast<double>(ell) *
                std::log(2.0 * big_n * static_cast<double>(ell) / beta));

  // Conditions 2 and 5: distance of each point from its component mean.
  for (std::size_t c = 0; c < k; ++c) {
    const auto& mu = params.components[c].params.mean;
    for (const Eigen::Index i : by_comp[c]) {
      const double sq = (data.rows.row(i).transpose() - mu).squaredNorm();
      detail::tighten(rep.cond2_mean_dist, sq - 0.75 * traces[c]);
      detail::tighten(rep.cond2_mean_dist, 1.5 * traces[c] - sq);
      detail::tighten(rep.cond5_mean_dist_low, sigmas[c] * low_dim_factor - std::sqrt(sq));
    }
  }

  // Conditions 3 and 6: pairwise distances within a component.
  for (std::size_t c = 0; c < k; ++c) {
    const auto& idx = by_comp[c];
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const double sq = (data.rows.row(idx[a]) - data.rows.row(idx[b])).squaredNorm();
        detail::tighten(rep.cond3_point_dist, sq - 1.5 * traces[c]);
        detail::tighten(rep.cond3_point_dist, 3.0 * traces[c] - sq);
        detail::tighten(rep.cond6_point_dist_low,
                        2.0 * sigmas[c] * low_dim_factor - std::sqrt(sq));
      }
    }
  }

  // Condition 4: cross-component distances at least sqrt(max trace)/4.
  for (std::size_t c1 = 0; c1 < k; ++c1) {
    for (std::size_t c2 = c1 + 1; c2 < k; ++c2) {
      const double need = std::sqrt(std::max(traces[c1], traces[c2])) / 4.0;
      for (const Eigen::Index a : by_comp[c1])
        for (const Eigen::Index b : by_comp[c2])
          detail::tighten(rep.cond4_inter_dist,
                          (data.rows.row(a) - data.rows.row(b)).norm() - need);
    }
  }

  // Shape assumption: for every component,
  // ||Sigma||_F sqrt(ln(Nk/beta)) <= tr/8 and ||Sigma||_2 ln^2(Nk/beta) <= tr/8.
  const double lg = std::log(big_n * static_cast<double>(k) / beta);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& cov = params.components[c].params.cov;
    detail::tighten(rep.assumption, traces[c] / 8.0 - cov.norm() * std::sqrt(lg));
    detail::tighten(rep.assumption, traces[c] / 8.0 - sigmas[c] * sigmas[c] * lg * lg);
  }

  return rep;
}

}  // namespace pubdp

#endif  // PUBDP_SYNTH_HPP
