#ifndef PUBDP_EVALUATE_HPP
#define PUBDP_EVALUATE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "pubdp/gaussian.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/tv.hpp"

namespace pubdp {

/// Outcome of matching an estimated mixture against the ground truth: the
/// permutation minimizing the worst per-component TV distance, the matched
/// TV and weight errors, and a pass flag (max TV <= alpha and max weight
/// error <= alpha/k under the best permutation).
struct LearningReport {
  bool pass = false;
  bool k_mismatch = false;
  std::vector<int> permutation;  // estimate index matched to truth component i
  std::vector<double> component_tv;
  std::vector<double> weight_error;
  double max_tv = std::numeric_limits<double>::infinity();
  double max_weight_error = std::numeric_limits<double>::infinity();
};

namespace detail {

// Bottleneck assignment: smallest threshold such that a perfect matching
// exists using only edges with cost <= threshold; matching via augmenting
// paths. Used for k > 8 where exhaustive search is infeasible.
inline bool bottleneck_feasible(const std::vector<std::vector<double>>& cost, double thr,
                                std::vector<int>* match_out) {
  const int k = static_cast<int>(cost.size());
  std::vector<int> match_col(static_cast<std::size_t>(k), -1);
  std::vector<char> used;
  std::function<bool(int)> try_row = [&](int r) -> bool {
    for (int c = 0; c < k; ++c) {
      if (cost[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] <= thr &&
          !used[static_cast<std::size_t>(c)]) {
        used[static_cast<std::size_t>(c)] = 1;
        if (match_col[static_cast<std::size_t>(c)] < 0 ||
            try_row(match_col[static_cast<std::size_t>(c)])) {
          match_col[static_cast<std::size_t>(c)] = r;
          return true;
        }
      }
    }
    return false;
  };
  for (int r = 0; r < k; ++r) {
    used.assign(static_cast<std::size_t>(k), 0);
    if (!try_row(r)) return false;
  }
  if (match_out) {
    match_out->assign(static_cast<std::size_t>(k), -1);
    for (int c = 0; c < k; ++c)
      (*match_out)[static_cast<std::size_t>(match_col[static_cast<std::size_t>(c)])] = c;
  }
  return true;
}

inline std::vector<int> bottleneck_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<double> values;
  for (const auto& row : cost) values.insert(values.end(), row.begin(), row.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (bottleneck_feasible(cost, values[mid], nullptr))
      hi = mid;
    else
      lo = mid + 1;
  }
  std::vector<int> match;
  bottleneck_feasible(cost, values[lo], &match);
  return match;
}

}  // namespace detail

/// Match estimate components to truth components, minimizing the worst
/// per-component TV distance: exhaustive permutation search for k <= 8, a
/// bottleneck assignment solver beyond that (verified equivalent by tests).
inline LearningReport evaluate_learning(const MixtureParams& truth, const MixtureParams& estimate,
                                        double alpha, RngStream& rng, int tv_samples = 20000) {
  LearningReport rep;
  const std::size_t k = truth.k();
  if (estimate.k() != k) {
    rep.k_mismatch = true;
    return rep;
  }

  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      RngStream tv_rng = rng.fork(i * k + j + 1);
      cost[i][j] = tv_distance(truth.components[i].params, estimate.components[j].params, tv_rng,
                               tv_samples)
                       .estimate;
    }
  }

  std::vector<int> best;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best_max = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        worst = std::max(worst, cost[i][static_cast<std::size_t>(perm[i])]);
      if (worst < best_max) {
        best_max = worst;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = detail::bottleneck_assignment(cost);
  }

  rep.permutation = best;
  rep.component_tv.resize(k);
  rep.weight_error.resize(k);
  rep.max_tv = 0.0;
  rep.max_weight_error = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(best[i]);
    rep.component_tv[i] = cost[i][j];
    rep.weight_error[i] =
        std::abs(truth.components[i].weight - estimate.components[j].weight);
    rep.max_tv = std::max(rep.max_tv, rep.component_tv[i]);
    rep.max_weight_error = std::max(rep.max_weight_error, rep.weight_error[i]);
  }
  rep.pass = rep.max_tv <= alpha && rep.max_weight_error <= alpha / static_cast<double>(k);
  return rep;
}

}  // namespace pubdp

#endif  // PUBDP_EVALUATE_HPP
