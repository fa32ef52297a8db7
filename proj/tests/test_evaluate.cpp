// Matching / evaluation tests: permutation invariance and the equivalence of
// the bottleneck-assignment solver with exhaustive search.

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "pubdp/evaluate.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/synth.hpp"

namespace {

using pubdp::MixtureParams;
using pubdp::RngStream;

MixtureParams small_mixture(RngStream& rng) {
  return pubdp::make_separated_mixture(4, 3, 15.0, 0.2, 2.0, rng);
}

TEST(Evaluate, IdenticalEstimatePassesWithZeroTv) {
  RngStream rng(1, 1);
  const MixtureParams truth = small_mixture(rng);
  RngStream ev(2, 1);
  const auto rep = pubdp::evaluate_learning(truth, truth, 0.1, ev);
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.k_mismatch);
  EXPECT_EQ(rep.max_tv, 0.0);
  EXPECT_EQ(rep.max_weight_error, 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rep.permutation[i], static_cast<int>(i));
}

TEST(Evaluate, ReversedComponentsStillPass) {
  RngStream rng(3, 1);
  const MixtureParams truth = small_mixture(rng);
  MixtureParams rev = truth;
  std::reverse(rev.components.begin(), rev.components.end());
  RngStream ev(4, 1);
  const auto rep = pubdp::evaluate_learning(truth, rev, 0.1, ev);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.permutation[0], 2);
  EXPECT_EQ(rep.permutation[2], 0);
  EXPECT_LT(rep.max_tv, 1e-12);
}

TEST(Evaluate, KMismatchIsStructuredFailure) {
  RngStream rng(5, 1);
  const MixtureParams truth = small_mixture(rng);
  MixtureParams fewer = truth;
  fewer.components.pop_back();
  RngStream ev(6, 1);
  const auto rep = pubdp::evaluate_learning(truth, fewer, 0.1, ev);
  EXPECT_TRUE(rep.k_mismatch);
  EXPECT_FALSE(rep.pass);
}

TEST(Evaluate, WeightErrorAloneFailsThePass) {
  RngStream rng(7, 1);
  const MixtureParams truth = small_mixture(rng);
  MixtureParams est = truth;
  est.components[0].weight += 0.09;
  est.components[1].weight -= 0.09;
  RngStream ev(8, 1);
  // alpha = 0.2 -> weight tolerance alpha/k = 0.0667 < 0.09.
  const auto rep = pubdp::evaluate_learning(truth, est, 0.2, ev);
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.max_weight_error, 0.09, 1e-12);
  EXPECT_LT(rep.max_tv, 0.2);
}

// Brute-force min-max assignment oracle.
double brute_force_bottleneck(const std::vector<std::vector<double>>& cost) {
  const int k = static_cast<int>(cost.size());
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int i = 0; i < k; ++i)
      worst = std::max(worst, cost[static_cast<std::size_t>(i)]
                                  [static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Evaluate, BottleneckSolverMatchesExhaustiveSearch) {
  RngStream rng(9, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 7;  // 2..8
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(k)));
    for (auto& row : cost)
      for (auto& v : row) v = rng.uniform();
    const std::vector<int> match = pubdp::detail::bottleneck_assignment(cost);
    double solver_max = 0.0;
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) {
      ASSERT_GE(match[static_cast<std::size_t>(i)], 0);
      ASSERT_LT(match[static_cast<std::size_t>(i)], k);
      ASSERT_FALSE(used[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])]);
      used[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])] = 1;
      solver_max = std::max(
          solver_max,
          cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(match[static_cast<std::size_t>(i)])]);
    }
    EXPECT_DOUBLE_EQ(solver_max, brute_force_bottleneck(cost));
  }
}

}  // namespace
