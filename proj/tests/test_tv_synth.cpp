// Total-variation oracle values, synthetic-instance generators, and the
// regularity checker.

#include <gtest/gtest.h>

#include <cmath>

#include "pubdp/rng.hpp"
#include "pubdp/synth.hpp"
#include "pubdp/tv.hpp"

namespace {

using pubdp::GaussianParams;
using pubdp::MixtureParams;
using pubdp::RngStream;

TEST(Tv1d, FrozenClosedForms) {
  EXPECT_EQ(pubdp::tv_distance_1d(0.0, 1.0, 0.0, 1.0), 0.0);
  // Mean shift 1 at unit variance: 2 Phi(1/2) - 1.
  EXPECT_NEAR(pubdp::tv_distance_1d(0.0, 1.0, 1.0, 1.0), 0.382924922548026, 1e-12);
  // N(0,1) vs N(0,4): crossings at +/- sqrt(8 ln2 / 3).
  EXPECT_NEAR(pubdp::tv_distance_1d(0.0, 1.0, 0.0, 4.0), 0.322674568834769, 1e-12);
}

TEST(Tv1d, SymmetricExactly) {
  EXPECT_DOUBLE_EQ(pubdp::tv_distance_1d(0.3, 2.0, -1.0, 0.5),
                   pubdp::tv_distance_1d(-1.0, 0.5, 0.3, 2.0));
  EXPECT_THROW(pubdp::tv_distance_1d(0.0, 0.0, 0.0, 1.0), pubdp::ParameterError);
}

TEST(TvMc, MatchesClosedFormForSharedCovariance) {
  // Equal identity covariances: TV = 2 Phi(||dmu||/2) - 1 in any dimension.
  GaussianParams p, q;
  p.mean = Eigen::Vector3d::Zero();
  p.cov = Eigen::MatrixXd::Identity(3, 3);
  q = p;
  q.mean = Eigen::Vector3d(1.0, 1.0, 1.0);
  const double exact = 2.0 * pubdp::normal_cdf(q.mean.norm() / 2.0) - 1.0;
  RngStream rng(1, 1);
  const auto est = pubdp::tv_distance(p, q, rng, 40000);
  EXPECT_NEAR(est.estimate, exact, est.error_bound + 0.01);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(TvMc, ZeroOnIdenticalAndOneDExact) {
  GaussianParams p;
  p.mean = Eigen::Vector2d(1.0, 2.0);
  p.cov = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  RngStream rng(2, 1);
  EXPECT_EQ(pubdp::tv_distance(p, p, rng, 1000).estimate, 0.0);

  GaussianParams a, b;
  a.mean = Eigen::VectorXd::Zero(1);
  a.cov = Eigen::MatrixXd::Identity(1, 1);
  b = a;
  b.mean[0] = 1.0;
  EXPECT_NEAR(pubdp::tv_distance(a, b, rng).estimate, 0.382924922548026, 1e-12);
  EXPECT_EQ(pubdp::tv_distance(a, b, rng).std_error, 0.0);
}

TEST(TvMc, AffineInvariance) {
  RngStream rng(3, 1);
  GaussianParams p, q;
  p.mean = Eigen::Vector2d(0.2, -0.4);
  p.cov.resize(2, 2);
  p.cov << 1.5, 0.3, 0.3, 0.8;
  q.mean = Eigen::Vector2d(0.9, 0.1);
  q.cov.resize(2, 2);
  q.cov << 0.9, -0.2, -0.2, 1.1;
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 1.0, 0.0, 0.5;
  const Eigen::Vector2d b(3.0, -1.0);

  GaussianParams pt, qt;
  pt.mean = a * p.mean + b;
  pt.cov = a * p.cov * a.transpose();
  qt.mean = a * q.mean + b;
  qt.cov = a * q.cov * a.transpose();

  RngStream r1(4, 1), r2(5, 1);
  const auto e1 = pubdp::tv_distance(p, q, r1, 40000);
  const auto e2 = pubdp::tv_distance(pt, qt, r2, 40000);
  const double pooled = 3.0 * std::hypot(e1.std_error, e2.std_error);
  EXPECT_NEAR(e1.estimate, e2.estimate, pooled + 0.01);
}

TEST(TvParamBounds, ClosedFormsAndMonotonicity) {
  const auto b0 = pubdp::tv_param_bounds(0.0);
  EXPECT_DOUBLE_EQ(b0.mean_bound, 0.0);
  EXPECT_DOUBLE_EQ(b0.cond_bound, 2.0);
  EXPECT_DOUBLE_EQ(b0.loewner_lo, 0.25);
  EXPECT_DOUBLE_EQ(b0.loewner_hi, 4.0);
  const auto b5 = pubdp::tv_param_bounds(0.5);
  EXPECT_DOUBLE_EQ(b5.mean_bound, 8.0);
  EXPECT_DOUBLE_EQ(b5.cond_bound, 8.0);
  EXPECT_DOUBLE_EQ(b5.loewner_lo, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(b5.loewner_hi, 64.0);
  double prev_hi = 0.0;
  for (double g = 0.0; g < 0.95; g += 0.05) {
    const auto b = pubdp::tv_param_bounds(g);
    EXPECT_GT(b.loewner_hi, prev_hi);
    prev_hi = b.loewner_hi;
  }
  EXPECT_THROW(pubdp::tv_param_bounds(1.0), pubdp::ParameterError);
}

TEST(Synth, GaussianSampleMoments) {
  RngStream rng(6, 1);
  GaussianParams p;
  p.mean = Eigen::Vector2d::Zero();
  p.cov = Eigen::MatrixXd::Identity(2, 2);
  const auto data = pubdp::sample_gaussian(p, 100000, rng);
  EXPECT_LT(data.rows.colwise().mean().norm(), 0.02);
  const Eigen::MatrixXd cov = data.rows.transpose() * data.rows / 100000.0;
  EXPECT_LT((cov - p.cov).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Synth, VarianceRatioAndEmpty) {
  RngStream rng(7, 1);
  GaussianParams p;
  p.mean = Eigen::Vector2d::Zero();
  p.cov.resize(2, 2);
  p.cov << 4.0, 0.0, 0.0, 1.0;
  const auto data = pubdp::sample_gaussian(p, 100000, rng);
  const double v0 = data.rows.col(0).squaredNorm() / 100000.0;
  const double v1 = data.rows.col(1).squaredNorm() / 100000.0;
  EXPECT_NEAR(v0 / v1, 4.0, 0.2);

  const auto empty = pubdp::sample_gaussian(p, 0, rng);
  EXPECT_EQ(empty.rows.rows(), 0);
}

TEST(Synth, SeparatedMixtureMeetsPairwiseRequirement) {
  RngStream rng(8, 1);
  const MixtureParams mix = pubdp::make_separated_mixture(8, 3, 20.0, 0.2, 2.0, rng);
  ASSERT_EQ(mix.k(), 3u);
  double wsum = 0.0;
  for (const auto& c : mix.components) {
    EXPECT_GE(c.weight, 0.2 - 1e-12);
    wsum += c.weight;
  }
  EXPECT_NEAR(wsum, 1.0, 1e-9);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto& ci = mix.components[i];
      const auto& cj = mix.components[j];
      const double si = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ci.params.cov)
                                      .eigenvalues()
                                      .maxCoeff());
      const double sj = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cj.params.cov)
                                      .eigenvalues()
                                      .maxCoeff());
      const double need = (20.0 + 10.0 / std::sqrt(ci.weight) + 10.0 / std::sqrt(cj.weight)) *
                          std::max(si, sj);
      EXPECT_GE((ci.params.mean - cj.params.mean).norm(), need);
    }
  }
}

TEST(Synth, MixtureGeneratorValidation) {
  RngStream rng(9, 1);
  EXPECT_THROW(pubdp::make_separated_mixture(4, 3, 10.0, 0.5, 2.0, rng),
               pubdp::ParameterError);  // k * w_min > 1
  const MixtureParams single = pubdp::make_separated_mixture(3, 1, 10.0, 1.0, 2.0, rng);
  EXPECT_EQ(single.k(), 1u);
  EXPECT_DOUBLE_EQ(single.components[0].weight, 1.0);
}

TEST(Synth, MixtureSampleCountsWithinBinomialTolerance) {
  RngStream rng(10, 1);
  MixtureParams mix;
  mix.components.resize(2);
  for (int i = 0; i < 2; ++i) {
    mix.components[i].weight = 0.5;
    mix.components[i].params.mean = Eigen::Vector2d(i * 100.0, 0.0);
    mix.components[i].params.cov = Eigen::MatrixXd::Identity(2, 2);
  }
  const auto data = pubdp::sample_mixture(mix, 10000, rng);
  int c0 = 0;
  for (const int lbl : data.labels)
    if (lbl == 0) ++c0;
  EXPECT_NEAR(c0, 5000.0, 3.0 * std::sqrt(10000.0) / 2.0 * 2.0);

  const auto one = pubdp::sample_mixture(
      pubdp::make_separated_mixture(2, 1, 5.0, 1.0, 2.0, rng), 100, rng);
  for (const int lbl : one.labels) EXPECT_EQ(lbl, 0);
}

TEST(Synth, GammaFarConstructionHitsTargetTv) {
  RngStream rng(11, 1);
  GaussianParams base;
  base.mean = Eigen::Vector3d(1.0, 0.0, -1.0);
  base.cov.resize(3, 3);
  base.cov << 2.0, 0.3, 0.0, 0.3, 1.5, 0.2, 0.0, 0.2, 1.0;
  for (const double gamma : {0.2, 0.5}) {
    const GaussianParams far = pubdp::make_gamma_far_params(base, gamma, rng);
    RngStream tv_rng(12, static_cast<std::uint64_t>(gamma * 10));
    const auto tv = pubdp::tv_distance(base, far, tv_rng, 60000);
    EXPECT_NEAR(tv.estimate, gamma, tv.error_bound + 0.01);
  }
  EXPECT_THROW(pubdp::make_gamma_far_params(base, 1.0, rng), pubdp::ParameterError);
}

TEST(Regularity, SinglePointAtMeanFailsCondition2) {
  MixtureParams mix;
  mix.components.resize(1);
  mix.components[0].weight = 1.0;
  mix.components[0].params.mean = Eigen::Vector2d(1.0, 1.0);
  mix.components[0].params.cov = Eigen::MatrixXd::Identity(2, 2);
  pubdp::LabeledDataset data;
  data.rows = mix.components[0].params.mean.transpose();
  data.labels = {0};
  const auto rep = pubdp::check_regularity(data, mix, 0.1, 1000);
  EXPECT_FALSE(rep.cond2_mean_dist.pass);
  EXPECT_LT(rep.cond2_mean_dist.margin, 0.0);
}

TEST(Regularity, LowDimensionFailsShapeAssumption) {
  // d = 4 at N = 1e6: d < 8 ln^2(Nk/beta), so the spectral inequality fails.
  RngStream rng(13, 1);
  const MixtureParams mix = pubdp::make_separated_mixture(4, 1, 10.0, 1.0, 1.5, rng);
  const auto data = pubdp::sample_mixture(mix, 200, rng);
  const auto rep = pubdp::check_regularity(data, mix, 0.1, 1000000);
  EXPECT_FALSE(rep.assumption.pass);
}

TEST(Regularity, RequiresLabels) {
  pubdp::LabeledDataset data;
  data.rows = Eigen::MatrixXd::Zero(3, 2);
  MixtureParams mix;
  mix.components.resize(1);
  mix.components[0].weight = 1.0;
  mix.components[0].params.mean = Eigen::Vector2d::Zero();
  mix.components[0].params.cov = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(pubdp::check_regularity(data, mix, 0.1, 100), pubdp::ParameterError);
}

TEST(Regularity, WellSeparatedHighDimInstancePasses) {
  // The concentration bands need d >> ln^2(Nk/beta), so this has to be a
  // genuinely high-dimensional instance with round covariances.
  RngStream rng(14, 1);
  const MixtureParams mix = pubdp::make_separated_mixture(600, 2, 50.0, 0.3, 1.0, rng);
  const auto data = pubdp::sample_mixture(mix, 80, rng);
  const auto rep = pubdp::check_regularity(data, mix, 0.1, 80);
  EXPECT_TRUE(rep.cond1_frequency.pass);
  EXPECT_TRUE(rep.cond2_mean_dist.pass);
  EXPECT_TRUE(rep.cond3_point_dist.pass);
  EXPECT_TRUE(rep.cond4_inter_dist.pass);
}

}  // namespace
