// Preconditioner tests: frozen range constants, exact transform algebra, and
// robustness relaxations.

#include <gtest/gtest.h>

#include <cmath>

#include "pubdp/precondition.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/synth.hpp"

namespace {

using pubdp::GaussianParams;
using pubdp::PreconditionTransform;
using pubdp::RngStream;

Eigen::MatrixXd random_rows(Eigen::Index r, Eigen::Index d, RngStream& rng) {
  Eigen::MatrixXd x(r, d);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

TEST(Precondition, FrozenRangeConstants) {
  RngStream rng(1, 1);
  {
    const auto t = pubdp::precondition_from_rows(random_rows(2, 1, rng), 0.1);
    EXPECT_NEAR(t.L, 0.0470921644503244, 1e-13);
    EXPECT_DOUBLE_EQ(t.U, 900.0);
  }
  {
    const auto t = pubdp::precondition_from_rows(random_rows(3, 2, rng), 0.1);
    EXPECT_NEAR(t.L, 0.0676675528879843, 1e-13);
    EXPECT_DOUBLE_EQ(t.U, 3600.0);
  }
  {
    const auto t = pubdp::precondition_from_rows(random_rows(4, 3, rng), 0.2);
    EXPECT_NEAR(t.L, 0.0894460435522764, 1e-13);
    EXPECT_DOUBLE_EQ(t.U, 2025.0);
    EXPECT_NEAR(t.mean_norm_bound(), 553.662747792203, 1e-9);
  }
}

TEST(Precondition, TransformedPublicRowsHaveCovOverL) {
  RngStream rng(2, 1);
  const Eigen::MatrixXd pub = 3.0 * random_rows(9, 4, rng);
  const auto t = pubdp::precondition_from_rows(pub, 0.1);
  const Eigen::MatrixXd y = pubdp::apply_transform(pub, t);
  const Eigen::VectorXd mean = y.colwise().mean();
  EXPECT_LT(mean.norm(), 1e-9);
  const Eigen::MatrixXd centered = y.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 8.0;
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(4, 4) / t.L;
  EXPECT_LT((cov - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Precondition, RoundTripIsIdentity) {
  RngStream rng(3, 1);
  const auto t = pubdp::precondition_from_rows(random_rows(6, 5, rng), 0.05);
  GaussianParams p;
  p.mean = Eigen::VectorXd::LinSpaced(5, -1.0, 2.0);
  p.cov = Eigen::MatrixXd::Identity(5, 5) * 2.0;
  p.cov(0, 1) = p.cov(1, 0) = 0.3;
  const GaussianParams back = pubdp::invert_params(pubdp::transform_params(p, t), t);
  EXPECT_LT((back.mean - p.mean).norm(), 1e-9);
  EXPECT_LT((back.cov - p.cov).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Precondition, ForwardMapMatchesParamTransform) {
  // Pushing a point mass x through apply_transform agrees with pushing the
  // mean through transform_params.
  RngStream rng(4, 1);
  const auto t = pubdp::precondition_from_rows(random_rows(4, 3, rng), 0.1);
  GaussianParams p;
  p.mean = Eigen::Vector3d(1.0, -2.0, 0.5);
  p.cov = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd y = pubdp::apply_transform(p.mean.transpose(), t);
  const GaussianParams py = pubdp::transform_params(p, t);
  EXPECT_LT((y.row(0).transpose() - py.mean).norm(), 1e-10);
}

TEST(Precondition, ArityAndDomainErrors) {
  RngStream rng(5, 1);
  EXPECT_THROW(pubdp::precondition_from_rows(random_rows(3, 3, rng), 0.1), pubdp::ArityError);
  EXPECT_THROW(pubdp::public_precondition(random_rows(5, 3, rng), 0.1), pubdp::ArityError);
  EXPECT_NO_THROW(pubdp::public_precondition(random_rows(4, 3, rng), 0.1));
  EXPECT_THROW(pubdp::precondition_from_rows(random_rows(4, 3, rng), 0.0),
               pubdp::ParameterError);
  EXPECT_THROW(pubdp::precondition_from_rows(random_rows(4, 3, rng), 1.0),
               pubdp::ParameterError);
}

TEST(Precondition, DegenerateRowsRejected) {
  Eigen::MatrixXd flat(4, 3);
  flat << 1, 2, 3, 2, 4, 6, 3, 6, 9, 4, 8, 12;  // rank-1 rows
  EXPECT_THROW(pubdp::precondition_from_rows(flat, 0.1), pubdp::DegenerateDataError);
}

TEST(Precondition, RobustBoundsClosedForm) {
  RngStream rng(6, 1);
  const auto t = pubdp::precondition_from_rows(random_rows(4, 3, rng), 0.1);
  const auto r = pubdp::robust_bounds(t, 0.5);
  // (1-g)^4/4 = 1/64 at g = 0.5.
  EXPECT_NEAR(r.L, t.L / 64.0, 1e-12);
  EXPECT_NEAR(r.U, t.U * 64.0, 1e-6);
  EXPECT_DOUBLE_EQ(r.gamma, 0.5);
  // gamma = 0 leaves L halved by the 1/4 factor only.
  const auto r0 = pubdp::robust_bounds(t, 0.0);
  EXPECT_NEAR(r0.L, t.L / 4.0, 1e-12);
  EXPECT_THROW(pubdp::robust_bounds(t, 1.0), pubdp::ParameterError);
}

TEST(Precondition, RangeBoundsExposeRAndK) {
  RngStream rng(7, 1);
  const auto t = pubdp::precondition_from_rows(random_rows(4, 3, rng), 0.1);
  const auto rb = pubdp::range_bounds(t);
  EXPECT_DOUBLE_EQ(rb.R, t.mean_norm_bound());
  EXPECT_DOUBLE_EQ(rb.K, t.U / t.L);
}

TEST(Precondition, MoreRowsThanMinimumAccepted) {
  // The 1/(r-1) normalization keeps the constants valid for r > d+1.
  RngStream rng(8, 1);
  const auto t = pubdp::precondition_from_rows(random_rows(50, 3, rng), 0.1);
  EXPECT_EQ(t.dim(), 3);
  EXPECT_GT(t.L, 0.0);
}

}  // namespace
