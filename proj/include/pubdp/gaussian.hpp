#ifndef PUBDP_GAUSSIAN_HPP
#define PUBDP_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "pubdp/errors.hpp"

namespace pubdp {

/// Mean vector and symmetric positive-definite covariance of a multivariate
/// normal; the object every estimator in this library produces.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  GaussianParams() = default;
  GaussianParams(Eigen::VectorXd m, Eigen::MatrixXd c)
      : mean(std::move(m)), cov(std::move(c)) {}

  [[nodiscard]] Eigen::Index dim() const { return mean.size(); }

  void validate() const {
    if (mean.size() == 0 || cov.rows() != mean.size() || cov.cols() != mean.size())
      throw InputError("GaussianParams: dimension mismatch");
    if (!mean.allFinite() || !cov.allFinite())
      throw InputError("GaussianParams: non-finite entries");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw InputError("GaussianParams: covariance not symmetric within 1e-9");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw InputError("GaussianParams: covariance not positive definite");
  }
};

struct MixtureComponent {
  GaussianParams params;
  double weight = 0.0;
};

/// A k-component Gaussian mixture: (params, weight) tuples with weights
/// summing to one.
struct MixtureParams {
  std::vector<MixtureComponent> components;

  [[nodiscard]] std::size_t k() const { return components.size(); }
  [[nodiscard]] Eigen::Index dim() const {
    return components.empty() ? 0 : components.front().params.dim();
  }

  void validate() const {
    if (components.empty()) throw InputError("MixtureParams: no components");
    double total = 0.0;
    for (const auto& c : components) {
      c.params.validate();
      if (!(c.weight > 0.0 && c.weight <= 1.0))
        throw InputError("MixtureParams: weight outside (0,1]");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InputError("MixtureParams: weights must sum to 1 within 1e-9");
  }
};

/// Rows of samples plus optional hidden component labels. Labels exist only
/// for synthetic data and are consumed exclusively by test oracles; the
/// estimators themselves receive bare row matrices.
struct LabeledDataset {
  Eigen::MatrixXd rows;
  std::vector<int> labels;  // empty when unlabeled

  [[nodiscard]] bool has_labels() const { return !labels.empty(); }
};

}  // namespace pubdp

#endif  // PUBDP_GAUSSIAN_HPP
