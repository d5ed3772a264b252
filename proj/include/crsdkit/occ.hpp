#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crsdkit/dataset.hpp"
#include "crsdkit/gaussian.hpp"

namespace crsdkit {

/// How the normal-class covariance is assembled from posterior moments.
enum class CovarianceEstimator {
  /// (1/(N-1)) * sum_i (V_i + mu_i mu_i^T) - mu_hat mu_hat^T
  printed,
  /// (1/(N-1)) * sum_i (V_i + (mu_i - mu_hat)(mu_i - mu_hat)^T)
  total_variance,
};

CovarianceEstimator parse_estimator(std::string_view name);
std::string_view to_string(CovarianceEstimator e);

/// Gaussian fitted to the posteriors of the normal class.
struct NormalModel {
  FullGaussian gaussian;
  std::size_t n_fit = 0;
  CovarianceEstimator estimator = CovarianceEstimator::printed;

  Eigen::Index dim() const { return gaussian.dim(); }
  double jitter_applied() const { return gaussian.jitter(); }
};

/// Fits mean and covariance from the posteriors. Sums run in id order, so the
/// result does not depend on record order. Requires N >= 2.
NormalModel fit_normal(std::span<const EmbeddingRecord> records,
                       CovarianceEstimator estimator = CovarianceEstimator::printed);

/// Records of ds whose label equals normal_label.
std::vector<EmbeddingRecord> select_label(const Dataset& ds, std::string_view normal_label);

/// Abnormality score: negative log-likelihood of z under the fitted Gaussian.
double score(const NormalModel& model, const Eigen::VectorXd& z);

struct ScoredRecord {
  std::string id;
  std::string label;
  double score = 0.0;
};

/// Scores each record at its posterior mean. Output order matches ds.
std::vector<ScoredRecord> score_dataset(const NormalModel& model, const Dataset& ds);

}  // namespace crsdkit
