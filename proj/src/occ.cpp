#include "crsdkit/occ.hpp"

#include <algorithm>
#include <numeric>

#include "crsdkit/error.hpp"
#include "crsdkit/parallel.hpp"

namespace crsdkit {

CovarianceEstimator parse_estimator(std::string_view name) {
  if (name == "printed") return CovarianceEstimator::printed;
  if (name == "total-variance") return CovarianceEstimator::total_variance;
  throw ValidationError("unknown covariance estimator '" + std::string(name) +
                        "' (expected printed or total-variance)");
}

std::string_view to_string(CovarianceEstimator e) {
  return e == CovarianceEstimator::printed ? "printed" : "total-variance";
}

NormalModel fit_normal(std::span<const EmbeddingRecord> records, CovarianceEstimator estimator) {
  const std::size_t n = records.size();
  if (n < 2) {
    throw ValidationError("fit_normal needs at least 2 records, got " + std::to_string(n));
  }
  const Eigen::Index d = records.front().posterior.dim();
  for (const auto& r : records) {
    if (r.posterior.dim() != d) {
      throw ValidationError("fit_normal: record '" + r.id + "' has dimension " +
                            std::to_string(r.posterior.dim()) + ", expected " +
                            std::to_string(d));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });

  const double nd = static_cast<double>(n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (auto i : order) mean += records[i].posterior.mean();
  mean /= nd;

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (auto i : order) {
    const auto& g = records[i].posterior;
    if (estimator == CovarianceEstimator::printed) {
      acc.noalias() += g.mean() * g.mean().transpose();
    } else {
      const Eigen::VectorXd c = g.mean() - mean;
      acc.noalias() += c * c.transpose();
    }
    acc.diagonal() += g.var();
  }
  Eigen::MatrixXd cov = acc / (nd - 1.0);
  if (estimator == CovarianceEstimator::printed) cov -= mean * mean.transpose();
  cov = 0.5 * (cov + cov.transpose());
  if (!cov.allFinite()) {
    throw NumericalError("fit_normal: covariance of " + std::to_string(n) +
                         " records is not finite (overflow)");
  }

  return NormalModel{FullGaussian(std::move(mean), std::move(cov)), n, estimator};
}

std::vector<EmbeddingRecord> select_label(const Dataset& ds, std::string_view normal_label) {
  std::vector<EmbeddingRecord> out;
  for (const auto& r : ds.records()) {
    if (r.label == normal_label) out.push_back(r);
  }
  return out;
}

double score(const NormalModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.dim()) {
    throw ValidationError("score: query has dimension " + std::to_string(z.size()) +
                          ", model has " + std::to_string(model.dim()));
  }
  return -log_density(model.gaussian, z);
}

std::vector<ScoredRecord> score_dataset(const NormalModel& model, const Dataset& ds) {
  if (ds.dim() != model.dim()) {
    throw ValidationError("score_dataset: dataset dimension " + std::to_string(ds.dim()) +
                          " does not match model dimension " + std::to_string(model.dim()));
  }
  std::vector<ScoredRecord> out(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto& r = ds[i];
    out[i] = ScoredRecord{r.id, r.label, score(model, r.posterior.mean())};
  });
  return out;
}

}  // namespace crsdkit
