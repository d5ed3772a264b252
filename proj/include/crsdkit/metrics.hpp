#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crsdkit {

/// How DBSCAN noise (label -1) enters the contingency table.
enum class NoisePolicy {
  singleton,       ///< every noise point is its own cluster
  single_cluster,  ///< all noise points form one cluster
};

NoisePolicy parse_noise_policy(std::string_view name);

struct ClusterScoreReport {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
  std::vector<std::string> classes;  // contingency rows
  std::vector<std::string> clusters;  // contingency columns
  std::vector<std::vector<std::size_t>> contingency;
};

/// Homogeneity, completeness and V-measure in nats. truth and pred are
/// aligned by position.
ClusterScoreReport v_measure(std::span<const std::string> truth, std::span<const int> pred,
                             NoisePolicy noise = NoisePolicy::singleton);

/// Id-keyed variant; throws ValidationError unless both sides cover the same ids.
ClusterScoreReport v_measure(std::span<const std::pair<std::string, std::string>> truth,
                             std::span<const std::pair<std::string, int>> pred,
                             NoisePolicy noise = NoisePolicy::singleton);

struct LabeledScore {
  double score = 0.0;
  bool abnormal = false;
};

/// ROC with abnormal as the positive class; a point is predicted positive
/// when its score is >= the threshold.
struct RocCurve {
  std::vector<double> thresholds;  // descending, first is +inf
  std::vector<double> tpr;
  std::vector<double> fpr;
  /// Mann-Whitney rank statistic with average ranks for ties.
  double auc = 0.0;

  double trapezoid_auc() const;
};

RocCurve roc_auc(std::span<const LabeledScore> scores);

struct ConfusionMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// score > threshold predicts abnormal.
ConfusionMetrics confusion_metrics(std::span<const LabeledScore> scores, double threshold);

/// Threshold maximizing sensitivity + specificity - 1 among midpoints between
/// consecutive distinct scores (plus one value below the minimum). Ties keep
/// the largest threshold.
double youden_threshold(std::span<const LabeledScore> scores);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (N-1) standard deviation; 0 when count < 2
  std::size_t count = 0;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace crsdkit
