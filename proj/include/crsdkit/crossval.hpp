#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crsdkit/dataset.hpp"
#include "crsdkit/metrics.hpp"
#include "crsdkit/occ.hpp"

namespace crsdkit {

struct CrossvalOptions {
  std::size_t folds = 5;
  std::string normal_label = "NILM";
  std::uint64_t seed = 0;
  CovarianceEstimator estimator = CovarianceEstimator::printed;
};

/// One row of the per-class table: a group of abnormal records against the
/// held-out normals. Metrics are aggregated over the folds where the group is
/// present; absent folds are skipped, not zero-filled.
struct CrossvalRow {
  std::string label;
  std::size_t folds_present = 0;
  MeanStd auc;
  MeanStd accuracy;
  MeanStd f1;
  MeanStd sensitivity;
  MeanStd specificity;
};

struct CrossvalTable {
  CrossvalOptions options;
  std::size_t n_records = 0;
  Eigen::Index dim = 0;
  /// Normal vs every other label pooled.
  CrossvalRow overall;
  /// One row per abnormal label, in lexicographic order.
  std::vector<CrossvalRow> per_class;
  /// Youden threshold used in each fold, picked on that fold's training records.
  std::vector<double> thresholds;
  std::vector<std::string> undersized_labels;
};

/// Per fold: fit the normal model on the training folds' normal records,
/// choose a Youden threshold on the training folds' scores, then score the
/// held-out fold and compute overall and per-class metrics.
CrossvalTable crossval_occ(const Dataset& ds, const CrossvalOptions& options);

struct ClassEvaluation {
  std::string label;
  std::size_t count = 0;
  double auc = 0.0;  // against all normals
  ConfusionMetrics confusion;
};

/// Single-split evaluation of precomputed scores.
struct OccEvaluation {
  std::string normal_label;
  std::size_t n_normal = 0;
  std::size_t n_abnormal = 0;
  RocCurve roc;
  double threshold = 0.0;
  bool threshold_from_youden = true;
  ConfusionMetrics confusion;
  std::vector<ClassEvaluation> per_class;  // lexicographic by label
};

/// Uses the given threshold, or the Youden threshold of these scores when
/// none is given. Every label other than normal_label is abnormal.
OccEvaluation evaluate_scores(std::span<const ScoredRecord> scores, const std::string& normal_label,
                              std::optional<double> threshold = std::nullopt);

/// One cell of the hyperparameter grid.
struct SweepEntry {
  int beta = 0;
  int dim = 0;
  std::string aug;
  std::string file;
  bool present = false;
  MeanStd auc;  // overall cross-validated AUC across folds
};

/// emb_b{beta}_d{dim}_{aug}.jsonl
std::string sweep_filename(int beta, int dim, const std::string& aug);

/// Cross-validates every grid file found in dir. Missing files are reported
/// as absent; a file whose latent dimension differs from its name is an error.
std::vector<SweepEntry> sweep_crossval(const std::filesystem::path& dir, const std::vector<int>& betas,
                                       const std::vector<int>& dims,
                                       const std::vector<std::string>& augs,
                                       const CrossvalOptions& options);

}  // namespace crsdkit
