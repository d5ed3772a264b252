#include "crsdkit/crossval.hpp"

#include <algorithm>
#include <map>

#include "crsdkit/error.hpp"

namespace crsdkit {

namespace {

struct RowAccumulator {
  std::vector<double> auc, accuracy, f1, sensitivity, specificity;

  void add(std::span<const LabeledScore> scores, double threshold) {
    auc.push_back(roc_auc(scores).auc);
    const auto m = confusion_metrics(scores, threshold);
    accuracy.push_back(m.accuracy);
    f1.push_back(m.f1);
    sensitivity.push_back(m.sensitivity);
    specificity.push_back(m.specificity);
  }

  CrossvalRow finish(std::string label) const {
    return CrossvalRow{std::move(label), auc.size(),  mean_std(auc),        mean_std(accuracy),
                       mean_std(f1),     mean_std(sensitivity), mean_std(specificity)};
  }
};

bool has_both(std::span<const LabeledScore> s) {
  bool pos = false, neg = false;
  for (const auto& x : s) (x.abnormal ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

CrossvalTable crossval_occ(const Dataset& ds, const CrossvalOptions& options) {
  const auto labels = ds.labels();
  if (std::find(labels.begin(), labels.end(), options.normal_label) == labels.end()) {
    throw ValidationError("crossval: normal label '" + options.normal_label +
                          "' does not occur in the dataset");
  }
  const FoldSplit split = stratified_kfold(ds, options.folds, options.seed);

  CrossvalTable table;
  table.options = options;
  table.n_records = ds.size();
  table.dim = ds.dim();
  table.undersized_labels = split.undersized_labels;

  RowAccumulator overall;
  std::map<std::string, RowAccumulator> per_class;
  for (const auto& l : labels) {
    if (l != options.normal_label) per_class[l];
  }

  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<EmbeddingRecord> train_normals;
    const auto train = split.train_indices(f);
    for (auto i : train) {
      if (ds[i].label == options.normal_label) train_normals.push_back(ds[i]);
    }
    if (train_normals.size() < 2) {
      throw ValidationError("crossval: fold " + std::to_string(f) + " has " +
                            std::to_string(train_normals.size()) +
                            " normal training records; at least 2 are needed");
    }
    const NormalModel model = fit_normal(train_normals, options.estimator);

    std::vector<LabeledScore> train_scores;
    for (auto i : train) {
      train_scores.push_back(
          {score(model, ds[i].posterior.mean()), ds[i].label != options.normal_label});
    }
    const double threshold =
        has_both(train_scores) ? youden_threshold(train_scores) : 0.0;
    table.thresholds.push_back(threshold);

    std::vector<LabeledScore> normals;
    std::map<std::string, std::vector<LabeledScore>> abnormals;
    for (auto i : split.test_indices(f)) {
      const LabeledScore s{score(model, ds[i].posterior.mean()),
                           ds[i].label != options.normal_label};
      if (s.abnormal) {
        abnormals[ds[i].label].push_back(s);
      } else {
        normals.push_back(s);
      }
    }
    if (normals.empty()) continue;  // no held-out normals: nothing to compare against

    std::vector<LabeledScore> pooled = normals;
    for (const auto& [label, s] : abnormals) pooled.insert(pooled.end(), s.begin(), s.end());
    if (has_both(pooled)) overall.add(pooled, threshold);
    for (const auto& [label, s] : abnormals) {
      std::vector<LabeledScore> pair = normals;
      pair.insert(pair.end(), s.begin(), s.end());
      per_class[label].add(pair, threshold);
    }
  }

  table.overall = overall.finish("overall");
  for (const auto& [label, acc] : per_class) table.per_class.push_back(acc.finish(label));
  return table;
}

OccEvaluation evaluate_scores(std::span<const ScoredRecord> scores, const std::string& normal_label,
                              std::optional<double> threshold) {
  OccEvaluation ev;
  ev.normal_label = normal_label;
  std::vector<LabeledScore> all;
  std::vector<LabeledScore> normals;
  std::map<std::string, std::vector<LabeledScore>> abnormals;
  for (const auto& s : scores) {
    const LabeledScore ls{s.score, s.label != normal_label};
    all.push_back(ls);
    if (ls.abnormal) {
      abnormals[s.label].push_back(ls);
    } else {
      normals.push_back(ls);
    }
  }
  ev.n_normal = normals.size();
  ev.n_abnormal = all.size() - normals.size();
  if (ev.n_normal == 0) {
    throw ValidationError("eval-occ: no records labelled '" + normal_label + "'");
  }
  if (ev.n_abnormal == 0) throw ValidationError("eval-occ: no abnormal records");
  ev.roc = roc_auc(all);
  ev.threshold_from_youden = !threshold.has_value();
  ev.threshold = threshold ? *threshold : youden_threshold(all);
  ev.confusion = confusion_metrics(all, ev.threshold);
  for (const auto& [label, s] : abnormals) {
    std::vector<LabeledScore> pair = normals;
    pair.insert(pair.end(), s.begin(), s.end());
    ev.per_class.push_back({label, s.size(), roc_auc(pair).auc, confusion_metrics(pair, ev.threshold)});
  }
  return ev;
}

std::string sweep_filename(int beta, int dim, const std::string& aug) {
  return "emb_b" + std::to_string(beta) + "_d" + std::to_string(dim) + "_" + aug + ".jsonl";
}

std::vector<SweepEntry> sweep_crossval(const std::filesystem::path& dir, const std::vector<int>& betas,
                                       const std::vector<int>& dims,
                                       const std::vector<std::string>& augs,
                                       const CrossvalOptions& options) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("sweep: '" + dir.string() + "' is not a directory");
  }
  std::vector<SweepEntry> out;
  for (int beta : betas) {
    for (int dim : dims) {
      for (const auto& aug : augs) {
        SweepEntry e{beta, dim, aug, sweep_filename(beta, dim, aug), false, {}};
        const auto path = dir / e.file;
        if (std::filesystem::exists(path)) {
          const Dataset ds = read_dataset(path, DataFormat::jsonl);
          if (ds.dim() != dim) {
            throw ValidationError("sweep: " + e.file + " has latent dimension " +
                                  std::to_string(ds.dim()) + ", expected " + std::to_string(dim));
          }
          e.present = true;
          const auto table = crossval_occ(ds, options);
          e.auc = table.overall.auc;
        }
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

}  // namespace crsdkit
