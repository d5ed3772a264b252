#include "crsdkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "crsdkit/error.hpp"

namespace crsdkit {

NoisePolicy parse_noise_policy(std::string_view name) {
  if (name == "singleton") return NoisePolicy::singleton;
  if (name == "single-cluster") return NoisePolicy::single_cluster;
  throw ValidationError("unknown noise policy '" + std::string(name) +
                        "' (expected singleton or single-cluster)");
}

namespace {

double entropy_of(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

}  // namespace

ClusterScoreReport v_measure(std::span<const std::string> truth, std::span<const int> pred,
                             NoisePolicy noise) {
  if (truth.size() != pred.size()) {
    throw ValidationError("v_measure: " + std::to_string(truth.size()) + " truth labels but " +
                          std::to_string(pred.size()) + " predictions");
  }
  if (truth.empty()) throw ValidationError("v_measure: no labels");

  ClusterScoreReport rep;
  std::map<std::string, std::size_t> class_index;
  for (const auto& t : truth) class_index.emplace(t, 0);
  for (auto& [name, idx] : class_index) {
    idx = rep.classes.size();
    rep.classes.push_back(name);
  }

  // Cluster columns: regular labels in ascending order, then noise columns.
  std::map<int, std::size_t> cluster_index;
  for (int p : pred) {
    if (p >= 0) cluster_index.emplace(p, 0);
  }
  for (auto& [label, idx] : cluster_index) {
    idx = rep.clusters.size();
    rep.clusters.push_back(std::to_string(label));
  }
  std::vector<std::size_t> column(pred.size());
  std::size_t noise_column = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= 0) {
      column[i] = cluster_index.at(pred[i]);
    } else if (noise == NoisePolicy::single_cluster) {
      if (noise_column == std::numeric_limits<std::size_t>::max()) {
        noise_column = rep.clusters.size();
        rep.clusters.push_back("noise");
      }
      column[i] = noise_column;
    } else {
      column[i] = rep.clusters.size();
      rep.clusters.push_back("noise:" + std::to_string(i));
    }
  }

  const std::size_t nc = rep.classes.size();
  const std::size_t nk = rep.clusters.size();
  rep.contingency.assign(nc, std::vector<std::size_t>(nk, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++rep.contingency[class_index.at(truth[i])][column[i]];
  }

  const auto n = static_cast<double>(truth.size());
  std::vector<double> class_tot(nc, 0.0), cluster_tot(nk, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t k = 0; k < nk; ++k) {
      class_tot[c] += static_cast<double>(rep.contingency[c][k]);
      cluster_tot[k] += static_cast<double>(rep.contingency[c][k]);
    }
  }
  const double h_c = entropy_of(class_tot, n);
  const double h_k = entropy_of(cluster_tot, n);
  double h_c_given_k = 0.0;
  double h_k_given_c = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t k = 0; k < nk; ++k) {
      const auto a = static_cast<double>(rep.contingency[c][k]);
      if (a == 0.0) continue;
      h_c_given_k -= (a / n) * std::log(a / cluster_tot[k]);
      h_k_given_c -= (a / n) * std::log(a / class_tot[c]);
    }
  }
  rep.homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  rep.completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  const double sum = rep.homogeneity + rep.completeness;
  rep.v_measure = sum > 0.0 ? 2.0 * rep.homogeneity * rep.completeness / sum : 0.0;
  return rep;
}

ClusterScoreReport v_measure(std::span<const std::pair<std::string, std::string>> truth,
                             std::span<const std::pair<std::string, int>> pred,
                             NoisePolicy noise) {
  std::map<std::string_view, std::string_view> truth_by_id;
  for (const auto& [id, label] : truth) {
    if (!truth_by_id.emplace(id, label).second) {
      throw ValidationError("v_measure: duplicate truth id '" + id + "'");
    }
  }
  if (truth.size() != pred.size()) {
    throw ValidationError("v_measure: truth has " + std::to_string(truth.size()) +
                          " ids but predictions have " + std::to_string(pred.size()));
  }
  std::vector<std::string> t;
  std::vector<int> p;
  std::map<std::string_view, bool> seen;
  for (const auto& [id, cluster] : pred) {
    auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) {
      throw ValidationError("v_measure: predicted id '" + id + "' has no truth label");
    }
    if (!seen.emplace(id, true).second) {
      throw ValidationError("v_measure: duplicate predicted id '" + id + "'");
    }
    t.emplace_back(it->second);
    p.push_back(cluster);
  }
  return v_measure(t, p, noise);
}

double RocCurve::trapezoid_auc() const {
  double area = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i) {
    area += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
  }
  return area;
}

RocCurve roc_auc(std::span<const LabeledScore> scores) {
  std::size_t n_pos = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw ValidationError("roc_auc: non-finite score");
    n_pos += s.abnormal ? 1 : 0;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("roc_auc: both normal and abnormal scores are required");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });

  // Average ranks over tie groups (1-based).
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (scores[order[t]].abnormal) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);

  RocCurve roc;
  roc.auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);

  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.tpr.push_back(0.0);
  roc.fpr.push_back(0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    const double thr = scores[order[i - 1]].score;
    while (i > 0 && scores[order[i - 1]].score == thr) {
      (scores[order[i - 1]].abnormal ? tp : fp) += 1;
      --i;
    }
    roc.thresholds.push_back(thr);
    roc.tpr.push_back(static_cast<double>(tp) / np);
    roc.fpr.push_back(static_cast<double>(fp) / nn);
  }
  return roc;
}

ConfusionMetrics confusion_metrics(std::span<const LabeledScore> scores, double threshold) {
  if (!std::isfinite(threshold)) throw ValidationError("confusion_metrics: threshold not finite");
  if (scores.empty()) throw ValidationError("confusion_metrics: no scores");
  ConfusionMetrics m;
  for (const auto& s : scores) {
    const bool predicted = s.score > threshold;
    if (s.abnormal) {
      (predicted ? m.tp : m.fn) += 1;
    } else {
      (predicted ? m.fp : m.tn) += 1;
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  m.accuracy = ratio(m.tp + m.tn, scores.size());
  m.sensitivity = ratio(m.tp, m.tp + m.fn);
  m.specificity = ratio(m.tn, m.tn + m.fp);
  m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
  return m;
}

double youden_threshold(std::span<const LabeledScore> scores) {
  if (scores.empty()) throw ValidationError("youden_threshold: no scores");
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.score);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.push_back(values.front() - 1.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    candidates.push_back(0.5 * (values[i - 1] + values[i]));
  }
  double best_thr = candidates.back();
  double best_j = -std::numeric_limits<double>::infinity();
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    const auto m = confusion_metrics(scores, *it);
    const double j = m.sensitivity + m.specificity - 1.0;
    if (j > best_j) {
      best_j = j;
      best_thr = *it;
    }
  }
  return best_thr;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace crsdkit
