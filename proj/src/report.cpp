#include "crsdkit/report.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "crsdkit/error.hpp"
#include "json.hpp"

namespace crsdkit {

using nlohmann::json;

namespace {

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

json prov(const Provenance& p) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", p.command},
          {"config", p.config_hash}};
}

json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}, {"n", m.count}}; }

json to_json(const ConfusionMetrics& m) {
  return {{"tp", m.tp},           {"fp", m.fp},
          {"tn", m.tn},           {"fn", m.fn},
          {"accuracy", m.accuracy}, {"f1", m.f1},
          {"sensitivity", m.sensitivity}, {"specificity", m.specificity}};
}

json to_json(const CrossvalRow& r) {
  return {{"label", r.label},        {"folds", r.folds_present},
          {"auc", to_json(r.auc)},   {"accuracy", to_json(r.accuracy)},
          {"f1", to_json(r.f1)},     {"sensitivity", to_json(r.sensitivity)},
          {"specificity", to_json(r.specificity)}};
}

json to_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string row_text(const CrossvalRow& r) {
  return fmt("%-16s %5zu  %-13s %-13s %-13s %-13s %-13s\n", r.label.c_str(), r.folds_present,
             format_mean_std(r.auc).c_str(), format_mean_std(r.accuracy).c_str(),
             format_mean_std(r.f1).c_str(), format_mean_std(r.sensitivity).c_str(),
             format_mean_std(r.specificity).c_str());
}

}  // namespace

std::string provenance_line(const Provenance& p) {
  return std::string("# ") + kToolName + " " + kToolVersion + " " + p.command +
         " config=" + p.config_hash;
}

std::string provenance_jsonl(const Provenance& p) {
  return json{{"_provenance", prov(p)}}.dump();
}

std::string format_mean_std(const MeanStd& m, int digits) {
  if (m.count == 0) return "-";
  return fmt("%.*f±%.*f", digits, m.mean, digits, m.std);
}

std::string crossval_text(const CrossvalTable& t, const Provenance& p) {
  std::string s = provenance_line(p) + "\n";
  s += fmt("records %zu  dim %ld  folds %zu  normal %s  estimator %s  seed %llu\n", t.n_records,
           static_cast<long>(t.dim), t.options.folds, t.options.normal_label.c_str(),
           std::string(to_string(t.options.estimator)).c_str(),
           static_cast<unsigned long long>(t.options.seed));
  s += fmt("%-16s %5s  %-13s %-13s %-13s %-13s %-13s\n", "class", "folds", "auc", "accuracy", "f1",
           "sensitivity", "specificity");
  s += row_text(t.overall);
  for (const auto& r : t.per_class) s += row_text(r);
  s += "thresholds";
  for (double x : t.thresholds) s += fmt(" %.6g", x);
  s += "\n";
  if (!t.undersized_labels.empty()) {
    s += "undersized";
    for (const auto& l : t.undersized_labels) s += " " + l;
    s += "\n";
  }
  return s;
}

std::string crossval_json(const CrossvalTable& t, const Provenance& p) {
  json rows = json::array();
  for (const auto& r : t.per_class) rows.push_back(to_json(r));
  return dump({{"provenance", prov(p)},
               {"records", t.n_records},
               {"dim", t.dim},
               {"folds", t.options.folds},
               {"normal_label", t.options.normal_label},
               {"estimator", to_string(t.options.estimator)},
               {"seed", t.options.seed},
               {"overall", to_json(t.overall)},
               {"per_class", rows},
               {"thresholds", t.thresholds},
               {"undersized_labels", t.undersized_labels}});
}

std::string occ_text(const OccEvaluation& e, const Provenance& p) {
  std::string s = provenance_line(p) + "\n";
  s += fmt("normal %s  n_normal %zu  n_abnormal %zu\n", e.normal_label.c_str(), e.n_normal,
           e.n_abnormal);
  s += fmt("threshold %.6g (%s)\n", e.threshold, e.threshold_from_youden ? "youden" : "given");
  const auto line = [&](const std::string& name, std::size_t n, double auc,
                        const ConfusionMetrics& m) {
    return fmt("%-16s %6zu  auc %.4f  acc %.4f  f1 %.4f  sens %.4f  spec %.4f\n", name.c_str(), n,
               auc, m.accuracy, m.f1, m.sensitivity, m.specificity);
  };
  s += line("overall", e.n_normal + e.n_abnormal, e.roc.auc, e.confusion);
  for (const auto& c : e.per_class) s += line(c.label, c.count, c.auc, c.confusion);
  return s;
}

std::string occ_json(const OccEvaluation& e, const Provenance& p) {
  json rows = json::array();
  for (const auto& c : e.per_class) {
    rows.push_back({{"label", c.label}, {"n", c.count}, {"auc", c.auc},
                    {"confusion", to_json(c.confusion)}});
  }
  return dump({{"provenance", prov(p)},
               {"normal_label", e.normal_label},
               {"n_normal", e.n_normal},
               {"n_abnormal", e.n_abnormal},
               {"auc", e.roc.auc},
               {"threshold", e.threshold},
               {"threshold_rule", e.threshold_from_youden ? "youden" : "given"},
               {"confusion", to_json(e.confusion)},
               {"per_class", rows}});
}

std::string roc_csv(const RocCurve& roc) {
  std::string s = "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < roc.thresholds.size(); ++i) {
    const double t = roc.thresholds[i];
    s += (std::isinf(t) ? std::string("inf") : fmt("%.17g", t)) +
         fmt(",%.17g,%.17g\n", roc.fpr[i], roc.tpr[i]);
  }
  return s;
}

std::string identity_text(const IdentityReport& r, const Provenance& p) {
  std::string s = provenance_line(p) + "\n";
  s += fmt("seed %llu  dims", static_cast<unsigned long long>(r.seed));
  for (auto d : r.dims) s += fmt(" %zu", d);
  s += "  jeffreys " + r.jeffreys_convention + "\n";
  for (const auto& c : r.checks) {
    s += fmt("%-22s %-44s trials %6zu  max_violation %.3e\n", c.name.c_str(), c.relation.c_str(),
             c.trials, c.max_violation);
  }
  s += fmt("%-22s trials %zu  samples %zu  violations %zu  min_margin %.6g  max_se %.3e\n",
           "jsd_bound", r.jsd.trials, r.jsd.samples, r.jsd.violations, r.jsd.min_margin,
           r.jsd.max_jsd_se);
  return s;
}

std::string identity_json(const IdentityReport& r, const Provenance& p) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"relation", c.relation}, {"trials", c.trials},
                      {"max_violation", c.max_violation}});
  }
  return dump({{"provenance", prov(p)},
               {"seed", r.seed},
               {"dims", r.dims},
               {"jeffreys_convention", r.jeffreys_convention},
               {"checks", checks},
               {"jsd_bound",
                {{"trials", r.jsd.trials},
                 {"samples", r.jsd.samples},
                 {"violations", r.jsd.violations},
                 {"min_margin", r.jsd.min_margin},
                 {"max_jsd_se", r.jsd.max_jsd_se}}}});
}

namespace {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::vae: return "vae";
    case Objective::beta_vae: return "beta-vae";
    case Objective::beta_tcvae: return "beta-tcvae";
  }
  return "?";
}

}  // namespace

std::string elbo_text(const ElboAudit& a, const std::optional<ObjectiveSummary>& obj,
                      const Provenance& p) {
  std::string s = provenance_line(p) + "\n";
  s += fmt("points %zu  samples/point %zu  samples %zu\n", a.n_points, a.samples_per_point,
           a.n_samples);
  const auto est = [&](const char* name, const Estimate& e) {
    return fmt("%-18s %12.6f  se %.6f\n", name, e.value, e.se);
  };
  s += fmt("%-18s %12.6f\n", "kl_closed_form", a.kl_to_prior);
  s += est("kl_monte_carlo", a.kl_to_prior_mc);
  s += est("mutual_info", a.mutual_info);
  s += est("total_correlation", a.total_correlation);
  s += est("dimwise_kl", a.dimwise_kl);
  s += est("residual", a.residual);
  s += fmt("residual/se %.3f\n", a.residual.se > 0.0 ? a.residual.value / a.residual.se : 0.0);
  s += fmt("alpha %g  beta %g  gamma %g\n", a.alpha, a.beta, a.gamma);
  if (obj) {
    s += fmt("objective %s  recon %.6f  value %.6f\n", objective_name(obj->model),
             obj->recon_loglik, obj->value);
  }
  return s;
}

std::string elbo_json(const ElboAudit& a, const std::optional<ObjectiveSummary>& obj,
                      const Provenance& p) {
  json j{{"provenance", prov(p)},
         {"n_points", a.n_points},
         {"samples_per_point", a.samples_per_point},
         {"n_samples", a.n_samples},
         {"kl_closed_form", a.kl_to_prior},
         {"kl_monte_carlo", to_json(a.kl_to_prior_mc)},
         {"mutual_info", to_json(a.mutual_info)},
         {"total_correlation", to_json(a.total_correlation)},
         {"dimwise_kl", to_json(a.dimwise_kl)},
         {"residual", to_json(a.residual)},
         {"alpha", a.alpha},
         {"beta", a.beta},
         {"gamma", a.gamma}};
  if (obj) {
    j["objective"] = {{"model", objective_name(obj->model)},
                      {"recon_loglik", obj->recon_loglik},
                      {"value", obj->value}};
  }
  return dump(j);
}

std::string cluster_score_text(const ClusterScoreReport& r, const Provenance& p) {
  std::string s = provenance_line(p) + "\n";
  s += fmt("homogeneity %.6f\ncompleteness %.6f\nv_measure %.6f\n", r.homogeneity, r.completeness,
           r.v_measure);
  s += fmt("classes %zu  clusters %zu\n", r.classes.size(), r.clusters.size());
  return s;
}

std::string cluster_score_json(const ClusterScoreReport& r, const Provenance& p) {
  return dump({{"provenance", prov(p)},
               {"homogeneity", r.homogeneity},
               {"completeness", r.completeness},
               {"v_measure", r.v_measure},
               {"classes", r.classes},
               {"clusters", r.clusters},
               {"contingency", r.contingency}});
}

std::string sweep_text(std::span<const SweepEntry> entries, const Provenance& p) {
  std::vector<std::string> augs;
  std::set<std::string> seen;
  std::vector<std::pair<int, int>> rows;
  std::set<std::pair<int, int>> seen_rows;
  std::map<std::tuple<int, int, std::string>, const SweepEntry*> cell;
  for (const auto& e : entries) {
    if (seen.insert(e.aug).second) augs.push_back(e.aug);
    if (seen_rows.insert({e.beta, e.dim}).second) rows.emplace_back(e.beta, e.dim);
    cell[{e.beta, e.dim, e.aug}] = &e;
  }
  std::string s = provenance_line(p) + "\n";
  s += fmt("%6s %6s", "beta", "dim");
  for (const auto& a : augs) s += fmt("  %-13s", a.c_str());
  s += "\n";
  for (auto [beta, dim] : rows) {
    s += fmt("%6d %6d", beta, dim);
    for (const auto& a : augs) {
      auto it = cell.find({beta, dim, a});
      const std::string v =
          it != cell.end() && it->second->present ? format_mean_std(it->second->auc) : "-";
      s += fmt("  %-13s", v.c_str());
    }
    s += "\n";
  }
  return s;
}

std::string sweep_json(std::span<const SweepEntry> entries, const Provenance& p) {
  json cells = json::array();
  for (const auto& e : entries) {
    json c{{"beta", e.beta}, {"dim", e.dim}, {"aug", e.aug}, {"file", e.file},
           {"present", e.present}};
    if (e.present) c["auc"] = to_json(e.auc);
    cells.push_back(c);
  }
  return dump({{"provenance", prov(p)}, {"cells", cells}});
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace crsdkit
