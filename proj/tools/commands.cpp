#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "crsdkit/clustering.hpp"
#include "crsdkit/crossval.hpp"
#include "crsdkit/crsd.hpp"
#include "crsdkit/dataset.hpp"
#include "crsdkit/elbo_audit.hpp"
#include "crsdkit/error.hpp"
#include "crsdkit/fixture.hpp"
#include "crsdkit/model_io.hpp"
#include "crsdkit/occ.hpp"
#include "crsdkit/report.hpp"
#include "crsdkit/traverse.hpp"
#include "json.hpp"

namespace crsdkit::cli {

using nlohmann::json;

std::string config_hash(const std::string& command,
                        std::vector<std::pair<std::string, std::string>> options) {
  std::sort(options.begin(), options.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // field separator
    h *= 0x100000001b3ULL;
  };
  feed(command);
  for (const auto& [k, v] : options) {
    feed(k);
    feed(v);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Options that only say where results go; they do not change the results.
const std::set<std::string> kOutputOptions{"--out", "--json", "--roc-csv"};

std::uint64_t hash_value(const std::string& hex) { return std::stoull(hex, nullptr, 16); }

Provenance provenance_of(const CLI::App& sub) {
  std::vector<std::pair<std::string, std::string>> opts;
  for (const CLI::Option* o : sub.get_options()) {
    const std::string name = o->get_name();
    if (name == "--help" || kOutputOptions.count(name)) continue;
    std::string value;
    if (o->count() > 0) {
      for (const auto& r : o->results()) value += r + "\x1f";
    } else {
      value = o->get_default_str();
    }
    opts.emplace_back(name, value);
  }
  return {sub.get_name(), config_hash(sub.get_name(), std::move(opts))};
}

Dataset load(const std::string& path, const std::string& format) {
  return format.empty() ? read_dataset(path) : read_dataset(path, parse_format(format));
}

std::vector<json> read_json_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected a JSON object");
    }
    if (j.contains("_provenance")) continue;
    j["_line"] = lineno;
    out.push_back(std::move(j));
  }
  return out;
}

template <typename T>
T field(const json& j, const char* name, const std::string& path) {
  const auto where = path + ":" + std::to_string(j.at("_line").get<std::size_t>()) + ": ";
  if (!j.contains(name)) throw ValidationError(where + "missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "field '" + name + "' has the wrong type");
  }
}

std::vector<ScoredRecord> read_scores(const std::string& path) {
  std::vector<ScoredRecord> out;
  for (const auto& j : read_json_lines(path)) {
    out.push_back({field<std::string>(j, "id", path), field<std::string>(j, "label", path),
                   field<double>(j, "score", path)});
  }
  if (out.empty()) throw ValidationError(path + ": no scores");
  return out;
}

std::vector<std::pair<std::string, int>> read_cluster_labels(const std::string& path) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& j : read_json_lines(path)) {
    out.emplace_back(field<std::string>(j, "id", path), field<int>(j, "cluster", path));
  }
  if (out.empty()) throw ValidationError(path + ": no cluster labels");
  return out;
}

// Report goes to --out if given, else to stdout. --json gets the twin.
void emit(std::ostream& out, const std::string& text_path, const std::string& text,
          const std::string& json_path, const std::string& json_text) {
  if (text_path.empty()) {
    out << text;
  } else {
    write_text_file(text_path, text);
  }
  if (!json_path.empty()) write_text_file(json_path, json_text);
}

std::vector<long> parse_int_list(const std::string& s, const char* what) {
  std::vector<long> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto end = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, end - pos);
    long v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
      throw ValidationError(std::string(what) + ": '" + tok + "' is not an integer");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct Context {
  std::ostream& out;
  Provenance prov;
};

// ---- subcommands ---------------------------------------------------------

struct FixtureArgs {
  std::string preset, out, format, normal = "NILM", abnormal = "ABN";
  std::size_t n = 600, k = 4;
  long dim = 8;
  double shift = 3.0, sep = 6.0;
  std::uint64_t seed = 0;
};

void do_fixture(const FixtureArgs& a, Context& c) {
  FixtureOptions o;
  o.preset = parse_preset(a.preset);
  o.n = a.n;
  o.dim = a.dim;
  o.shift = a.shift;
  o.sep = a.sep;
  o.k = a.k;
  o.seed = a.seed;
  o.normal_label = a.normal;
  o.abnormal_label = a.abnormal;
  const Dataset ds = make_fixture(o);
  const DataFormat fmt = a.format.empty() ? infer_format(a.out) : parse_format(a.format);
  std::ostringstream s;
  if (fmt == DataFormat::csv) {
    s << provenance_line(c.prov) << '\n';
    write_csv(s, ds);
  } else {
    s << provenance_jsonl(c.prov) << '\n';
    write_jsonl(s, ds);
  }
  write_text_file(a.out, s.str());
  std::map<std::string, std::size_t> counts;
  for (const auto& r : ds.records()) ++counts[r.label];
  c.out << "wrote " << ds.size() << " records (dim " << ds.dim() << ") to " << a.out << ":";
  for (const auto& [l, n] : counts) c.out << ' ' << l << '=' << n;
  c.out << '\n';
}

struct FitArgs {
  std::string in, format, normal = "NILM", estimator = "printed", out;
};

void do_fit(const FitArgs& a, Context& c) {
  const Dataset ds = load(a.in, a.format);
  const auto normals = select_label(ds, a.normal);
  if (normals.size() < 2) {
    throw ValidationError("fit-normal: " + std::to_string(normals.size()) + " records labelled '" +
                          a.normal + "'; at least 2 are needed");
  }
  const NormalModel m = fit_normal(normals, parse_estimator(a.estimator));
  write_model(std::filesystem::path(a.out), m, c.prov);
  c.out << "fitted " << m.n_fit << " records, dim " << m.dim() << ", jitter " << m.jitter_applied()
        << " -> " << a.out << '\n';
}

struct ScoreArgs {
  std::string model, in, format, out;
};

void do_score(const ScoreArgs& a, Context& c) {
  const NormalModel m = read_model(std::filesystem::path(a.model));
  const Dataset ds = load(a.in, a.format);
  if (ds.dim() != m.dim()) {
    throw ValidationError("score: model dimension " + std::to_string(m.dim()) +
                          " differs from data dimension " + std::to_string(ds.dim()));
  }
  const auto scores = score_dataset(m, ds);
  std::string s = provenance_jsonl(c.prov) + "\n";
  for (const auto& r : scores) {
    if (!std::isfinite(r.score)) throw NumericalError("score: non-finite score for record '" + r.id + "'");
    s += json{{"id", r.id}, {"label", r.label}, {"score", r.score}}.dump() + "\n";
  }
  write_text_file(a.out, s);
  c.out << "scored " << scores.size() << " records -> " << a.out << '\n';
}

struct EvalOccArgs {
  std::string scores, normal = "NILM", threshold = "youden", roc_csv, out, json_out;
  bool per_class = false;
};

void do_eval_occ(const EvalOccArgs& a, Context& c) {
  std::optional<double> thr;
  if (a.threshold != "youden") {
    double v = 0.0;
    const auto* b = a.threshold.data();
    const auto [p, ec] = std::from_chars(b, b + a.threshold.size(), v);
    if (ec != std::errc() || p != b + a.threshold.size() || !std::isfinite(v)) {
      throw ValidationError("--threshold must be 'youden' or a number, got '" + a.threshold + "'");
    }
    thr = v;
  }
  auto ev = evaluate_scores(read_scores(a.scores), a.normal, thr);
  if (!a.per_class) ev.per_class.clear();
  emit(c.out, a.out, occ_text(ev, c.prov), a.json_out, occ_json(ev, c.prov));
  if (!a.roc_csv.empty()) write_text_file(a.roc_csv, provenance_line(c.prov) + "\n" + roc_csv(ev.roc));
}

struct CrossvalArgs {
  std::string in, format, normal = "NILM", estimator = "printed", out, json_out;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

void do_crossval(const CrossvalArgs& a, Context& c) {
  const Dataset ds = load(a.in, a.format);
  CrossvalOptions o;
  o.folds = a.folds;
  o.normal_label = a.normal;
  o.seed = a.seed;
  o.estimator = parse_estimator(a.estimator);
  const auto t = crossval_occ(ds, o);
  emit(c.out, a.out, crossval_text(t, c.prov), a.json_out, crossval_json(t, c.prov));
}

std::vector<DiagGaussian> reference_set(const std::string& refs, const std::string& format,
                                        const Dataset& ds) {
  if (refs == "self") return ds.posteriors();
  const Dataset r = load(refs, format);
  if (r.dim() != ds.dim()) {
    throw ValidationError("reference dimension " + std::to_string(r.dim()) +
                          " differs from data dimension " + std::to_string(ds.dim()));
  }
  return r.posteriors();
}

struct MatrixArgs {
  std::string in, format, refs = "self", out;
};

void do_matrix(const MatrixArgs& a, Context& c) {
  const Dataset ds = load(a.in, a.format);
  const auto refs = reference_set(a.refs, a.format, ds);
  const auto targets = ds.posteriors();
  const ProfileMatrix m = build_profile_matrix(refs, targets);
  std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + a.out + "' for writing");
  write_profile_file(f, m, ds.dim(), hash_value(c.prov.config_hash));
  c.out << "profile matrix " << m.refs() << " x " << m.targets() << " -> " << a.out << '\n';
}

struct ClusterArgs {
  std::string in, format, algorithm = "agg-sm", linkage = "average", refs = "self", matrix, out;
  std::size_t k = 100, min_pts = 5;
  double eps = 0.5;
  int n_init = 10, max_iter = 300;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void do_cluster(const ClusterArgs& a, Context& c) {
  const Dataset ds = load(a.in, a.format);
  ClusterAssignment assign;
  if (a.algorithm == "agg-sm") {
    ProfileMatrix profiles(Eigen::MatrixXd(1, 1));
    if (!a.matrix.empty()) {
      std::ifstream f(a.matrix, std::ios::binary);
      if (!f) throw IoError("cannot open '" + a.matrix + "'");
      auto pf = read_profile_file(f);
      if (pf.matrix.targets() != static_cast<Eigen::Index>(ds.size()) || pf.dim != ds.dim()) {
        throw ValidationError("cluster: profile matrix does not match '" + a.in + "'");
      }
      profiles = std::move(pf.matrix);
    } else {
      const auto refs = reference_set(a.refs, a.format, ds);
      profiles = build_profile_matrix(refs, ds.posteriors());
    }
    assign = cut(agglomerative(profiles.pairwise(), parse_linkage(a.linkage)), a.k);
  } else if (a.algorithm == "agg-em") {
    assign = cut(agglomerative(euclidean_distances(ds.means()), parse_linkage(a.linkage)), a.k);
  } else if (a.algorithm == "kmeans") {
    if (!a.seed_given) throw ValidationError("cluster: --seed is required for kmeans");
    KMeansOptions o;
    o.k = a.k;
    o.seed = a.seed;
    o.n_init = a.n_init;
    o.max_iter = a.max_iter;
    assign = kmeans(ds.means(), o).assignment;
  } else if (a.algorithm == "dbscan") {
    assign = dbscan(ds.means(), a.eps, a.min_pts);
  } else {
    throw ValidationError("unknown algorithm '" + a.algorithm +
                          "' (expected agg-sm, agg-em, kmeans or dbscan)");
  }
  std::string s = provenance_jsonl(c.prov) + "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    s += json{{"id", ds[i].id}, {"cluster", assign.labels[i]}}.dump() + "\n";
  }
  write_text_file(a.out, s);
  const auto noise = std::count(assign.labels.begin(), assign.labels.end(), ClusterAssignment::kNoise);
  c.out << a.algorithm << ": " << assign.n_clusters << " clusters, " << noise << " noise -> "
        << a.out << '\n';
}

struct EvalClusterArgs {
  std::string labels, truth, format, noise = "singleton", out, json_out;
};

void do_eval_cluster(const EvalClusterArgs& a, Context& c) {
  const auto pred = read_cluster_labels(a.labels);
  const Dataset ds = load(a.truth, a.format);
  std::vector<std::pair<std::string, std::string>> truth;
  for (const auto& r : ds.records()) truth.emplace_back(r.id, r.label);
  const auto rep = v_measure(truth, pred, parse_noise_policy(a.noise));
  emit(c.out, a.out, cluster_score_text(rep, c.prov), a.json_out, cluster_score_json(rep, c.prov));
}

struct ElboArgs {
  std::string in, format, objective, out, json_out;
  std::size_t samples = 50;
  double beta = 1.0, recon = 0.0;
  std::uint64_t seed = 0;
};

void do_elbo(const ElboArgs& a, Context& c) {
  const Dataset ds = load(a.in, a.format);
  AuditOptions o;
  o.samples_per_point = a.samples;
  o.beta = a.beta;
  o.seed = a.seed;
  const auto audit_result = audit(ds.posteriors(), o);
  std::optional<ObjectiveSummary> obj;
  if (!a.objective.empty()) {
    const Objective m = parse_objective(a.objective);
    obj = ObjectiveSummary{m, a.recon, objective_value(audit_result, a.recon, m, a.beta)};
  }
  emit(c.out, a.out, elbo_text(audit_result, obj, c.prov), a.json_out,
       elbo_json(audit_result, obj, c.prov));
}

struct TraverseArgs {
  std::string model, dims = "all", plane, out;
  std::size_t steps = 10;
};

void do_traverse(const TraverseArgs& a, Context& c) {
  const NormalModel m = read_model(std::filesystem::path(a.model));
  std::string s = provenance_jsonl(c.prov) + "\n";
  std::size_t count = 0;
  if (!a.plane.empty()) {
    const auto ab = parse_int_list(a.plane, "--plane");
    if (ab.size() != 2) throw ValidationError("--plane takes two dimensions, e.g. 2,3");
    const auto grid = pairwise_plane(m, ab[0], ab[1], a.steps);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j, ++count) {
        const auto& z = grid[i][j];
        s += json{{"dim", ab}, {"step", {i, j}}, {"z", std::vector<double>(z.data(), z.data() + z.size())}}
                 .dump() +
             "\n";
      }
    }
  } else {
    std::vector<Eigen::Index> dims;
    if (a.dims != "all") {
      for (long d : parse_int_list(a.dims, "--dims")) dims.push_back(d);
    }
    for (const auto& g : traversal(m, dims, a.steps)) {
      for (std::size_t j = 0; j < g.values.size(); ++j, ++count) {
        const auto& z = g.values[j];
        s += json{{"dim", g.dim_index}, {"step", j}, {"z", std::vector<double>(z.data(), z.data() + z.size())}}
                 .dump() +
             "\n";
      }
    }
  }
  write_text_file(a.out, s);
  c.out << "wrote " << count << " grid points -> " << a.out << '\n';
}

struct IdentityArgs {
  std::size_t trials = 1000, jsd_trials = 100, jsd_samples = 10000;
  std::string dims = "1,8", out, json_out;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

int do_identities(const IdentityArgs& a, Context& c) {
  IdentityOptions o;
  o.trials = a.trials;
  o.seed = a.seed;
  o.jsd_trials = a.jsd_trials;
  o.jsd_samples = a.jsd_samples;
  o.dims.clear();
  for (long d : parse_int_list(a.dims, "--dims")) {
    if (d < 1) throw ValidationError("--dims entries must be >= 1");
    o.dims.push_back(static_cast<std::size_t>(d));
  }
  const auto r = verify_identities(o);
  emit(c.out, a.out, identity_text(r, c.prov), a.json_out, identity_json(r, c.prov));
  bool ok = r.jsd.violations == 0;
  for (const auto& chk : r.checks) ok = ok && chk.max_violation <= a.tol;
  return ok ? kOk : kNumerical;
}

struct SweepArgs {
  std::string dir, betas = "1,4,16", dims = "8,32,128", augs = "none,fa,fab", normal = "NILM",
                   estimator = "printed", out, json_out;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

void do_sweep(const SweepArgs& a, Context& c) {
  std::vector<int> betas, dims;
  for (long b : parse_int_list(a.betas, "--betas")) betas.push_back(static_cast<int>(b));
  for (long d : parse_int_list(a.dims, "--dims")) dims.push_back(static_cast<int>(d));
  const auto augs = split_list(a.augs);
  if (augs.empty()) throw ValidationError("--augs is empty");
  CrossvalOptions o;
  o.folds = a.folds;
  o.normal_label = a.normal;
  o.seed = a.seed;
  o.estimator = parse_estimator(a.estimator);
  const auto entries = sweep_crossval(a.dir, betas, dims, augs, o);
  if (std::none_of(entries.begin(), entries.end(), [](const SweepEntry& e) { return e.present; })) {
    throw IoError("sweep: no emb_b*_d*_*.jsonl files found in '" + a.dir + "'");
  }
  emit(c.out, a.out, sweep_text(entries, c.prov), a.json_out, sweep_json(entries, c.prov));
}

void add_report_outputs(CLI::App* s, std::string& out, std::string& json_out) {
  s->add_option("--out", out, "Text report path (default: stdout)");
  s->add_option("--json", json_out, "Machine-readable twin of the report");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-class abnormality scoring and CRSD clustering on latent posteriors", "crsdkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // Handlers return an exit code; the parsed subcommand picks one.
  std::map<CLI::App*, std::function<int(Context&)>> handlers;

  FixtureArgs fx;
  {
    auto* s = app.add_subcommand("fixture", "Generate a synthetic embedding dataset");
    s->add_option("--preset", fx.preset, "two-class | k-blobs | degenerate")->required();
    s->add_option("--n", fx.n, "Number of records")->capture_default_str();
    s->add_option("--dim", fx.dim, "Latent dimension")->capture_default_str();
    s->add_option("--shift", fx.shift, "two-class: abnormal mean shift")->capture_default_str();
    s->add_option("--sep", fx.sep, "k-blobs: minimum centre distance")->capture_default_str();
    s->add_option("--k", fx.k, "k-blobs: number of blobs")->capture_default_str();
    s->add_option("--seed", fx.seed, "Random seed")->required();
    s->add_option("--normal-label", fx.normal)->capture_default_str();
    s->add_option("--abnormal-label", fx.abnormal)->capture_default_str();
    s->add_option("--format", fx.format, "jsonl | csv (default: from extension)");
    s->add_option("--out", fx.out, "Output dataset")->required();
    handlers[s] = [&](Context& c) { do_fixture(fx, c); return kOk; };
  }
  FitArgs fit;
  {
    auto* s = app.add_subcommand("fit-normal", "Fit the normal-class Gaussian");
    s->add_option("--in", fit.in, "Embedding dataset")->required();
    s->add_option("--format", fit.format, "jsonl | csv (default: from extension)");
    s->add_option("--normal-label", fit.normal)->capture_default_str();
    s->add_option("--estimator", fit.estimator, "printed | total-variance")->capture_default_str();
    s->add_option("--out", fit.out, "Model JSON")->required();
    handlers[s] = [&](Context& c) { do_fit(fit, c); return kOk; };
  }
  ScoreArgs sc;
  {
    auto* s = app.add_subcommand("score", "Score records against a fitted model");
    s->add_option("--model", sc.model)->required();
    s->add_option("--in", sc.in)->required();
    s->add_option("--format", sc.format);
    s->add_option("--out", sc.out, "scores.jsonl")->required();
    handlers[s] = [&](Context& c) { do_score(sc, c); return kOk; };
  }
  EvalOccArgs eo;
  {
    auto* s = app.add_subcommand("eval-occ", "AUC and confusion metrics from scores");
    s->add_option("--scores", eo.scores)->required();
    s->add_option("--normal-label", eo.normal)->capture_default_str();
    s->add_option("--threshold", eo.threshold, "youden or a number")->capture_default_str();
    s->add_flag("--per-class", eo.per_class, "One row per abnormal label");
    s->add_option("--roc-csv", eo.roc_csv, "Write the ROC curve as CSV");
    add_report_outputs(s, eo.out, eo.json_out);
    handlers[s] = [&](Context& c) { do_eval_occ(eo, c); return kOk; };
  }
  CrossvalArgs cv;
  {
    auto* s = app.add_subcommand("crossval", "Stratified k-fold one-class evaluation");
    s->add_option("--in", cv.in)->required();
    s->add_option("--format", cv.format);
    s->add_option("--folds", cv.folds)->capture_default_str();
    s->add_option("--normal-label", cv.normal)->capture_default_str();
    s->add_option("--estimator", cv.estimator)->capture_default_str();
    s->add_option("--seed", cv.seed)->required();
    add_report_outputs(s, cv.out, cv.json_out);
    handlers[s] = [&](Context& c) { do_crossval(cv, c); return kOk; };
  }
  MatrixArgs mx;
  {
    auto* s = app.add_subcommand("crsd-matrix", "Cross-entropy profile matrix");
    s->add_option("--in", mx.in)->required();
    s->add_option("--format", mx.format);
    s->add_option("--refs", mx.refs, "self or a dataset path")->capture_default_str();
    s->add_option("--out", mx.out, "matrix.bin")->required();
    handlers[s] = [&](Context& c) { do_matrix(mx, c); return kOk; };
  }
  ClusterArgs cl;
  {
    auto* s = app.add_subcommand("cluster", "Cluster posteriors");
    s->add_option("--in", cl.in)->required();
    s->add_option("--format", cl.format);
    s->add_option("--algorithm", cl.algorithm, "agg-sm | agg-em | kmeans | dbscan")
        ->capture_default_str();
    s->add_option("--k", cl.k, "Number of clusters")->capture_default_str();
    s->add_option("--linkage", cl.linkage, "single | complete | average")->capture_default_str();
    s->add_option("--refs", cl.refs, "agg-sm: self or a dataset path")->capture_default_str();
    s->add_option("--matrix", cl.matrix, "agg-sm: precomputed profile matrix");
    auto* seed_opt = s->add_option("--seed", cl.seed, "Random seed (kmeans)");
    s->add_option("--n-init", cl.n_init)->capture_default_str();
    s->add_option("--max-iter", cl.max_iter)->capture_default_str();
    s->add_option("--eps", cl.eps)->capture_default_str();
    s->add_option("--min-pts", cl.min_pts)->capture_default_str();
    s->add_option("--out", cl.out, "labels.jsonl")->required();
    handlers[s] = [&, seed_opt](Context& c) {
      cl.seed_given = seed_opt->count() > 0;
      do_cluster(cl, c);
      return kOk;
    };
  }
  EvalClusterArgs ec;
  {
    auto* s = app.add_subcommand("eval-cluster", "Homogeneity, completeness, V-measure");
    s->add_option("--labels", ec.labels, "labels.jsonl from cluster")->required();
    s->add_option("--truth", ec.truth, "Dataset with true labels")->required();
    s->add_option("--format", ec.format);
    s->add_option("--noise", ec.noise, "singleton | single-cluster")->capture_default_str();
    add_report_outputs(s, ec.out, ec.json_out);
    handlers[s] = [&](Context& c) { do_eval_cluster(ec, c); return kOk; };
  }
  ElboArgs el;
  {
    auto* s = app.add_subcommand("elbo-audit", "Decompose the KL-to-prior term");
    s->add_option("--in", el.in)->required();
    s->add_option("--format", el.format);
    s->add_option("--samples", el.samples, "Samples per point")->capture_default_str();
    s->add_option("--beta", el.beta)->capture_default_str();
    s->add_option("--objective", el.objective, "vae | beta-vae | beta-tcvae");
    s->add_option("--recon", el.recon, "Reconstruction log-likelihood")->capture_default_str();
    s->add_option("--seed", el.seed)->required();
    add_report_outputs(s, el.out, el.json_out);
    handlers[s] = [&](Context& c) { do_elbo(el, c); return kOk; };
  }
  TraverseArgs tv;
  {
    auto* s = app.add_subcommand("traverse", "Latent traversal grid around the fitted mean");
    s->add_option("--model", tv.model)->required();
    s->add_option("--dims", tv.dims, "all or a comma list")->capture_default_str();
    s->add_option("--steps", tv.steps)->capture_default_str();
    s->add_option("--plane", tv.plane, "Two dimensions a,b for a 2-D grid");
    s->add_option("--out", tv.out, "grid.jsonl")->required();
    handlers[s] = [&](Context& c) { do_traverse(tv, c); return kOk; };
  }
  IdentityArgs id;
  {
    auto* s = app.add_subcommand("verify-identities", "Check CRSD identities on random Gaussians");
    s->add_option("--trials", id.trials)->capture_default_str();
    s->add_option("--dims", id.dims)->capture_default_str();
    s->add_option("--jsd-trials", id.jsd_trials)->capture_default_str();
    s->add_option("--jsd-samples", id.jsd_samples)->capture_default_str();
    s->add_option("--tol", id.tol)->capture_default_str();
    s->add_option("--seed", id.seed)->required();
    add_report_outputs(s, id.out, id.json_out);
    handlers[s] = [&](Context& c) { return do_identities(id, c); };
  }
  SweepArgs sw;
  {
    auto* s = app.add_subcommand("sweep", "Cross-validated AUC over emb_b*_d*_*.jsonl files");
    s->add_option("--dir", sw.dir)->required();
    s->add_option("--betas", sw.betas)->capture_default_str();
    s->add_option("--dims", sw.dims)->capture_default_str();
    s->add_option("--augs", sw.augs)->capture_default_str();
    s->add_option("--folds", sw.folds)->capture_default_str();
    s->add_option("--normal-label", sw.normal)->capture_default_str();
    s->add_option("--estimator", sw.estimator)->capture_default_str();
    s->add_option("--seed", sw.seed)->required();
    add_report_outputs(s, sw.out, sw.json_out);
    handlers[s] = [&](Context& c) { do_sweep(sw, c); return kOk; };
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  for (auto& [sub, handler] : handlers) {
    if (!sub->parsed()) continue;
    Context ctx{out, provenance_of(*sub)};
    try {
      return handler(ctx);
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kValidation;
    } catch (const IoError& e) {
      err << "i/o error: " << e.what() << '\n';
      return kIo;
    } catch (const NumericalError& e) {
      err << "numerical error: " << e.what() << '\n';
      return kNumerical;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kValidation;
    }
  }
  return kValidation;
}

}  // namespace crsdkit::cli
