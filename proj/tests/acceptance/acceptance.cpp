// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here and not configurable.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "crsdkit/clustering.hpp"
#include "crsdkit/crossval.hpp"
#include "crsdkit/crsd.hpp"
#include "crsdkit/elbo_audit.hpp"
#include "crsdkit/fixture.hpp"
#include "crsdkit/metrics.hpp"
#include "crsdkit/random.hpp"

using namespace crsdkit;
namespace fs = std::filesystem;

namespace {

constexpr double kIdentityTol = 1e-9;
constexpr double kTriangleTol = 1e-9;
constexpr double kProfileTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kA1Seconds = 5.0;
constexpr double kA2Seconds = 30.0;
constexpr double kA6Seconds = 10.0;
constexpr double kA8Seconds = 60.0;
constexpr double kA6MinAuc = 0.95;
constexpr double kA6NullLo = 0.45;
constexpr double kA6NullHi = 0.55;
constexpr double kA8SeMultiple = 3.0;
constexpr int kA9MinWins = 4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

DiagGaussian random_posterior(Eigen::Index d, std::mt19937_64& rng, double mean_sd = 1.5,
                              double lv_lo = -1.5, double lv_hi = 1.5) {
  std::normal_distribution<double> n(0.0, mean_sd);
  std::uniform_real_distribution<double> u(lv_lo, lv_hi);
  Eigen::VectorXd mu(d), lv(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    mu[j] = n(rng);
    lv[j] = u(rng);
  }
  return DiagGaussian::from_logvar(mu, lv);
}

template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome a1() {
  IdentityOptions o;
  o.trials = 1000;
  o.seed = 20240101;
  o.dims = {1, 8};
  o.jsd_trials = 0;
  IdentityReport r;
  const double secs = timed([&] { r = verify_identities(o); });
  Outcome out{secs < kA1Seconds, ""};
  for (const auto& c : r.checks) {
    if (c.name == "symmetry" || c.name == "triangle") continue;
    out.pass = out.pass && c.max_violation <= kIdentityTol && c.trials == 2000;
    out.detail += c.name + fmt("=%.1e ", c.max_violation);
  }
  out.detail += fmt("(%.2fs, limit %.0fs)", secs, kA1Seconds);
  return out;
}

Outcome a2() {
  IdentityOptions o;
  o.trials = 1;
  o.seed = 20240102;
  o.dims = {1, 8};
  o.jsd_trials = 100;
  o.jsd_samples = 10000;
  IdentityReport r;
  const double secs = timed([&] { r = verify_identities(o); });
  return {r.jsd.violations == 0 && r.jsd.trials == 100 && secs < kA2Seconds,
          fmt("violations=%.0f/100 min_margin=%.4f max_se=%.2e (%.2fs, limit 30s)",
              static_cast<double>(r.jsd.violations), r.jsd.min_margin, r.jsd.max_jsd_se, secs)};
}

Outcome a3() {
  bool symmetric = true;
  double worst_excess = 0.0;
  std::size_t trials = 0;
  for (Eigen::Index d : {1, 8}) {
    auto rng = make_rng(20240103, static_cast<std::uint64_t>(d));
    std::vector<DiagGaussian> refs;
    for (int i = 0; i < 5; ++i) refs.push_back(random_posterior(d, rng));
    for (int t = 0; t < 1000; ++t, ++trials) {
      const auto p = random_posterior(d, rng);
      const auto q = random_posterior(d, rng);
      const auto s = random_posterior(d, rng);
      const double pq = crsd_set<DiagGaussian>(p, q, refs);
      symmetric = symmetric && pq == crsd_set<DiagGaussian>(q, p, refs);
      const double excess =
          crsd_set<DiagGaussian>(p, s, refs) - pq - crsd_set<DiagGaussian>(q, s, refs);
      worst_excess = std::max(worst_excess, excess);
    }
  }
  return {symmetric && worst_excess <= kTriangleTol && trials == 2000,
          std::string("symmetry ") + (symmetric ? "exact" : "BROKEN") +
              fmt(", worst triangle excess %.1e over %.0f triples", worst_excess,
                  static_cast<double>(trials))};
}

Outcome a4() {
  auto rng = make_rng(20240104);
  std::vector<DiagGaussian> g;
  for (int i = 0; i < 200; ++i) g.push_back(random_posterior(6, rng));
  const ProfileMatrix m = build_profile_matrix(g, g);
  std::uniform_int_distribution<int> pick(0, 199);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int j = pick(rng), k = pick(rng);
    double naive = 0.0;
    for (const auto& r : g) naive += std::abs(cross_entropy(r, g[k]) - cross_entropy(r, g[j]));
    worst = std::max(worst, std::abs(m.distance(j, k) - naive));
  }
  return {worst <= kProfileTol, fmt("max |profile - direct| = %.1e over 50 pairs", worst)};
}

Outcome a5() {
  auto rng = make_rng(20240105);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<DiagGaussian> g;
  Eigen::MatrixXd means(50, 3);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd mu(3);
    for (int j = 0; j < 3; ++j) mu[j] = n(rng);
    means.row(i) = mu.transpose();
    g.emplace_back(mu, Eigen::VectorXd::Ones(3));
  }
  Eigen::MatrixXd d_crsd = Eigen::MatrixXd::Zero(50, 50);
  for (int i = 0; i < 50; ++i) {
    for (int j = i + 1; j < 50; ++j) {
      const std::array<DiagGaussian, 2> pair{g[i], g[j]};
      d_crsd(i, j) = d_crsd(j, i) = crsd_set<DiagGaussian>(g[i], g[j], pair);
    }
  }
  const auto a = agglomerative(d_crsd, Linkage::average);
  const auto b = agglomerative(squared_euclidean_distances(means), Linkage::average);
  bool same = a.merges.size() == b.merges.size();
  double worst = 0.0;
  for (std::size_t i = 0; same && i < a.merges.size(); ++i) {
    same = a.merges[i].a == b.merges[i].a && a.merges[i].b == b.merges[i].b &&
           a.merges[i].size == b.merges[i].size;
    worst = std::max(worst, std::abs(a.merges[i].height - b.merges[i].height));
  }
  return {same, std::string(same ? "49 merges identical" : "merge sequences differ") +
                    fmt(", max height gap %.1e", worst)};
}

double occ_auc(double shift, std::uint64_t seed) {
  FixtureOptions f;
  f.n = 600;
  f.dim = 8;
  f.shift = shift;
  f.seed = seed;
  CrossvalOptions o;
  o.folds = 5;
  o.seed = seed;
  return crossval_occ(make_fixture(f), o).overall.auc.mean;
}

Outcome a6() {
  double shifted = 0, null_auc = 0;
  const double secs = timed([&] {
    shifted = occ_auc(3.0, 7);
    null_auc = occ_auc(0.0, 7);
  });
  return {shifted >= kA6MinAuc && null_auc >= kA6NullLo && null_auc <= kA6NullHi && secs < kA6Seconds,
          fmt("shift=3 AUC %.3f (need >= 0.95), shift=0 AUC %.3f (need [0.45, 0.55]) (%.2fs)",
              shifted, null_auc, secs)};
}

double brute_auc(const std::vector<LabeledScore>& s) {
  double wins = 0, pairs = 0;
  for (const auto& a : s) {
    for (const auto& b : s) {
      if (a.abnormal && !b.abnormal) {
        pairs += 1;
        wins += a.score > b.score ? 1.0 : (a.score == b.score ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

// Homogeneity / completeness straight from the contingency table.
std::array<double, 3> brute_hcv(const std::vector<std::string>& t, const std::vector<int>& p) {
  std::map<std::string, std::map<int, double>> table;
  std::map<std::string, double> rows;
  std::map<int, double> cols;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    table[t[i]][p[i]] += 1;
    rows[t[i]] += 1;
    cols[p[i]] += 1;
  }
  double hc = 0, hk = 0, hc_k = 0, hk_c = 0;
  for (auto& [r, c] : rows) hc -= c / n * std::log(c / n);
  for (auto& [k, c] : cols) hk -= c / n * std::log(c / n);
  for (auto& [r, row] : table) {
    for (auto& [k, a] : row) {
      hc_k -= a / n * std::log(a / cols[k]);
      hk_c -= a / n * std::log(a / rows[r]);
    }
  }
  const double h = hc == 0 ? 1 : 1 - hc_k / hc;
  const double c = hk == 0 ? 1 : 1 - hk_c / hk;
  return {h, c, h + c == 0 ? 0 : 2 * h * c / (h + c)};
}

Outcome a7() {
  auto rng = make_rng(20240107);
  double auc_worst = 0;
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<int> size(2, 200), val(0, 12), lab(0, 1);
    const int n = size(rng);
    std::vector<LabeledScore> s;
    for (int i = 0; i < n; ++i) s.push_back({static_cast<double>(val(rng)) / 4.0, lab(rng) == 1});
    s[0].abnormal = true;
    s[1].abnormal = false;
    auc_worst = std::max(auc_worst, std::abs(roc_auc(s).auc - brute_auc(s)));
  }
  double v_worst = 0;
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<int> size(2, 30), cls(0, 3), clu(0, 4);
    const int n = size(rng);
    std::vector<std::string> truth;
    std::vector<int> pred;
    for (int i = 0; i < n; ++i) {
      truth.push_back(std::string(1, static_cast<char>('A' + cls(rng))));
      pred.push_back(clu(rng));
    }
    const auto r = v_measure(truth, pred);
    const auto o = brute_hcv(truth, pred);
    v_worst = std::max({v_worst, std::abs(r.homogeneity - o[0]), std::abs(r.completeness - o[1]),
                        std::abs(r.v_measure - o[2])});
  }
  const std::vector<std::string> wt{"A", "A", "B", "B"};
  const std::vector<int> wp{0, 0, 1, 2};
  const auto w = v_measure(wt, wp);
  const bool worked = w.homogeneity == 1.0 && w.completeness == 0.5 && w.v_measure == 2.0 / 3.0;
  return {auc_worst <= kMetricTol && v_worst <= kMetricTol && worked,
          fmt("auc max err %.1e, v-measure max err %.1e; ", auc_worst, v_worst) +
              fmt("worked example h=%.6f c=%.6f V=%.6f (expected 1, 0.5, 0.666667)",
                  w.homogeneity, w.completeness, w.v_measure)};
}

Outcome a8() {
  auto rng = make_rng(20240108);
  std::vector<DiagGaussian> g;
  for (int i = 0; i < 500; ++i) g.push_back(random_posterior(4, rng, 1.0, -2.0, 0.0));
  AuditOptions o;
  o.samples_per_point = 50;
  o.seed = 20240108;
  ElboAudit a;
  const double secs = timed([&] { a = audit(g, o); });
  const double gap = a.mutual_info.value + a.total_correlation.value + a.dimwise_kl.value - a.kl_to_prior;
  return {std::abs(gap) <= kA8SeMultiple * a.residual.se && secs < kA8Seconds,
          fmt("|MI+TC+DW-KL| = %.4f, 3 SE = %.4f, KL = %.3f (%.2fs)", std::abs(gap),
              kA8SeMultiple * a.residual.se, a.kl_to_prior, secs)};
}

Outcome a9() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FixtureOptions f;
    f.preset = FixturePreset::k_blobs;
    f.k = 4;
    f.n = 400;
    f.sep = 4.0;
    f.seed = seed;
    const Dataset ds = make_fixture(f);
    std::vector<std::string> truth;
    for (const auto& r : ds.records()) truth.push_back(r.label);
    const auto post = ds.posteriors();
    const auto sm = cut(agglomerative(build_profile_matrix(post, post).pairwise(), Linkage::average), 100);
    KMeansOptions ko;
    ko.k = 100;
    ko.seed = seed;
    const auto km = kmeans(ds.means(), ko).assignment;
    const double v_sm = v_measure(truth, sm.labels).v_measure;
    const double v_km = v_measure(truth, km.labels).v_measure;
    wins += v_sm >= v_km ? 1 : 0;
    detail += fmt("%.3f/%.3f ", v_sm, v_km);
  }
  return {wins >= kA9MinWins, fmt("Agg-SM >= K-means in %.0f/5 seeds (V sm/km: ", wins) + detail + ")"};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome a10() {
  const fs::path dir = fs::temp_directory_path() / "crsdkit_acceptance_a10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const std::vector<std::vector<std::string>> runs{
      {"fixture", "--preset", "two-class", "--n", "300", "--seed", "7", "--out", p("emb_b4_d8_fab.jsonl")},
      {"fixture", "--preset", "k-blobs", "--n", "200", "--sep", "4", "--seed", "3", "--out", p("blobs.jsonl")},
      {"fixture", "--preset", "degenerate", "--n", "30", "--seed", "5", "--out", p("deg.csv")},
      {"fit-normal", "--in", p("emb_b4_d8_fab.jsonl"), "--out", p("model.json")},
      {"fit-normal", "--in", p("deg.csv"), "--out", p("deg_model.json")},
      {"score", "--model", p("model.json"), "--in", p("emb_b4_d8_fab.jsonl"), "--out", p("scores.jsonl")},
      {"eval-occ", "--scores", p("scores.jsonl"), "--per-class", "--roc-csv", p("roc.csv"), "--out",
       p("occ.txt"), "--json", p("occ.json")},
      {"crossval", "--in", p("emb_b4_d8_fab.jsonl"), "--seed", "7", "--out", p("cv.txt"), "--json", p("cv.json")},
      {"crsd-matrix", "--in", p("blobs.jsonl"), "--out", p("matrix.bin")},
      {"cluster", "--in", p("blobs.jsonl"), "--matrix", p("matrix.bin"), "--out", p("sm.jsonl")},
      {"cluster", "--in", p("blobs.jsonl"), "--algorithm", "agg-em", "--out", p("em.jsonl")},
      {"cluster", "--in", p("blobs.jsonl"), "--algorithm", "kmeans", "--seed", "3", "--out", p("km.jsonl")},
      {"cluster", "--in", p("blobs.jsonl"), "--algorithm", "dbscan", "--eps", "1.2", "--out", p("db.jsonl")},
      {"eval-cluster", "--labels", p("sm.jsonl"), "--truth", p("blobs.jsonl"), "--out", p("vm.txt"),
       "--json", p("vm.json")},
      {"elbo-audit", "--in", p("emb_b4_d8_fab.jsonl"), "--samples", "5", "--seed", "9", "--objective",
       "beta-tcvae", "--beta", "4", "--out", p("elbo.txt"), "--json", p("elbo.json")},
      {"traverse", "--model", p("model.json"), "--out", p("grid.jsonl")},
      {"traverse", "--model", p("model.json"), "--plane", "2,3", "--out", p("plane.jsonl")},
      {"verify-identities", "--trials", "50", "--jsd-trials", "5", "--jsd-samples", "2000", "--seed", "1",
       "--out", p("id.txt"), "--json", p("id.json")},
      {"sweep", "--dir", dir.string(), "--seed", "7", "--out", p("sweep.txt"), "--json", p("sweep.json")},
  };
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& args : runs) {
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      if (code != 0) return {false, args[0] + " exited with " + std::to_string(code) + ": " + err.str()};
    }
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (pass == 0) {
        first[name] = slurp(e.path());
      } else if (slurp(e.path()) != first[name]) {
        return {false, name + " differs between runs"};
      }
    }
  }
  fs::remove_all(dir);
  return {true, std::to_string(first.size()) + " artifacts from " + std::to_string(runs.size()) +
                    " subcommand runs byte-identical on rerun"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%-4s %s  %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
