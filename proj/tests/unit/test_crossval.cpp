#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "crsdkit/crossval.hpp"
#include "crsdkit/error.hpp"
#include "crsdkit/fixture.hpp"
#include "helpers.hpp"

using namespace crsdkit;

namespace {

Dataset two_class(double shift, std::uint64_t seed, std::size_t n = 200) {
  FixtureOptions o;
  o.n = n;
  o.dim = 4;
  o.shift = shift;
  o.seed = seed;
  return make_fixture(o);
}

}  // namespace

TEST_CASE("crossval reproduces a manual fold loop") {
  const Dataset ds = two_class(2.0, 1);
  CrossvalOptions o;
  o.seed = 9;
  const auto t = crossval_occ(ds, o);

  const auto split = stratified_kfold(ds, 5, 9);
  std::vector<double> aucs;
  for (std::size_t f = 0; f < 5; ++f) {
    std::vector<EmbeddingRecord> normals;
    for (auto i : split.train_indices(f)) {
      if (ds[i].label == "NILM") normals.push_back(ds[i]);
    }
    const auto m = fit_normal(normals);
    std::vector<LabeledScore> s;
    for (auto i : split.test_indices(f)) s.push_back({score(m, ds[i].posterior.mean()), ds[i].label != "NILM"});
    aucs.push_back(roc_auc(s).auc);
  }
  const auto expect = mean_std(aucs);
  CHECK(t.overall.auc.mean == doctest::Approx(expect.mean).epsilon(1e-15));
  CHECK(t.overall.auc.std == doctest::Approx(expect.std).epsilon(1e-15));
  CHECK(t.overall.folds_present == 5);
  REQUIRE(t.per_class.size() == 1);
  CHECK(t.per_class[0].label == "ABN");
  CHECK(t.per_class[0].auc.mean == t.overall.auc.mean);
  CHECK(t.thresholds.size() == 5);
  CHECK(t.n_records == 200);
}

TEST_CASE("crossval separates shifted classes and not identical ones") {
  CrossvalOptions o;
  o.seed = 3;
  CHECK(crossval_occ(two_class(8.0, 2), o).overall.auc.mean > 0.99);
  const double null_auc = crossval_occ(two_class(0.0, 2, 600), o).overall.auc.mean;
  CHECK(null_auc > 0.4);
  CHECK(null_auc < 0.6);
}

TEST_CASE("crossval is deterministic and seed dependent") {
  const Dataset ds = two_class(2.0, 4);
  CrossvalOptions o;
  o.seed = 1;
  const auto a = crossval_occ(ds, o);
  const auto b = crossval_occ(ds, o);
  CHECK(a.overall.auc.mean == b.overall.auc.mean);
  CHECK(a.thresholds == b.thresholds);
  o.seed = 2;
  CHECK(crossval_occ(ds, o).overall.auc.mean != a.overall.auc.mean);
}

TEST_CASE("rare classes are aggregated only over folds where they appear") {
  std::vector<EmbeddingRecord> recs;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 30; ++i) recs.push_back(testing::rec("n" + std::to_string(i), "NILM", testing::random_diag(2, rng)));
  for (int i = 0; i < 10; ++i) {
    auto g = testing::random_diag(2, rng);
    recs.push_back(testing::rec("a" + std::to_string(i), "ABN",
                                DiagGaussian(g.mean().array() + 5.0, g.var())));
  }
  recs.push_back(testing::rec("r0", "RARE", testing::diag({9, 9}, {1, 1})));
  recs.push_back(testing::rec("r1", "RARE", testing::diag({-9, 9}, {1, 1})));
  CrossvalOptions o;
  o.seed = 5;
  const auto t = crossval_occ(Dataset(recs), o);
  REQUIRE(t.per_class.size() == 2);
  CHECK(t.per_class[0].label == "ABN");
  CHECK(t.per_class[0].folds_present == 5);
  CHECK(t.per_class[1].label == "RARE");
  CHECK(t.per_class[1].folds_present == 2);
  CHECK(t.undersized_labels == std::vector<std::string>{"RARE"});
}

TEST_CASE("crossval input errors") {
  const Dataset ds = two_class(2.0, 1, 20);
  CrossvalOptions o;
  o.normal_label = "HEALTHY";
  CHECK_THROWS_AS(crossval_occ(ds, o), ValidationError);
  o.normal_label = "NILM";
  o.folds = 21;
  CHECK_THROWS_AS(crossval_occ(ds, o), ValidationError);
}

TEST_CASE("score evaluation with given and Youden thresholds") {
  const std::vector<ScoredRecord> s{{"a", "N", 0.1}, {"b", "N", 0.2}, {"c", "X", 0.8},
                                    {"d", "Y", 0.9}, {"e", "Y", 0.15}};
  const auto ev = evaluate_scores(s, "N", 0.5);
  CHECK(ev.n_normal == 2);
  CHECK(ev.n_abnormal == 3);
  CHECK(!ev.threshold_from_youden);
  CHECK(ev.confusion.tp == 2);
  CHECK(ev.confusion.fn == 1);
  REQUIRE(ev.per_class.size() == 2);
  CHECK(ev.per_class[0].label == "X");
  CHECK(ev.per_class[0].auc == 1.0);
  CHECK(ev.per_class[1].auc == doctest::Approx(0.75));
  // pairs (d>a, d>b, e>a, e<b) -> 3/4 for Y; overall 5/6
  CHECK(ev.roc.auc == doctest::Approx(5.0 / 6.0));
  const auto yd = evaluate_scores(s, "N");
  CHECK(yd.threshold_from_youden);
  CHECK_THROWS_AS(evaluate_scores(s, "Z"), ValidationError);
}

TEST_CASE("sweep reads grid files by name") {
  const auto dir = std::filesystem::temp_directory_path() / "crsdkit_sweep_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / sweep_filename(4, 4, "fab"));
    write_jsonl(f, two_class(3.0, 1, 100));
  }
  CrossvalOptions o;
  o.seed = 1;
  const auto e = sweep_crossval(dir, {1, 4}, {4}, {"none", "fab"}, o);
  REQUIRE(e.size() == 4);
  CHECK(e[3].file == "emb_b4_d4_fab.jsonl");
  CHECK(e[3].present);
  CHECK(e[3].auc.count == 5);
  CHECK(!e[0].present);
  {
    std::ofstream f(dir / sweep_filename(1, 8, "none"));
    write_jsonl(f, two_class(3.0, 1, 100));
  }
  CHECK_THROWS_AS(sweep_crossval(dir, {1}, {8}, {"none"}, o), ValidationError);
  CHECK_THROWS_AS(sweep_crossval(dir / "missing", {1}, {8}, {"none"}, o), IoError);
  std::filesystem::remove_all(dir);
}
