#include <sstream>

#include "doctest.h"
#include "crsdkit/error.hpp"
#include "crsdkit/model_io.hpp"
#include "crsdkit/occ.hpp"
#include "helpers.hpp"

using namespace crsdkit;
using testing::diag;
using testing::rec;
using testing::vec;

TEST_CASE("fitted covariance on two records, worked by hand") {
  // mu1 = (1, 0), V1 = diag(0.5, 1); mu2 = (3, 2), V2 = diag(1.5, 1)
  // sum(V + mu mu^T) = [[0.5+1+1.5+9, 6], [6, 1+1+4]] = [[12, 6], [6, 6]]
  // printed: that / (N-1) - mu_hat mu_hat^T with mu_hat = (2, 1) -> [[8, 4], [4, 5]]
  // total-variance: (V1 + V2 + (d1 d1^T + d2 d2^T)) / (N-1), d = +-(1, 1) -> [[4, 2], [2, 4]]
  const std::vector<EmbeddingRecord> recs{rec("a", "N", diag({1, 0}, {0.5, 1})),
                                          rec("b", "N", diag({3, 2}, {1.5, 1}))};
  const NormalModel printed = fit_normal(recs);
  CHECK(printed.gaussian.mean() == vec({2, 1}));
  Eigen::MatrixXd expect(2, 2);
  expect << 8, 4, 4, 5;
  CHECK((printed.gaussian.cov() - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(printed.n_fit == 2);
  CHECK(printed.jitter_applied() == 0.0);

  const NormalModel tv = fit_normal(recs, CovarianceEstimator::total_variance);
  expect << 4, 2, 2, 4;
  CHECK((tv.gaussian.cov() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fit does not depend on record order") {
  std::mt19937_64 rng(5);
  std::vector<EmbeddingRecord> recs;
  for (int i = 0; i < 40; ++i) recs.push_back(rec("r" + std::to_string(i), "N", testing::random_diag(4, rng)));
  const NormalModel a = fit_normal(recs);
  std::reverse(recs.begin(), recs.end());
  const NormalModel b = fit_normal(recs);
  CHECK(a.gaussian.mean() == b.gaussian.mean());
  CHECK(a.gaussian.cov() == b.gaussian.cov());
}

TEST_CASE("score is the negative log-likelihood under the fit") {
  const std::vector<EmbeddingRecord> recs{rec("a", "N", diag({-1}, {0.5})),
                                          rec("b", "N", diag({1}, {0.5}))};
  // cov = (0.5 + 1 + 0.5 + 1) / 1 - 0 = 3
  const NormalModel m = fit_normal(recs);
  CHECK(m.gaussian.cov()(0, 0) == doctest::Approx(3.0));
  const double z = 2.0;
  const double expect = 0.5 * (std::log(2 * M_PI) + std::log(3.0) + z * z / 3.0);
  CHECK(score(m, vec({z})) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(score(m, vec({0})) < score(m, vec({1})));
}

TEST_CASE("degenerate fits engage jitter or are rejected") {
  // Identical far-off posteriors with tiny variance: V-hat is tiny relative to its scale.
  std::vector<EmbeddingRecord> same;
  for (int i = 0; i < 3; ++i) same.push_back(rec("s" + std::to_string(i), "N", diag({10, 10}, {1e-12, 1e-12})));
  const NormalModel m = fit_normal(same);
  CHECK(m.jitter_applied() > 0.0);
  CHECK(std::isfinite(score(m, vec({10, 10}))));

  const std::vector<EmbeddingRecord> one{rec("a", "N", diag({0}, {1}))};
  CHECK_THROWS_AS(fit_normal(one), ValidationError);
}

TEST_CASE("select_label and score_dataset keep dataset order") {
  const Dataset ds({rec("x", "ABN", diag({3}, {1})), rec("y", "NILM", diag({0}, {1})),
                    rec("z", "NILM", diag({0.5}, {1}))});
  const auto normals = select_label(ds, "NILM");
  REQUIRE(normals.size() == 2);
  const NormalModel m = fit_normal(normals);
  const auto scored = score_dataset(m, ds);
  REQUIRE(scored.size() == 3);
  CHECK(scored[0].id == "x");
  CHECK(scored[0].score > scored[1].score);
  CHECK(scored[2].label == "NILM");
}

TEST_CASE("model json round trip is bit exact") {
  std::mt19937_64 rng(9);
  std::vector<EmbeddingRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(rec("r" + std::to_string(i), "N", testing::random_diag(3, rng)));
  const NormalModel m = fit_normal(recs, CovarianceEstimator::total_variance);
  std::stringstream s;
  write_model(s, m, Provenance{"fit-normal", "0123456789abcdef"});
  const NormalModel back = read_model(s);
  CHECK(back.gaussian.mean() == m.gaussian.mean());
  CHECK(back.gaussian.cov() == m.gaussian.cov());
  CHECK(back.n_fit == 10);
  CHECK(back.estimator == CovarianceEstimator::total_variance);

  std::istringstream bad_version("{\"version\":2,\"dim\":1,\"mean\":[0],\"cov_row_major\":[1],"
                                 "\"jitter_applied\":0,\"n_fit\":2,\"estimator\":\"printed\"}");
  CHECK_THROWS_AS(read_model(bad_version), ValidationError);
  std::istringstream bad_size("{\"version\":1,\"dim\":2,\"mean\":[0],\"cov_row_major\":[1],"
                              "\"jitter_applied\":0,\"n_fit\":2,\"estimator\":\"printed\"}");
  CHECK_THROWS_AS(read_model(bad_size), ValidationError);
  CHECK_THROWS_AS(parse_estimator("median"), ValidationError);
}
