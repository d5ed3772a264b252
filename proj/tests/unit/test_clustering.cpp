#include <algorithm>
#include <limits>
#include <random>

#include "doctest.h"
#include "crsdkit/clustering.hpp"
#include "crsdkit/error.hpp"

using namespace crsdkit;

namespace {

Eigen::MatrixXd seven_points() {
  Eigen::MatrixXd x(7, 2);
  x << 0.0, 0.0, 0.3, 0.1, 2.0, 2.1, 2.4, 1.9, 5.0, 0.2, 5.1, -0.4, 0.1, 4.0;
  return x;
}

// Merge tables from scipy.cluster.hierarchy.linkage on seven_points().
const std::vector<Merge> kSingle{{0, 1, 0.31622776601683794, 2}, {2, 3, 0.44721359549995793, 2},
                                 {4, 5, 0.60827625302982202, 2}, {7, 8, 2.6248809496813372, 4},
                                 {6, 10, 2.6870057685088806, 5}, {9, 11, 3.1064449134018135, 7}};
const std::vector<Merge> kComplete{{0, 1, 0.31622776601683794, 2}, {2, 3, 0.44721359549995793, 2},
                                   {4, 5, 0.60827625302982202, 2}, {7, 8, 3.0610455730027932, 4},
                                   {6, 10, 4.0012498047485119, 5}, {9, 11, 6.6603303221386847, 7}};
const std::vector<Merge> kAverage{{0, 1, 0.31622776601683794, 2}, {2, 3, 0.44721359549995793, 2},
                                  {4, 5, 0.60827625302982202, 2}, {7, 8, 2.837947464967999, 4},
                                  {6, 10, 3.4269656779225519, 5}, {9, 11, 4.6694624676638963, 7}};

void check_merges(const Dendrogram& d, const std::vector<Merge>& expect) {
  REQUIRE(d.merges.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(d.merges[i].a == expect[i].a);
    CHECK(d.merges[i].b == expect[i].b);
    CHECK(d.merges[i].size == expect[i].size);
    CHECK(d.merges[i].height == doctest::Approx(expect[i].height).epsilon(1e-14));
  }
}

// Textbook O(n^3) agglomeration: scan all active pairs, linkage from raw
// point-to-point distances, lowest pair wins ties.
Dendrogram naive(const Eigen::MatrixXd& d, Linkage link) {
  const std::size_t n = static_cast<std::size_t>(d.rows());
  std::vector<std::vector<std::size_t>> members(n);
  std::vector<std::size_t> id(n);
  for (std::size_t i = 0; i < n; ++i) {
    members[i] = {i};
    id[i] = i;
  }
  std::vector<bool> active(n, true);
  Dendrogram out{n, {}};
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        double v = link == Linkage::single ? std::numeric_limits<double>::infinity() : 0.0;
        for (auto a : members[i]) {
          for (auto b : members[j]) {
            if (link == Linkage::single) v = std::min(v, d(a, b));
            if (link == Linkage::complete) v = std::max(v, d(a, b));
            if (link == Linkage::average) v += d(a, b);
          }
        }
        if (link == Linkage::average) v /= static_cast<double>(members[i].size() * members[j].size());
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    members[bj].insert(members[bj].end(), members[bi].begin(), members[bi].end());
    active[bi] = false;
    out.merges.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), best, members[bj].size()});
    id[bj] = n + step;
  }
  return out;
}

double best_wcss_exhaustive(const Eigen::MatrixXd& x, int k) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> lab(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<int> used(k, 0);
    for (int l : lab) used[l] = 1;
    if (std::count(used.begin(), used.end(), 1) == k) {
      double w = 0.0;
      for (int c = 0; c < k; ++c) {
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(x.cols());
        int cnt = 0;
        for (int i = 0; i < n; ++i) {
          if (lab[i] == c) {
            m += x.row(i);
            ++cnt;
          }
        }
        m /= cnt;
        for (int i = 0; i < n; ++i) {
          if (lab[i] == c) w += (x.row(i) - m).squaredNorm();
        }
      }
      best = std::min(best, w);
    }
    int pos = 0;
    while (pos < n && ++lab[pos] == k) lab[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

}  // namespace

TEST_CASE("dendrograms match the reference merge tables") {
  const Eigen::MatrixXd d = euclidean_distances(seven_points());
  check_merges(agglomerative(d, Linkage::single), kSingle);
  check_merges(agglomerative(d, Linkage::complete), kComplete);
  check_merges(agglomerative(d, Linkage::average), kAverage);
}

TEST_CASE("nearest-neighbour chain agrees with naive agglomeration") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + trial;
    Eigen::MatrixXd pts(n, 3);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) pts(i, j) = u(rng);
    }
    const Eigen::MatrixXd d = euclidean_distances(pts);
    for (auto link : {Linkage::single, Linkage::complete, Linkage::average}) {
      const auto fast = agglomerative(d, link);
      const auto slow = naive(d, link);
      REQUIRE(fast.merges.size() == slow.merges.size());
      for (std::size_t i = 0; i < slow.merges.size(); ++i) {
        CHECK(fast.merges[i].a == slow.merges[i].a);
        CHECK(fast.merges[i].b == slow.merges[i].b);
        CHECK(fast.merges[i].size == slow.merges[i].size);
        CHECK(std::abs(fast.merges[i].height - slow.merges[i].height) < 1e-12);
      }
    }
  }
}

TEST_CASE("all-equal distances give a deterministic valid tree") {
  const Eigen::MatrixXd d = Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5);
  const auto a = agglomerative(d);
  const auto b = agglomerative(d);
  REQUIRE(a.merges.size() == 4);
  CHECK(a.merges == b.merges);
  CHECK(a.merges[0].a == 0);
  CHECK(a.merges[0].b == 1);
  for (const auto& m : a.merges) {
    CHECK(m.height == 1.0);
    CHECK(m.a < m.b);
  }
  CHECK(a.merges.back().size == 5);
}

TEST_CASE("cut undoes the last merges") {
  const auto dend = agglomerative(euclidean_distances(seven_points()));
  CHECK(cut(dend, 3).labels == std::vector<int>{0, 0, 0, 0, 1, 1, 2});
  CHECK(cut(dend, 3).n_clusters == 3);
  CHECK(cut(dend, 1).labels == std::vector<int>(7, 0));
  CHECK(cut(dend, 7).labels == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS(cut(dend, 0), ValidationError);
  CHECK_THROWS_AS(cut(dend, 8), ValidationError);
}

TEST_CASE("dissimilarity validation") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 1) = 1.0;
  CHECK_THROWS_AS(agglomerative(d), ValidationError);  // asymmetric
  d(1, 0) = 1.0;
  d(2, 2) = 0.5;
  CHECK_THROWS_AS(agglomerative(d), ValidationError);  // diagonal
  d(2, 2) = 0.0;
  d(0, 2) = d(2, 0) = -1.0;
  CHECK_THROWS_AS(agglomerative(d), ValidationError);  // negative
  CHECK_THROWS_AS(agglomerative(Eigen::MatrixXd::Zero(1, 1)), ValidationError);
  CHECK_THROWS_AS(agglomerative(Eigen::MatrixXd::Zero(2, 3)), ValidationError);
  CHECK_THROWS_AS(parse_linkage("ward"), ValidationError);
}

TEST_CASE("k-means reaches the exhaustive optimum on small inputs") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 0.6);
  Eigen::MatrixXd x(10, 2);
  const double cx[3] = {0.0, 3.0, 0.0}, cy[3] = {0.0, 0.0, 3.0};
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = cx[i % 3] + n(rng);
    x(i, 1) = cy[i % 3] + n(rng);
  }
  for (int k : {2, 3}) {
    KMeansOptions o;
    o.k = static_cast<std::size_t>(k);
    o.seed = 5;
    const auto r = kmeans(x, o);
    CHECK(r.wcss == doctest::Approx(best_wcss_exhaustive(x, k)).epsilon(1e-9));
    CHECK(r.wcss == doctest::Approx(wcss(x, r.assignment)).epsilon(1e-12));
    CHECK(r.assignment.n_clusters == k);
    CHECK(r.assignment.labels[0] == 0);
    const auto again = kmeans(x, o);
    CHECK(again.assignment.labels == r.assignment.labels);
  }
  KMeansOptions bad;
  bad.k = 11;
  CHECK_THROWS_AS(kmeans(x, bad), ValidationError);
}

TEST_CASE("k-means with k = n puts every point alone") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 5, 9;
  KMeansOptions o;
  o.k = 4;
  const auto r = kmeans(x, o);
  CHECK(r.wcss == 0.0);
  CHECK(r.assignment.n_clusters == 4);
}

TEST_CASE("DBSCAN labels match the reference implementation") {
  Eigen::MatrixXd p(10, 2);
  p << 0, 0, 0.2, 0, 0.1, 0.2, 0.15, 0.1, 3, 3, 3.1, 3.2, 3.2, 3.0, 3.1, 3.1, 10, 10, 1.5, 1.5;
  const auto a = dbscan(p, 0.5, 3);
  CHECK(a.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1, -1, -1});
  CHECK(a.n_clusters == 2);
  CHECK(dbscan(p, 0.5, 1).n_clusters == 4);
  CHECK_THROWS_AS(dbscan(p, 0.0, 3), ValidationError);
}

TEST_CASE("DBSCAN border point joins the first cluster that reaches it") {
  // 0.6 is within eps of a core point on each side but is not core itself.
  Eigen::MatrixXd p(11, 1);
  p << -0.3, -0.2, -0.1, 0.0, 0.15, 0.6, 1.05, 1.2, 1.3, 1.4, 1.5;
  const auto a = dbscan(p, 0.5, 4);
  CHECK(a.n_clusters == 2);
  CHECK(a.labels[5] == a.labels[0]);
  CHECK(a.labels[6] != a.labels[0]);
}

TEST_CASE("distance helpers") {
  const Eigen::MatrixXd x = seven_points();
  const auto d = euclidean_distances(x);
  const auto s = squared_euclidean_distances(x);
  CHECK(d(0, 1) == doctest::Approx(std::sqrt(0.1)));
  CHECK(s(0, 1) == doctest::Approx(0.1));
  CHECK(d(3, 3) == 0.0);
  CHECK(d(2, 5) == d(5, 2));
}
