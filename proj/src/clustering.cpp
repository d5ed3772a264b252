#include "crsdkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "crsdkit/error.hpp"
#include "crsdkit/parallel.hpp"
#include "crsdkit/random.hpp"

namespace crsdkit {

Linkage parse_linkage(std::string_view name) {
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average") return Linkage::average;
  throw ValidationError("unknown linkage '" + std::string(name) +
                        "' (expected single, complete or average)");
}

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
  }
  return "average";
}

namespace {

// Upper-triangle storage of a symmetric matrix without its diagonal.
class Condensed {
 public:
  explicit Condensed(const Eigen::MatrixXd& full)
      : n_(static_cast<std::size_t>(full.rows())), data_(n_ * (n_ - 1) / 2) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        data_[index(i, j)] = full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i < j ? index(i, j) : index(j, i)];
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> data_;
};

void validate_dissimilarity(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) throw ValidationError("dissimilarity matrix must be square");
  if (d.rows() < 2) throw ValidationError("agglomerative clustering needs at least 2 points");
  if (!d.allFinite()) throw ValidationError("dissimilarity matrix has non-finite entries");
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (std::abs(d(i, i)) > tol) {
      throw ValidationError("dissimilarity matrix diagonal entry " + std::to_string(i) +
                            " is not zero");
    }
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (std::abs(d(i, j) - d(j, i)) > tol) {
        throw ValidationError("dissimilarity matrix is not symmetric at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      if (d(i, j) < 0.0) {
        throw ValidationError("dissimilarity matrix has a negative entry at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(2 * n - 1) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  std::vector<std::size_t> parent;
};

struct RawMerge {
  std::size_t x;
  std::size_t y;
  double height;
};

std::vector<int> compact_labels(const std::vector<std::size_t>& roots, int& n_clusters) {
  std::vector<int> labels(roots.size());
  std::unordered_map<std::size_t, int> seen;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    auto [it, inserted] = seen.emplace(roots[i], static_cast<int>(seen.size()));
    labels[i] = it->second;
  }
  n_clusters = static_cast<int>(seen.size());
  return labels;
}

}  // namespace

Dendrogram agglomerative(const Eigen::MatrixXd& dissimilarity, Linkage linkage) {
  validate_dissimilarity(dissimilarity);
  const auto n = static_cast<std::size_t>(dissimilarity.rows());
  Condensed dist(dissimilarity);
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  std::vector<std::size_t> chain;
  chain.reserve(n);
  std::vector<RawMerge> raw;
  raw.reserve(n - 1);

  while (raw.size() < n - 1) {
    if (chain.empty()) {
      chain.push_back(static_cast<std::size_t>(
          std::find(active.begin(), active.end(), 1) - active.begin()));
    }
    std::size_t x = 0, y = 0;
    double best = 0.0;
    for (;;) {
      x = chain.back();
      const bool has_prev = chain.size() >= 2;
      y = has_prev ? chain[chain.size() - 2] : n;
      best = has_prev ? dist(x, y) : std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i] || i == x) continue;
        const double v = dist(x, i);
        if (v < best) {
          best = v;
          y = i;
        }
      }
      if (has_prev && y == chain[chain.size() - 2]) break;
      chain.push_back(y);
    }
    chain.pop_back();
    chain.pop_back();
    raw.push_back({x, y, best});

    // The merged cluster lives in slot y.
    const double nx = static_cast<double>(size[x]);
    const double ny = static_cast<double>(size[y]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || i == x || i == y) continue;
      const double dx = dist(x, i);
      const double dy = dist(y, i);
      double updated = 0.0;
      switch (linkage) {
        case Linkage::single: updated = std::min(dx, dy); break;
        case Linkage::complete: updated = std::max(dx, dy); break;
        case Linkage::average: updated = (nx * dx + ny * dy) / (nx + ny); break;
      }
      dist(y, i) = updated;
    }
    active[x] = 0;
    size[y] += size[x];
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& a, const RawMerge& b) { return a.height < b.height; });

  Dendrogram dend;
  dend.n_leaves = n;
  dend.merges.reserve(n - 1);
  UnionFind uf(n);
  std::vector<std::size_t> cluster_size(2 * n - 1, 1);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t a = uf.find(raw[i].x);
    const std::size_t b = uf.find(raw[i].y);
    const std::size_t id = n + i;
    uf.parent[a] = id;
    uf.parent[b] = id;
    cluster_size[id] = cluster_size[a] + cluster_size[b];
    dend.merges.push_back({std::min(a, b), std::max(a, b), raw[i].height, cluster_size[id]});
  }
  return dend;
}

ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.n_leaves;
  if (n == 0 || dendrogram.merges.size() != n - 1) {
    throw ValidationError("cut: dendrogram is malformed");
  }
  if (k < 1 || k > n) {
    throw ValidationError("cut: k = " + std::to_string(k) + " is outside [1, " +
                          std::to_string(n) + "]");
  }
  UnionFind uf(n);
  for (std::size_t i = 0; i < n - k; ++i) {
    const auto& m = dendrogram.merges[i];
    uf.parent[uf.find(m.a)] = n + i;
    uf.parent[uf.find(m.b)] = n + i;
  }
  std::vector<std::size_t> roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = uf.find(i);
  ClusterAssignment out;
  out.labels = compact_labels(roots, out.n_clusters);
  return out;
}

double wcss(const Eigen::MatrixXd& points, const ClusterAssignment& assignment) {
  if (static_cast<std::size_t>(points.rows()) != assignment.labels.size()) {
    throw ValidationError("wcss: label count does not match point count");
  }
  const int k = assignment.n_clusters;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = assignment.labels[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    sums.row(c) += points.row(i);
    counts[static_cast<std::size_t>(c)] += 1.0;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = assignment.labels[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    total += (points.row(i) - sums.row(c) / counts[static_cast<std::size_t>(c)]).squaredNorm();
  }
  return total;
}

namespace {

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t first = pick(rng);
  centers.row(0) = x.row(static_cast<Eigen::Index>(first));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
  }
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double cum = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(chosen));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(
          d2[i],
          (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c)))
              .squaredNorm());
    }
  }
  return centers;
}

// Nearest centre per point; ties go to the lowest centre index.
double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, std::vector<int>& labels,
              std::vector<double>& d2) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double v = (x.row(i) - centers.row(c)).squaredNorm();
      if (v < best) {
        best = v;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    d2[static_cast<std::size_t>(i)] = best;
    total += best;
  }
  return total;
}

KMeansResult lloyd(const Eigen::MatrixXd& x, const KMeansOptions& opt, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<Eigen::Index>(opt.k);
  Eigen::MatrixXd centers = kmeanspp_seed(x, opt.k, rng);
  std::vector<int> labels(n, 0), prev_labels;
  std::vector<double> d2(n, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const double cur = assign(x, centers, labels, d2);
    if (it > 0 && (labels == prev_labels || prev - cur <= opt.tol * prev)) break;
    prev = cur;
    prev_labels = labels;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<std::size_t> counts(opt.k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty: move to the point farthest from its centre, lowest index on ties.
      const auto far = static_cast<Eigen::Index>(
          std::max_element(d2.begin(), d2.end()) - d2.begin());
      centers.row(c) = x.row(far);
      d2[static_cast<std::size_t>(far)] = -1.0;
    }
  }
  KMeansResult result;
  result.iterations = std::min(it + 1, opt.max_iter);
  std::vector<std::size_t> as_roots(labels.begin(), labels.end());
  result.assignment.labels = compact_labels(as_roots, result.assignment.n_clusters);
  result.centers.resize(result.assignment.n_clusters, x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    result.centers.row(result.assignment.labels[i]) = centers.row(labels[i]);
  }
  result.wcss = wcss(x, result.assignment);
  return result;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw ValidationError("kmeans: no points");
  if (options.k < 1 || options.k > n) {
    throw ValidationError("kmeans: k = " + std::to_string(options.k) + " must be in [1, " +
                          std::to_string(n) + "]");
  }
  if (options.n_init < 1 || options.max_iter < 1 || !(options.tol >= 0.0)) {
    throw ValidationError("kmeans: n_init and max_iter must be >= 1 and tol >= 0");
  }
  if (!points.allFinite()) throw ValidationError("kmeans: non-finite coordinates");

  std::vector<KMeansResult> runs(static_cast<std::size_t>(options.n_init));
  parallel_for(runs.size(), [&](std::size_t r) {
    auto rng = make_rng(options.seed, r);
    runs[r] = lloyd(points, options, rng);
  }, 1);
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].wcss < runs[best].wcss) best = r;
  }
  return std::move(runs[best]);
}

ClusterAssignment dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("dbscan: eps must be > 0");
  if (min_pts < 1) throw ValidationError("dbscan: min_pts must be >= 1");
  if (!points.allFinite()) throw ValidationError("dbscan: non-finite coordinates");
  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;

  std::vector<std::vector<std::size_t>> neighbours(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (points.row(static_cast<Eigen::Index>(i)) -
                        points.row(static_cast<Eigen::Index>(j)))
                           .squaredNorm();
      if (v <= eps2) neighbours[i].push_back(j);
    }
  });

  constexpr int kUnvisited = -2;
  ClusterAssignment out;
  out.labels.assign(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (neighbours[i].size() < min_pts) {
      out.labels[i] = ClusterAssignment::kNoise;
      continue;
    }
    out.labels[i] = cluster;
    std::deque<std::size_t> frontier(neighbours[i].begin(), neighbours[i].end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (out.labels[j] == ClusterAssignment::kNoise) out.labels[j] = cluster;  // border
      if (out.labels[j] != kUnvisited) continue;
      out.labels[j] = cluster;
      if (neighbours[j].size() >= min_pts) {
        frontier.insert(frontier.end(), neighbours[j].begin(), neighbours[j].end());
      }
    }
    ++cluster;
  }
  out.n_clusters = cluster;
  return out;
}

Eigen::MatrixXd squared_euclidean_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out(i, j) = out(j, i) = (points.row(i) - points.row(j)).squaredNorm();
    }
  }
  return out;
}

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& points) {
  return squared_euclidean_distances(points).cwiseSqrt();
}

}  // namespace crsdkit
