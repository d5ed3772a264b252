#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace crsdkit {

enum class Linkage { single, complete, average };

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage l);

/// One agglomeration step. Leaves are 0..n-1 and the cluster created by merge
/// i gets id n+i. a < b always.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;  // n_leaves - 1 entries, heights non-decreasing
};

/// Flat clustering. labels[i] is in [0, n_clusters) or kNoise.
struct ClusterAssignment {
  static constexpr int kNoise = -1;
  std::vector<int> labels;
  int n_clusters = 0;
};

/// Hierarchical agglomerative clustering of a precomputed dissimilarity
/// matrix using the nearest-neighbour chain with Lance-Williams updates.
/// Nearest-neighbour ties go to the previous chain element, then to the lowest
/// cluster slot; merges are then stably ordered by height. Requires a finite,
/// non-negative, symmetric matrix with zero diagonal and n >= 2.
Dendrogram agglomerative(const Eigen::MatrixXd& dissimilarity, Linkage linkage = Linkage::average);

/// Undo the last k-1 merges. Cluster labels are numbered by first occurrence
/// in leaf order.
ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k);

struct KMeansOptions {
  std::size_t k = 8;
  std::uint64_t seed = 0;
  int n_init = 10;
  int max_iter = 300;
  /// Stop when the within-cluster sum of squares improves by less than this
  /// fraction of its previous value.
  double tol = 1e-4;
};

struct KMeansResult {
  ClusterAssignment assignment;
  Eigen::MatrixXd centers;  // k x d
  double wcss = 0.0;
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding, best of n_init restarts. Points
/// are rows. Empty clusters are re-seeded with the point farthest from its
/// current centre.
KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

/// Within-cluster sum of squared Euclidean distances to cluster means.
double wcss(const Eigen::MatrixXd& points, const ClusterAssignment& assignment);

/// Density-based clustering with core/border/noise semantics. A point is a
/// core point when at least min_pts points (itself included) lie within
/// Euclidean distance eps.
ClusterAssignment dbscan(const Eigen::MatrixXd& points, double eps = 0.5,
                         std::size_t min_pts = 5);

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& points);
Eigen::MatrixXd squared_euclidean_distances(const Eigen::MatrixXd& points);

}  // namespace crsdkit
