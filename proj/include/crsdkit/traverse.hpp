#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "crsdkit/occ.hpp"

namespace crsdkit {

/// Points along one latent coordinate around the fitted mean.
struct TraversalGrid {
  Eigen::VectorXd base;
  Eigen::Index dim_index = 0;
  std::vector<Eigen::VectorXd> values;
  Eigen::VectorXd sigma;  // sqrt of the covariance diagonal
  std::vector<double> offsets;  // in units of sigma
};

/// steps evenly spaced values from -span to +span inclusive; {0} when steps == 1.
std::vector<double> traversal_offsets(std::size_t steps, double span = 4.0);

/// One grid per requested dimension (all of them when dims is empty).
std::vector<TraversalGrid> traversal(const NormalModel& model,
                                     const std::vector<Eigen::Index>& dims = {},
                                     std::size_t steps = 10);

/// grid[i][j] moves dim_a by offsets[i] and dim_b by offsets[j].
std::vector<std::vector<Eigen::VectorXd>> pairwise_plane(const NormalModel& model,
                                                         Eigen::Index dim_a, Eigen::Index dim_b,
                                                         std::size_t steps = 10);

}  // namespace crsdkit
