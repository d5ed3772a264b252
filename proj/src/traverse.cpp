#include "crsdkit/traverse.hpp"

#include <string>

#include "crsdkit/error.hpp"

namespace crsdkit {

namespace {

void check_dim(const NormalModel& model, Eigen::Index i) {
  if (i < 0 || i >= model.dim()) {
    throw ValidationError("traverse: dimension " + std::to_string(i) + " out of range [0, " +
                          std::to_string(model.dim()) + ")");
  }
}

Eigen::VectorXd model_sigma(const NormalModel& model) {
  return model.gaussian.effective_cov().diagonal().cwiseSqrt();
}

}  // namespace

std::vector<double> traversal_offsets(std::size_t steps, double span) {
  if (steps == 0) throw ValidationError("traverse: steps must be >= 1");
  if (steps == 1) return {0.0};
  std::vector<double> t(steps);
  const double width = 2.0 * span;
  const auto last = static_cast<double>(steps - 1);
  for (std::size_t j = 0; j < steps; ++j) t[j] = -span + width * static_cast<double>(j) / last;
  t.back() = span;
  return t;
}

std::vector<TraversalGrid> traversal(const NormalModel& model, const std::vector<Eigen::Index>& dims,
                                     std::size_t steps) {
  std::vector<Eigen::Index> which = dims;
  if (which.empty()) {
    for (Eigen::Index i = 0; i < model.dim(); ++i) which.push_back(i);
  }
  for (auto i : which) check_dim(model, i);

  const auto offsets = traversal_offsets(steps);
  const Eigen::VectorXd sigma = model_sigma(model);
  const Eigen::VectorXd& base = model.gaussian.mean();
  std::vector<TraversalGrid> out;
  out.reserve(which.size());
  for (auto i : which) {
    TraversalGrid g;
    g.base = base;
    g.dim_index = i;
    g.sigma = sigma;
    g.offsets = offsets;
    for (double t : offsets) {
      Eigen::VectorXd z = base;
      z[i] = base[i] + sigma[i] * t;
      g.values.push_back(std::move(z));
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::vector<Eigen::VectorXd>> pairwise_plane(const NormalModel& model,
                                                         Eigen::Index dim_a, Eigen::Index dim_b,
                                                         std::size_t steps) {
  check_dim(model, dim_a);
  check_dim(model, dim_b);
  if (dim_a == dim_b) throw ValidationError("traverse: plane needs two distinct dimensions");
  const auto offsets = traversal_offsets(steps);
  const Eigen::VectorXd sigma = model_sigma(model);
  const Eigen::VectorXd& base = model.gaussian.mean();
  std::vector<std::vector<Eigen::VectorXd>> grid(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      Eigen::VectorXd z = base;
      z[dim_a] = base[dim_a] + sigma[dim_a] * offsets[i];
      z[dim_b] = base[dim_b] + sigma[dim_b] * offsets[j];
      grid[i].push_back(std::move(z));
    }
  }
  return grid;
}

}  // namespace crsdkit
