#pragma once

#include <random>
#include <string>
#include <vector>

#include "crsdkit/dataset.hpp"
#include "crsdkit/gaussian.hpp"

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline crsdkit::DiagGaussian diag(std::initializer_list<double> mu, std::initializer_list<double> var) {
  return crsdkit::DiagGaussian(vec(mu), vec(var));
}

inline crsdkit::DiagGaussian random_diag(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd mu(d), lv(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    mu[j] = 1.5 * n(rng);
    lv[j] = u(rng);
  }
  return crsdkit::DiagGaussian::from_logvar(mu, lv);
}

inline crsdkit::EmbeddingRecord rec(std::string id, std::string label, crsdkit::DiagGaussian g) {
  return {std::move(id), std::move(label), std::move(g)};
}

}  // namespace testing
