#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "crsdkit/gaussian.hpp"

namespace crsdkit {

/// A Monte-Carlo mean with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Latent-side terms of the VAE objectives, estimated from stored posteriors.
/// The aggregate posterior q(z) is the uniform mixture of the n posteriors and
/// the prior is N(0, I).
struct ElboAudit {
  /// Mean closed-form KL(q(z|x_i) || p(z)).
  double kl_to_prior = 0.0;
  /// The same quantity estimated from the samples.
  Estimate kl_to_prior_mc;
  Estimate mutual_info;        ///< E[log q(z|x) - log q(z)]
  Estimate total_correlation;  ///< E[log q(z) - sum_j log q(z_j)]
  Estimate dimwise_kl;         ///< E[sum_j log q(z_j) - log p(z)]
  /// mutual_info + total_correlation + dimwise_kl - kl_to_prior, with the
  /// standard error of the per-sample sum.
  Estimate residual;
  std::size_t n_points = 0;
  std::size_t samples_per_point = 0;
  std::size_t n_samples = 0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

struct AuditOptions {
  std::size_t samples_per_point = 50;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

/// Full-batch estimate: every sample is scored against all n mixture
/// components (O(n d) per sample). Sampling for point i uses its own seeded
/// substream, so results do not depend on thread count. Standard errors are
/// stratified by point when samples_per_point >= 2.
ElboAudit audit(std::span<const DiagGaussian> posteriors, const AuditOptions& options);

enum class Objective { vae, beta_vae, beta_tcvae };

Objective parse_objective(std::string_view name);

/// vae:        recon - KL
/// beta_vae:   recon - beta * KL
/// beta_tcvae: recon - alpha * MI - beta * TC - gamma * dimwise KL
/// KL is the closed-form kl_to_prior; alpha and gamma come from the audit.
double objective_value(const ElboAudit& audit, double recon_loglik, Objective model, double beta);

}  // namespace crsdkit
