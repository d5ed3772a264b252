#include "crsdkit/elbo_audit.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "crsdkit/error.hpp"
#include "crsdkit/parallel.hpp"
#include "crsdkit/random.hpp"

namespace crsdkit {

namespace {

enum Term { kMutualInfo, kTotalCorrelation, kDimwise, kSum, kTermCount };

double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& v) {
  const double hi = v.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((v - hi).exp().sum());
}

// Per-point running moments of each per-sample term.
struct PointMoments {
  std::array<double, kTermCount> mean{};
  std::array<double, kTermCount> m2{};
};

}  // namespace

ElboAudit audit(std::span<const DiagGaussian> posteriors, const AuditOptions& options) {
  const std::size_t n = posteriors.size();
  if (n == 0) throw ValidationError("elbo audit: no posteriors");
  if (options.samples_per_point < 1) {
    throw ValidationError("elbo audit: samples per point must be >= 1");
  }
  const Eigen::Index d = posteriors.front().dim();
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::ArrayXXd mu(ni, d), var(ni, d), log_norm(ni, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = posteriors[i];
    if (g.dim() != d) throw ValidationError("elbo audit: posteriors have mixed dimensions");
    const auto r = static_cast<Eigen::Index>(i);
    mu.row(r) = g.mean().transpose().array();
    var.row(r) = g.var().transpose().array();
    log_norm.row(r) = -0.5 * (kLog2Pi + g.logvar().transpose().array());
  }
  const double log_n = std::log(static_cast<double>(n));
  const std::size_t S = options.samples_per_point;

  std::vector<PointMoments> moments(n);
  parallel_for(n, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    std::normal_distribution<double> n01(0.0, 1.0);
    const auto r = static_cast<Eigen::Index>(i);
    Eigen::ArrayXd eps(d);
    Eigen::ArrayXd z(d);
    PointMoments& pm = moments[i];
    for (std::size_t s = 0; s < S; ++s) {
      for (Eigen::Index j = 0; j < d; ++j) eps[j] = n01(rng);
      z = mu.row(r).transpose() + var.row(r).transpose().sqrt() * eps;

      const double log_cond = (log_norm.row(r).transpose() - 0.5 * eps.square()).sum();
      const Eigen::ArrayXXd comp =
          log_norm - 0.5 * (mu.rowwise() - z.transpose()).square() / var;
      const double log_agg = log_sum_exp(comp.rowwise().sum()) - log_n;
      double log_marg = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) log_marg += log_sum_exp(comp.col(j)) - log_n;
      const double log_prior = -0.5 * (static_cast<double>(d) * kLog2Pi + z.square().sum());

      std::array<double, kTermCount> t{};
      t[kMutualInfo] = log_cond - log_agg;
      t[kTotalCorrelation] = log_agg - log_marg;
      t[kDimwise] = log_marg - log_prior;
      t[kSum] = t[kMutualInfo] + t[kTotalCorrelation] + t[kDimwise];
      for (int k = 0; k < kTermCount; ++k) {
        const double delta = t[k] - pm.mean[k];
        pm.mean[k] += delta / static_cast<double>(s + 1);
        pm.m2[k] += delta * (t[k] - pm.mean[k]);
      }
    }
  });

  const double nd = static_cast<double>(n);
  const double sd = static_cast<double>(S);
  std::array<Estimate, kTermCount> est{};
  for (int k = 0; k < kTermCount; ++k) {
    double sum_means = 0.0;
    for (const auto& pm : moments) sum_means += pm.mean[k];
    est[k].value = sum_means / nd;
    if (S >= 2) {
      // Points are enumerated, not sampled: only within-point variance counts.
      double within = 0.0;
      for (const auto& pm : moments) within += pm.m2[k] / (sd - 1.0);
      est[k].se = std::sqrt(within / sd) / nd;
    } else if (n >= 2) {
      double ss = 0.0;
      for (const auto& pm : moments) ss += (pm.mean[k] - est[k].value) * (pm.mean[k] - est[k].value);
      est[k].se = std::sqrt(ss / (nd - 1.0) / nd);
    }
  }

  double kl_sum = 0.0;
  for (const auto& g : posteriors) {
    kl_sum += 0.5 * (g.mean().squaredNorm() + g.var().sum() - g.logvar().sum() -
                     static_cast<double>(d));
  }

  ElboAudit a;
  a.kl_to_prior = kl_sum / nd;
  a.kl_to_prior_mc = est[kSum];
  a.mutual_info = est[kMutualInfo];
  a.total_correlation = est[kTotalCorrelation];
  a.dimwise_kl = est[kDimwise];
  a.residual = {est[kSum].value - a.kl_to_prior, est[kSum].se};
  a.n_points = n;
  a.samples_per_point = S;
  a.n_samples = n * S;
  a.beta = options.beta;
  return a;
}

Objective parse_objective(std::string_view name) {
  if (name == "vae") return Objective::vae;
  if (name == "beta-vae") return Objective::beta_vae;
  if (name == "beta-tcvae") return Objective::beta_tcvae;
  throw ValidationError("unknown objective '" + std::string(name) +
                        "' (expected vae, beta-vae or beta-tcvae)");
}

double objective_value(const ElboAudit& audit, double recon_loglik, Objective model, double beta) {
  switch (model) {
    case Objective::vae:
      return recon_loglik - audit.kl_to_prior;
    case Objective::beta_vae:
      return recon_loglik - beta * audit.kl_to_prior;
    case Objective::beta_tcvae:
      return recon_loglik - audit.alpha * audit.mutual_info.value -
             beta * audit.total_correlation.value - audit.gamma * audit.dimwise_kl.value;
  }
  throw ValidationError("objective_value: unknown objective");
}

}  // namespace crsdkit
