#include "crsdkit/crsd.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <limits>
#include <ostream>

#include "crsdkit/parallel.hpp"
#include "crsdkit/random.hpp"

namespace crsdkit {

ProfileMatrix::ProfileMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw NumericalError("profile matrix contains non-finite entries");
}

double ProfileMatrix::distance(Eigen::Index j, Eigen::Index k) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    acc += std::abs(values_(i, k) - values_(i, j));
  }
  return acc;
}

Eigen::MatrixXd ProfileMatrix::pairwise() const {
  const Eigen::Index n = targets();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    for (Eigen::Index k = j + 1; k < n; ++k) out(j, k) = distance(j, k);
  }, 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) out(k, j) = out(j, k);
  }
  return out;
}

ProfileMatrix build_profile_matrix(std::span<const DiagGaussian> refs,
                                   std::span<const DiagGaussian> targets) {
  if (refs.empty()) throw ValidationError("profile matrix: reference set is empty");
  if (targets.empty()) throw ValidationError("profile matrix: no targets");
  const auto d = refs.front().dim();
  for (const auto& g : refs) {
    if (g.dim() != d) throw ValidationError("profile matrix: references have mixed dimensions");
  }
  for (const auto& g : targets) {
    if (g.dim() != d) {
      throw ValidationError("profile matrix: target dimension " + std::to_string(g.dim()) +
                            " differs from reference dimension " + std::to_string(d));
    }
  }
  const auto m = static_cast<Eigen::Index>(refs.size());
  const auto n = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd values(m, n);
  parallel_for(targets.size(), [&](std::size_t j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      values(i, static_cast<Eigen::Index>(j)) =
          cross_entropy(refs[static_cast<std::size_t>(i)], targets[j]);
    }
  });
  return ProfileMatrix(std::move(values));
}

namespace {

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Eigen::VectorXd normal_vector(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = scale * n01(rng);
  return v;
}

DiagGaussian random_diag(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Eigen::VectorXd logvar(d);
  for (Eigen::Index j = 0; j < d; ++j) logvar[j] = u(rng);
  return DiagGaussian::from_logvar(normal_vector(d, rng, 1.5), std::move(logvar));
}

Eigen::MatrixXd random_spd(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = n01(rng);
  }
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(d);
  s.diagonal().array() += 0.3;
  return 0.5 * (s + s.transpose());
}

}  // namespace

JsdEstimate jsd_monte_carlo(const DiagGaussian& p, const DiagGaussian& q, std::size_t samples,
                            std::mt19937_64& rng) {
  if (p.dim() != q.dim()) throw ValidationError("jsd_monte_carlo: dimension mismatch");
  if (samples < 2) throw ValidationError("jsd_monte_carlo: need at least 2 samples");
  const Eigen::VectorXd sp = p.var().cwiseSqrt();
  const Eigen::VectorXd sq = q.var().cwiseSqrt();
  const double ln2 = std::log(2.0);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd eps = normal_vector(p.dim(), rng);
    const Eigen::VectorXd x = p.mean() + sp.cwiseProduct(eps);
    const Eigen::VectorXd y = q.mean() + sq.cwiseProduct(eps);
    const double px = log_density(p, x), qx = log_density(q, x);
    const double py = log_density(p, y), qy = log_density(q, y);
    const double tx = px - (log_add_exp(px, qx) - ln2);
    const double ty = qy - (log_add_exp(py, qy) - ln2);
    const double t = 0.5 * (tx + ty);
    // Welford
    const double delta = t - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (t - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

double jeffreys(const DiagGaussian& p, const DiagGaussian& q) {
  return 0.5 * (kl(p, q) + kl(q, p));
}

IdentityReport verify_identities(const IdentityOptions& options) {
  if (options.trials < 1) throw ValidationError("verify_identities: trials must be >= 1");
  if (options.dims.empty()) throw ValidationError("verify_identities: no dimensions given");
  IdentityReport report;
  report.seed = options.seed;
  report.dims = options.dims;
  report.jeffreys_convention =
      "D_J(p,q) = (KL(p||q) + KL(q||p)) / 2; under the sum convention the reference-pair "
      "distance equals D_J itself";

  IdentityCheck kl_check{"kl", "d(p,q;p) = KL(p||q)", 0, 0.0};
  IdentityCheck jeffreys_check{"jeffreys", "d(p,q;{p,q}) = 2 D_J(p,q)", 0, 0.0};
  IdentityCheck mahal_check{"mahalanobis",
                            "d(p,q;{p,q}) = (mu_p-mu_q)^T S^-1 (mu_p-mu_q) for shared S", 0, 0.0};
  IdentityCheck eucl_check{"euclidean", "d(p,q;{p,q}) = ||mu_p-mu_q||^2 for S = I", 0, 0.0};
  IdentityCheck sym_check{"symmetry", "d(p,q;R) = d(q,p;R)", 0, 0.0};
  IdentityCheck tri_check{"triangle", "d(p,s;R) <= d(p,q;R) + d(q,s;R)", 0, 0.0};

  std::size_t trial = 0;
  for (auto d_raw : options.dims) {
    const auto d = static_cast<Eigen::Index>(d_raw);
    if (d < 1) throw ValidationError("verify_identities: dimensions must be >= 1");
    for (std::size_t t = 0; t < options.trials; ++t, ++trial) {
      auto rng = make_rng(options.seed, trial);
      const DiagGaussian p = random_diag(d, rng);
      const DiagGaussian q = random_diag(d, rng);

      kl_check.max_violation = std::max(kl_check.max_violation, std::abs(crsd(p, q, p) - kl(p, q)));
      ++kl_check.trials;

      const std::array<DiagGaussian, 2> pair{p, q};
      const double pair_dist = crsd_set<DiagGaussian>(p, q, pair);
      jeffreys_check.max_violation =
          std::max(jeffreys_check.max_violation, std::abs(pair_dist - 2.0 * jeffreys(p, q)));
      ++jeffreys_check.trials;

      const Eigen::MatrixXd shared = random_spd(d, rng);
      const FullGaussian fp(normal_vector(d, rng, 1.5), shared);
      const FullGaussian fq(normal_vector(d, rng, 1.5), shared);
      const std::array<FullGaussian, 2> full_pair{fp, fq};
      const double full_dist = crsd_set<FullGaussian>(fp, fq, full_pair);
      mahal_check.max_violation =
          std::max(mahal_check.max_violation,
                   std::abs(full_dist - mahalanobis_sq(fp.mean(), fq.mean(), shared)));
      ++mahal_check.trials;

      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
      const DiagGaussian ip(normal_vector(d, rng, 1.5), ones);
      const DiagGaussian iq(normal_vector(d, rng, 1.5), ones);
      const std::array<DiagGaussian, 2> unit_pair{ip, iq};
      const double unit_dist = crsd_set<DiagGaussian>(ip, iq, unit_pair);
      eucl_check.max_violation = std::max(
          eucl_check.max_violation, std::abs(unit_dist - (ip.mean() - iq.mean()).squaredNorm()));
      ++eucl_check.trials;

      // Shared reference set of three fresh posteriors.
      const std::array<DiagGaussian, 3> refs{random_diag(d, rng), random_diag(d, rng),
                                             random_diag(d, rng)};
      const DiagGaussian s = random_diag(d, rng);
      const double pq = crsd_set<DiagGaussian>(p, q, refs);
      const double qp = crsd_set<DiagGaussian>(q, p, refs);
      sym_check.max_violation = std::max(sym_check.max_violation, std::abs(pq - qp));
      ++sym_check.trials;
      const double excess =
          crsd_set<DiagGaussian>(p, s, refs) - pq - crsd_set<DiagGaussian>(q, s, refs);
      tri_check.max_violation = std::max(tri_check.max_violation, std::max(0.0, excess));
      ++tri_check.trials;
    }
  }
  report.checks = {kl_check, jeffreys_check, mahal_check, eucl_check, sym_check, tri_check};

  JsdBoundCheck& jsd = report.jsd;
  jsd.trials = options.jsd_trials;
  jsd.samples = options.jsd_samples;
  jsd.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < options.jsd_trials; ++t) {
    const auto d = static_cast<Eigen::Index>(options.dims[t % options.dims.size()]);
    auto rng = make_rng(options.seed ^ 0x4a5344ULL, t);
    const DiagGaussian p = random_diag(d, rng);
    const DiagGaussian q = random_diag(d, rng);
    const std::array<DiagGaussian, 2> pair{p, q};
    const double lhs = crsd_set<DiagGaussian>(p, q, pair);
    const JsdEstimate est = jsd_monte_carlo(p, q, options.jsd_samples, rng);
    const double margin = lhs - 4.0 * (est.value - 3.0 * est.se);
    jsd.min_margin = std::min(jsd.min_margin, margin);
    jsd.max_jsd_se = std::max(jsd.max_jsd_se, est.se);
    if (margin < 0.0) ++jsd.violations;
  }
  if (options.jsd_trials == 0) jsd.min_margin = 0.0;
  return report;
}

void write_profile_file(std::ostream& out, const ProfileMatrix& m, Eigen::Index dim,
                        std::uint64_t config_hash) {
  const std::array<double, 8> header{kProfileMagic,
                                     static_cast<double>(kProfileFormatVersion),
                                     static_cast<double>(m.refs()),
                                     static_cast<double>(m.targets()),
                                     static_cast<double>(dim),
                                     static_cast<double>(config_hash >> 16),
                                     static_cast<double>(config_hash & 0xffffULL),
                                     100.0};
  out.write(reinterpret_cast<const char*>(header.data()), sizeof header);
  out.write(reinterpret_cast<const char*>(m.values().data()),
            static_cast<std::streamsize>(sizeof(double) * m.values().size()));
  if (!out) throw IoError("profile file: write failed");
}

ProfileFile read_profile_file(std::istream& in) {
  std::array<double, 8> h{};
  if (!in.read(reinterpret_cast<char*>(h.data()), sizeof h)) {
    throw ValidationError("profile file: truncated header");
  }
  if (h[0] != kProfileMagic) throw ValidationError("profile file: bad magic");
  if (h[1] != kProfileFormatVersion) {
    throw ValidationError("profile file: unsupported version " + std::to_string(h[1]));
  }
  const auto whole = [](double x) { return x >= 0.0 && x < 1e12 && std::floor(x) == x; };
  if (!whole(h[2]) || !whole(h[3]) || !whole(h[4]) || h[2] < 1 || h[3] < 1) {
    throw ValidationError("profile file: bad shape in header");
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(h[2]), static_cast<Eigen::Index>(h[3]));
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(sizeof(double) * values.size()))) {
    throw ValidationError("profile file: truncated payload");
  }
  const auto hash = (static_cast<std::uint64_t>(h[5]) << 16) | static_cast<std::uint64_t>(h[6]);
  return {ProfileMatrix(std::move(values)), static_cast<Eigen::Index>(h[4]), hash};
}

}  // namespace crsdkit
