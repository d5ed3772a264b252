#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crsdkit/error.hpp"
#include "crsdkit/gaussian.hpp"

namespace crsdkit {

template <typename G>
concept GaussianDistribution = requires(const G& a, const G& b) {
  { cross_entropy(a, b) } -> std::convertible_to<double>;
};

/// Cross-entropy referenced statistical distance |CE(r,q) - CE(r,p)|.
/// Symmetric and zero for p == q, but zero does not imply p == q.
template <GaussianDistribution G>
double crsd(const G& p, const G& q, const G& r) {
  return std::abs(cross_entropy(r, q) - cross_entropy(r, p));
}

/// Sum of crsd over a finite, non-empty reference set. A pseudometric.
template <GaussianDistribution G>
double crsd_set(const G& p, const G& q, std::span<const G> refs) {
  if (refs.empty()) throw ValidationError("crsd_set: reference set is empty");
  double acc = 0.0;
  for (const auto& r : refs) acc += crsd(p, q, r);
  return acc;
}

/// values(i, j) = CE(refs[i], targets[j]). Column j is the profile of target j;
/// the crsd_set distance between two targets is the L1 distance between their
/// columns, so all pairwise distances cost O(m) after an O(m n d) build.
class ProfileMatrix {
 public:
  explicit ProfileMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index refs() const { return values_.rows(); }
  Eigen::Index targets() const { return values_.cols(); }

  double distance(Eigen::Index j, Eigen::Index k) const;
  /// Symmetric n x n matrix of distances with an exact zero diagonal.
  Eigen::MatrixXd pairwise() const;

 private:
  Eigen::MatrixXd values_;
};

/// Binary profile file: eight header doubles followed by the values in
/// column-major order, all native-endian IEEE 754.
/// Header: magic, format version, refs, targets, latent dim, upper 48 bits of
/// the config hash, lower 16 bits, tool version code.
inline constexpr double kProfileMagic = 1129468740.0;  // "CRSD" as a big-endian uint32
inline constexpr int kProfileFormatVersion = 1;

struct ProfileFile {
  ProfileMatrix matrix;
  Eigen::Index dim = 0;
  std::uint64_t config_hash = 0;
};

void write_profile_file(std::ostream& out, const ProfileMatrix& m, Eigen::Index dim,
                        std::uint64_t config_hash);
/// Throws ValidationError on a bad magic, version or truncated payload.
ProfileFile read_profile_file(std::istream& in);

ProfileMatrix build_profile_matrix(std::span<const DiagGaussian> refs,
                                   std::span<const DiagGaussian> targets);

/// Monte-Carlo Jensen-Shannon divergence (nats) with paired sampling: the
/// same standard-normal draw is pushed through p and q.
struct JsdEstimate {
  double value = 0.0;
  double se = 0.0;
};
JsdEstimate jsd_monte_carlo(const DiagGaussian& p, const DiagGaussian& q, std::size_t samples,
                            std::mt19937_64& rng);

/// Jeffreys divergence, half-sum convention: (KL(p||q) + KL(q||p)) / 2.
double jeffreys(const DiagGaussian& p, const DiagGaussian& q);

struct IdentityCheck {
  std::string name;
  std::string relation;
  std::size_t trials = 0;
  double max_violation = 0.0;
};

struct JsdBoundCheck {
  std::size_t trials = 0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// min over trials of crsd_set(p,q;{p,q}) - 4*(jsd - 3*se)
  double min_margin = 0.0;
  double max_jsd_se = 0.0;
};

struct IdentityReport {
  std::uint64_t seed = 0;
  std::vector<std::size_t> dims;
  std::vector<IdentityCheck> checks;
  JsdBoundCheck jsd;
  std::string jeffreys_convention;
};

struct IdentityOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> dims{1, 8};
  std::size_t jsd_trials = 100;
  std::size_t jsd_samples = 10000;
};

/// Checks, on seeded random Gaussians, that crsd reduces to KL for r = p,
/// to twice the half-sum Jeffreys divergence for R = {p, q}, to the squared
/// Mahalanobis distance under equal covariances and to the squared Euclidean
/// distance under identity covariances, that it is symmetric and obeys the
/// triangle inequality for a shared reference set, and that it bounds 4 * JSD.
IdentityReport verify_identities(const IdentityOptions& options);

}  // namespace crsdkit
