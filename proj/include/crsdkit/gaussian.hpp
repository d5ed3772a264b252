#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace crsdkit {

inline constexpr double kLog2Pi = 1.83787706640934548356065947281123527;

/// Variances below this value are rejected on ingestion.
inline constexpr double kVarianceFloor = 1e-12;

/// A diagonal-covariance Gaussian, the shape of a VAE posterior q(z|x).
/// Stores the variance and its logarithm so that values read as log-variance
/// serialize back bit-for-bit.
class DiagGaussian {
 public:
  /// Throws ValidationError if lengths differ, d == 0, any entry is
  /// non-finite, or any variance is below kVarianceFloor.
  DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd var);

  static DiagGaussian from_logvar(Eigen::VectorXd mean, Eigen::VectorXd logvar);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& var() const { return var_; }
  const Eigen::VectorXd& logvar() const { return logvar_; }
  Eigen::Index dim() const { return mean_.size(); }
  double log_det() const { return logvar_.sum(); }

  friend bool operator==(const DiagGaussian& a, const DiagGaussian& b) {
    return a.mean_ == b.mean_ && a.var_ == b.var_;
  }

 private:
  DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd var, Eigen::VectorXd logvar);

  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
  Eigen::VectorXd logvar_;
};

/// Lower-triangular factor of cov + jitter*I.
///
/// The factor is accepted when the LLT succeeds and the smallest squared pivot
/// is at least kPivotRatio times the largest. Otherwise jitter of
/// 1e-10, 1e-9, ..., 1e-6 times the mean diagonal magnitude is added in turn.
/// If none of those is accepted, NumericalError is thrown.
struct CholeskyFactor {
  static constexpr double kPivotRatio = 1e-12;

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  double log_det = 0.0;

  static CholeskyFactor compute(const Eigen::MatrixXd& cov, bool allow_jitter = true);
};

/// A full-covariance Gaussian with a cached factorization. The stored
/// covariance is the one supplied; all densities and divergences use the
/// effective covariance cov + jitter()*I.
class FullGaussian {
 public:
  /// Throws ValidationError on shape mismatch, non-finite entries or an
  /// asymmetric cov (relative tolerance 1e-10); NumericalError if the jitter
  /// policy cannot produce a positive definite factor.
  FullGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  static FullGaussian from_diag(const DiagGaussian& g);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  Eigen::MatrixXd effective_cov() const;
  Eigen::Index dim() const { return mean_.size(); }
  double jitter() const { return factor_.jitter; }
  double log_det() const { return factor_.log_det; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return factor_.llt; }

  /// x^T Sigma^{-1} x
  double quad_form(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  CholeskyFactor factor_;
};

double entropy(const DiagGaussian& p);
double entropy(const FullGaussian& p);

/// CE(r, p) = -E_r[ln p] = H(r) + KL(r || p), in nats.
double cross_entropy(const DiagGaussian& r, const DiagGaussian& p);
double cross_entropy(const FullGaussian& r, const FullGaussian& p);
double cross_entropy(const DiagGaussian& r, const FullGaussian& p);
double cross_entropy(const FullGaussian& r, const DiagGaussian& p);

/// Closed-form KL(p || q). Evaluated directly, not as CE - H.
double kl(const DiagGaussian& p, const DiagGaussian& q);
double kl(const FullGaussian& p, const FullGaussian& q);

double log_density(const FullGaussian& g, const Eigen::VectorXd& z);
double log_density(const DiagGaussian& g, const Eigen::VectorXd& z);

/// (a-b)^T cov^{-1} (a-b). No jitter is applied; a singular cov throws.
double mahalanobis_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      const Eigen::MatrixXd& cov);

}  // namespace crsdkit
