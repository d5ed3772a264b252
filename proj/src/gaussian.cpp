#include "crsdkit/gaussian.hpp"

#include <cmath>
#include <string>

#include "crsdkit/error.hpp"

namespace crsdkit {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Accept a factor when it exists and its pivots are not relatively degenerate.
bool acceptable(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
  if (!pivots.allFinite() || (pivots.array() <= 0.0).any()) return false;
  const double lo = pivots.minCoeff();
  const double hi = pivots.maxCoeff();
  return lo * lo >= CholeskyFactor::kPivotRatio * hi * hi;
}

}  // namespace

DiagGaussian::DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd var, Eigen::VectorXd logvar)
    : mean_(std::move(mean)), var_(std::move(var)), logvar_(std::move(logvar)) {
  if (mean_.size() == 0) throw ValidationError("DiagGaussian: dimension must be >= 1");
  require_same_dim(mean_.size(), var_.size(), "DiagGaussian");
  for (Eigen::Index j = 0; j < mean_.size(); ++j) {
    if (!std::isfinite(mean_[j])) {
      throw ValidationError("DiagGaussian: mean[" + std::to_string(j) + "] is not finite");
    }
    if (!std::isfinite(var_[j]) || !std::isfinite(logvar_[j])) {
      throw ValidationError("DiagGaussian: var[" + std::to_string(j) + "] is not finite");
    }
    if (var_[j] < kVarianceFloor) {
      throw ValidationError("DiagGaussian: var[" + std::to_string(j) + "] = " +
                            std::to_string(var_[j]) + " is below the floor 1e-12");
    }
  }
}

DiagGaussian::DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd var)
    : DiagGaussian(std::move(mean), var, var.array().log().matrix()) {}

DiagGaussian DiagGaussian::from_logvar(Eigen::VectorXd mean, Eigen::VectorXd logvar) {
  Eigen::VectorXd var = logvar.array().exp().matrix();
  require_same_dim(mean.size(), logvar.size(), "DiagGaussian");
  return DiagGaussian(std::move(mean), std::move(var), std::move(logvar));
}

CholeskyFactor CholeskyFactor::compute(const Eigen::MatrixXd& cov, bool allow_jitter) {
  CholeskyFactor f;
  const Eigen::Index d = cov.rows();
  f.llt.compute(cov);
  if (!acceptable(f.llt)) {
    const double scale = cov.diagonal().cwiseAbs().mean();
    bool ok = false;
    if (allow_jitter && scale > 0.0 && std::isfinite(scale)) {
      for (double eps : {1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        f.jitter = eps * scale;
        f.llt.compute(cov + f.jitter * Eigen::MatrixXd::Identity(d, d));
        if (acceptable(f.llt)) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) {
      throw NumericalError(allow_jitter
                               ? "covariance is not positive definite after jitter up to 1e-6"
                               : "covariance is singular or not positive definite");
    }
  }
  f.log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  return f;
}

FullGaussian::FullGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) throw ValidationError("FullGaussian: dimension must be >= 1");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw ValidationError("FullGaussian: covariance must be " + std::to_string(mean_.size()) +
                          "x" + std::to_string(mean_.size()));
  }
  if (!all_finite(mean_) || !all_finite(cov_)) {
    throw ValidationError("FullGaussian: non-finite mean or covariance entry");
  }
  const double scale = cov_.cwiseAbs().maxCoeff();
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError("FullGaussian: covariance is not symmetric");
  }
  factor_ = CholeskyFactor::compute(0.5 * (cov_ + cov_.transpose()));
}

FullGaussian FullGaussian::from_diag(const DiagGaussian& g) {
  return FullGaussian(g.mean(), g.var().asDiagonal().toDenseMatrix());
}

Eigen::MatrixXd FullGaussian::effective_cov() const {
  Eigen::MatrixXd c = 0.5 * (cov_ + cov_.transpose());
  c.diagonal().array() += factor_.jitter;
  return c;
}

double FullGaussian::quad_form(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = factor_.llt.matrixL().solve(x);
  return w.squaredNorm();
}

double entropy(const DiagGaussian& p) {
  const auto d = static_cast<double>(p.dim());
  return 0.5 * (d * (1.0 + kLog2Pi) + p.log_det());
}

double entropy(const FullGaussian& p) {
  const auto d = static_cast<double>(p.dim());
  return 0.5 * (d * (1.0 + kLog2Pi) + p.log_det());
}

double cross_entropy(const DiagGaussian& r, const DiagGaussian& p) {
  require_same_dim(r.dim(), p.dim(), "cross_entropy");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < r.dim(); ++j) {
    const double delta = r.mean()[j] - p.mean()[j];
    acc += kLog2Pi + p.logvar()[j] + (r.var()[j] + delta * delta) / p.var()[j];
  }
  return 0.5 * acc;
}

double cross_entropy(const FullGaussian& r, const FullGaussian& p) {
  require_same_dim(r.dim(), p.dim(), "cross_entropy");
  const auto d = static_cast<double>(r.dim());
  const double trace = p.llt().solve(r.effective_cov()).trace();
  return 0.5 * (d * kLog2Pi + p.log_det() + trace + p.quad_form(r.mean() - p.mean()));
}

double cross_entropy(const DiagGaussian& r, const FullGaussian& p) {
  return cross_entropy(FullGaussian::from_diag(r), p);
}

double cross_entropy(const FullGaussian& r, const DiagGaussian& p) {
  return cross_entropy(r, FullGaussian::from_diag(p));
}

double kl(const DiagGaussian& p, const DiagGaussian& q) {
  require_same_dim(p.dim(), q.dim(), "kl");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p.dim(); ++j) {
    const double delta = p.mean()[j] - q.mean()[j];
    acc += p.var()[j] / q.var()[j] + delta * delta / q.var()[j] - 1.0 + q.logvar()[j] -
           p.logvar()[j];
  }
  return 0.5 * acc;
}

double kl(const FullGaussian& p, const FullGaussian& q) {
  require_same_dim(p.dim(), q.dim(), "kl");
  if (p.mean() == q.mean() && p.cov() == q.cov()) return 0.0;
  const auto d = static_cast<double>(p.dim());
  const double trace = q.llt().solve(p.effective_cov()).trace();
  return 0.5 * (trace + q.quad_form(p.mean() - q.mean()) - d + q.log_det() - p.log_det());
}

double log_density(const FullGaussian& g, const Eigen::VectorXd& z) {
  require_same_dim(g.dim(), z.size(), "log_density");
  const auto d = static_cast<double>(g.dim());
  return -0.5 * (d * kLog2Pi + g.log_det() + g.quad_form(z - g.mean()));
}

double log_density(const DiagGaussian& g, const Eigen::VectorXd& z) {
  require_same_dim(g.dim(), z.size(), "log_density");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double delta = z[j] - g.mean()[j];
    acc += kLog2Pi + g.logvar()[j] + delta * delta / g.var()[j];
  }
  return -0.5 * acc;
}

double mahalanobis_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      const Eigen::MatrixXd& cov) {
  require_same_dim(a.size(), b.size(), "mahalanobis_sq");
  if (cov.rows() != a.size() || cov.cols() != a.size()) {
    throw ValidationError("mahalanobis_sq: covariance shape does not match vectors");
  }
  const CholeskyFactor f = CholeskyFactor::compute(cov, /*allow_jitter=*/false);
  const Eigen::VectorXd w = f.llt.matrixL().solve(a - b);
  return w.squaredNorm();
}

}  // namespace crsdkit
