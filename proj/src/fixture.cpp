#include "crsdkit/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crsdkit/error.hpp"
#include "crsdkit/random.hpp"

namespace crsdkit {

FixturePreset parse_preset(std::string_view name) {
  if (name == "two-class") return FixturePreset::two_class;
  if (name == "k-blobs") return FixturePreset::k_blobs;
  if (name == "degenerate") return FixturePreset::degenerate;
  throw ValidationError("unknown fixture preset '" + std::string(name) +
                        "' (expected two-class, k-blobs or degenerate)");
}

std::string_view to_string(FixturePreset p) {
  switch (p) {
    case FixturePreset::two_class: return "two-class";
    case FixturePreset::k_blobs: return "k-blobs";
    case FixturePreset::degenerate: return "degenerate";
  }
  return "?";
}

namespace {

std::string make_id(const char* prefix, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

class Sampler {
 public:
  Sampler(std::uint64_t seed, Eigen::Index d) : rng_(make_rng(seed, 0x66697874)), d_(d) {}

  Eigen::VectorXd normal() {
    Eigen::VectorXd v(d_);
    for (Eigen::Index j = 0; j < d_; ++j) v[j] = n01_(rng_);
    return v;
  }
  Eigen::VectorXd var() {
    Eigen::VectorXd v(d_);
    for (Eigen::Index j = 0; j < d_; ++j) v[j] = u_(rng_);
    return v;
  }

 private:
  std::mt19937_64 rng_;
  Eigen::Index d_;
  std::normal_distribution<double> n01_{0.0, 1.0};
  std::uniform_real_distribution<double> u_{0.1, 0.5};
};

EmbeddingRecord record(std::string id, std::string label, Eigen::VectorXd mu, Eigen::VectorXd var) {
  return {std::move(id), std::move(label), DiagGaussian(std::move(mu), std::move(var))};
}

std::vector<EmbeddingRecord> two_class(const FixtureOptions& o, Sampler& s) {
  Eigen::VectorXd u = s.normal();
  u /= u.norm();
  const std::size_t n_normal = (o.n + 1) / 2;
  std::vector<EmbeddingRecord> out;
  for (std::size_t i = 0; i < n_normal; ++i) {
    Eigen::VectorXd mu = s.normal();
    out.push_back(record(make_id("n", i), o.normal_label, mu, s.var()));
  }
  for (std::size_t i = 0; i < o.n - n_normal; ++i) {
    Eigen::VectorXd mu = s.normal() + o.shift * u;
    out.push_back(record(make_id("a", i), o.abnormal_label, mu, s.var()));
  }
  return out;
}

std::vector<EmbeddingRecord> k_blobs(const FixtureOptions& o, Sampler& s) {
  if (o.k < 2) throw ValidationError("fixture: k-blobs needs k >= 2");
  if (o.n < o.k) throw ValidationError("fixture: k-blobs needs n >= k");
  if (!(o.sep > 0.0)) throw ValidationError("fixture: sep must be positive");
  std::vector<Eigen::VectorXd> centres;
  for (std::size_t c = 0; c < o.k; ++c) centres.push_back(s.normal());
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < o.k; ++a) {
    for (std::size_t b = a + 1; b < o.k; ++b) {
      closest = std::min(closest, (centres[a] - centres[b]).norm());
    }
  }
  for (auto& c : centres) c *= o.sep / closest;

  std::vector<EmbeddingRecord> out;
  for (std::size_t c = 0; c < o.k; ++c) {
    const std::size_t size = o.n / o.k + (c < o.n % o.k ? 1 : 0);
    std::vector<Eigen::VectorXd> offs;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(o.dim);
    for (std::size_t i = 0; i < size; ++i) {
      offs.push_back(s.normal());
      mean += offs.back();
    }
    mean /= static_cast<double>(size);
    const std::string label = "C" + std::to_string(c);
    const std::string prefix = "c" + std::to_string(c) + "_";
    for (std::size_t i = 0; i < size; ++i) {
      out.push_back(record(make_id(prefix.c_str(), i), label, centres[c] + offs[i] - mean, s.var()));
    }
  }
  return out;
}

std::vector<EmbeddingRecord> degenerate(const FixtureOptions& o, Sampler& s) {
  if (o.n < 2) throw ValidationError("fixture: degenerate needs n >= 2");
  std::vector<EmbeddingRecord> out;
  for (std::size_t i = 0; i < o.n; ++i) {
    out.push_back(record(make_id("n", i), o.normal_label, s.normal(), s.var()));
  }
  // Same posterior as an existing record under a new id.
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& src = out[i].posterior;
    out.push_back(record(make_id("dup", i), o.normal_label, src.mean(), src.var()));
  }
  Eigen::VectorXd at_floor = s.var();
  at_floor[0] = kVarianceFloor;
  out.push_back(record(make_id("floor", 0), o.abnormal_label, s.normal(), at_floor));
  out.push_back(record(make_id("floor", 1), o.abnormal_label, s.normal(),
                       Eigen::VectorXd::Constant(o.dim, 2.0 * kVarianceFloor)));
  out.push_back(record(make_id("rare", 0), "RARE", s.normal(), s.var()));
  return out;
}

}  // namespace

Dataset make_fixture(const FixtureOptions& o) {
  if (o.dim < 1) throw ValidationError("fixture: dim must be >= 1");
  if (o.n < 2) throw ValidationError("fixture: n must be >= 2");
  if (o.normal_label == o.abnormal_label) {
    throw ValidationError("fixture: normal and abnormal labels must differ");
  }
  Sampler s(o.seed, o.dim);
  switch (o.preset) {
    case FixturePreset::two_class: return Dataset(two_class(o, s));
    case FixturePreset::k_blobs: return Dataset(k_blobs(o, s));
    case FixturePreset::degenerate: return Dataset(degenerate(o, s));
  }
  throw ValidationError("fixture: unknown preset");
}

}  // namespace crsdkit
