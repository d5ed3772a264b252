#include "crsdkit/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "crsdkit/error.hpp"
#include "json.hpp"

namespace crsdkit {

using nlohmann::json;

void write_model(std::ostream& out, const NormalModel& model,
                 const std::optional<Provenance>& provenance) {
  const auto& g = model.gaussian;
  const auto d = g.dim();
  std::vector<double> cov;
  cov.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) cov.push_back(g.cov()(i, j));
  }
  json obj;
  obj["version"] = kModelFormatVersion;
  obj["dim"] = d;
  obj["mean"] = std::vector<double>(g.mean().data(), g.mean().data() + d);
  obj["cov_row_major"] = std::move(cov);
  obj["jitter_applied"] = model.jitter_applied();
  obj["n_fit"] = model.n_fit;
  obj["estimator"] = std::string(to_string(model.estimator));
  if (provenance) {
    obj["provenance"] = {{"tool", kToolName},
                         {"version", kToolVersion},
                         {"command", provenance->command},
                         {"config_hash", provenance->config_hash}};
  }
  out << obj.dump(2) << '\n';
}

void write_model(const std::filesystem::path& path, const NormalModel& model,
                 const std::optional<Provenance>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_model(out, model, provenance);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

NormalModel read_model(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file: JSON parse error: ") + e.what());
  }
  for (const char* key : {"version", "dim", "mean", "cov_row_major"}) {
    if (!obj.contains(key)) throw ValidationError(std::string("model file: missing '") + key + "'");
  }
  if (!obj["version"].is_number_integer() || obj["version"].get<int>() != kModelFormatVersion) {
    throw ValidationError("model file: unsupported version " + obj["version"].dump() +
                          " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  try {
    const auto d = obj["dim"].get<Eigen::Index>();
    const auto mean = obj["mean"].get<std::vector<double>>();
    const auto cov = obj["cov_row_major"].get<std::vector<double>>();
    if (d < 1 || mean.size() != static_cast<std::size_t>(d) ||
        cov.size() != static_cast<std::size_t>(d * d)) {
      throw ValidationError("model file: dim, mean and cov_row_major sizes disagree");
    }
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
    Eigen::MatrixXd sigma(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) sigma(i, j) = cov[static_cast<std::size_t>(i * d + j)];
    }
    NormalModel model{FullGaussian(std::move(mu), std::move(sigma)),
                      obj.value("n_fit", std::size_t{0}),
                      parse_estimator(obj.value("estimator", std::string("printed")))};
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

NormalModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_model(in);
}

}  // namespace crsdkit
