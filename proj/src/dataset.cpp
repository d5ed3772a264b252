#include "crsdkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "crsdkit/error.hpp"
#include "crsdkit/random.hpp"
#include "json.hpp"

namespace crsdkit {

using nlohmann::json;

Dataset::Dataset(std::vector<EmbeddingRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("dataset is empty");
  dim_ = records_.front().posterior.dim();
  std::set<std::string_view> seen;
  for (const auto& r : records_) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (!seen.insert(r.id).second) throw ValidationError("duplicate record id '" + r.id + "'");
    if (r.posterior.dim() != dim_) {
      throw ValidationError("record '" + r.id + "': dimension " +
                            std::to_string(r.posterior.dim()) + " differs from dataset dimension " +
                            std::to_string(dim_));
    }
  }
}

std::vector<std::string> Dataset::labels() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.label);
  return {s.begin(), s.end()};
}

Eigen::MatrixXd Dataset::means() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(records_.size()), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = records_[i].posterior.mean().transpose();
  }
  return m;
}

std::vector<DiagGaussian> Dataset::posteriors() const {
  std::vector<DiagGaussian> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.posterior);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<EmbeddingRecord> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(records_.at(i));
  return Dataset(std::move(out));
}

DataFormat parse_format(std::string_view name) {
  if (name == "jsonl") return DataFormat::jsonl;
  if (name == "csv") return DataFormat::csv;
  throw ValidationError("unknown format '" + std::string(name) + "' (expected jsonl or csv)");
}

DataFormat infer_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DataFormat::csv : DataFormat::jsonl;
}

namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

Eigen::VectorXd number_array(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(ctx + "missing field '" + key + "'");
  if (!it->is_array()) throw ValidationError(ctx + "field '" + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(it->size()));
  for (std::size_t j = 0; j < it->size(); ++j) {
    const auto& e = (*it)[j];
    if (!e.is_number()) {
      throw ValidationError(ctx + "field '" + key + "'[" + std::to_string(j) +
                            "] is not a number");
    }
    v[static_cast<Eigen::Index>(j)] = e.get<double>();
  }
  return v;
}

std::string string_field(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(ctx + "missing field '" + key + "'");
  if (!it->is_string()) throw ValidationError(ctx + "field '" + key + "' must be a string");
  return it->get<std::string>();
}

EmbeddingRecord make_record(std::string id, std::string label, Eigen::VectorXd mu,
                            Eigen::VectorXd logvar, const std::string& ctx) {
  if (mu.size() != logvar.size()) {
    throw ValidationError(ctx + "record '" + id + "': mu has " + std::to_string(mu.size()) +
                          " entries but logvar has " + std::to_string(logvar.size()));
  }
  try {
    auto g = DiagGaussian::from_logvar(std::move(mu), std::move(logvar));
    return EmbeddingRecord{std::move(id), std::move(label), std::move(g)};
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + "record '" + id + "': " + e.what());
  }
}

// Dataset-level checks (duplicates, ragged rows) reported with line numbers.
Dataset assemble(std::vector<EmbeddingRecord> records, const std::vector<std::size_t>& lines,
                 const std::string& source) {
  if (records.empty()) throw ValidationError(source + ": no records");
  std::map<std::string_view, std::size_t> first_line;
  const auto dim = records.front().posterior.dim();
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = first_line.emplace(records[i].id, lines[i]);
    if (!inserted) {
      throw ValidationError(where(source, lines[i]) + "duplicate record id '" + records[i].id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    }
    if (records[i].posterior.dim() != dim) {
      throw ValidationError(where(source, lines[i]) + "record '" + records[i].id +
                            "': dimension " + std::to_string(records[i].posterior.dim()) +
                            " differs from " + std::to_string(dim));
    }
  }
  return Dataset(std::move(records));
}

std::vector<std::string> split_csv(const std::string& line, const std::string& ctx) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ValidationError(ctx + "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s, const std::string& ctx, const std::string& column) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  if (begin < end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(ctx + "column '" + column + "': cannot parse '" + s + "' as a number");
  }
  return v;
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Dataset parse_jsonl(std::istream& in, const std::string& source) {
  std::vector<EmbeddingRecord> records;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string ctx = where(source, lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(ctx + "JSON parse error: " + e.what());
    }
    if (!obj.is_object()) throw ValidationError(ctx + "expected a JSON object");
    if (obj.contains("_provenance")) continue;
    auto id = string_field(obj, "id", ctx);
    auto label = string_field(obj, "label", ctx);
    auto mu = number_array(obj, "mu", ctx + "record '" + id + "': ");
    auto logvar = number_array(obj, "logvar", ctx + "record '" + id + "': ");
    records.push_back(make_record(std::move(id), std::move(label), std::move(mu),
                                  std::move(logvar), ctx));
    lines.push_back(lineno);
  }
  return assemble(std::move(records), lines, source);
}

Dataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line, where(source, lineno));
    break;
  }
  if (header.empty()) throw ValidationError(source + ": missing CSV header");
  const std::string hctx = where(source, lineno);
  if (header.size() < 4 || (header.size() - 2) % 2 != 0 || header[0] != "id" ||
      header[1] != "label") {
    throw ValidationError(hctx + "header must be id,label,mu_0..mu_{d-1},logvar_0..logvar_{d-1}");
  }
  const std::size_t d = (header.size() - 2) / 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[2 + j] != "mu_" + std::to_string(j) ||
        header[2 + d + j] != "logvar_" + std::to_string(j)) {
      throw ValidationError(hctx + "unexpected header column near index " +
                            std::to_string(2 + j) + " (expected mu_" + std::to_string(j) +
                            " / logvar_" + std::to_string(j) + ")");
    }
  }

  std::vector<EmbeddingRecord> records;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string ctx = where(source, lineno);
    auto fields = split_csv(line, ctx);
    if (fields.size() != header.size()) {
      throw ValidationError(ctx + "expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(fields.size()));
    }
    Eigen::VectorXd mu(static_cast<Eigen::Index>(d));
    Eigen::VectorXd logvar(static_cast<Eigen::Index>(d));
    const std::string rctx = ctx + "record '" + fields[0] + "': ";
    for (std::size_t j = 0; j < d; ++j) {
      mu[static_cast<Eigen::Index>(j)] = parse_double(fields[2 + j], rctx, header[2 + j]);
      logvar[static_cast<Eigen::Index>(j)] =
          parse_double(fields[2 + d + j], rctx, header[2 + d + j]);
    }
    records.push_back(make_record(std::move(fields[0]), std::move(fields[1]), std::move(mu),
                                  std::move(logvar), ctx));
    lines.push_back(lineno);
  }
  return assemble(std::move(records), lines, source);
}

Dataset read_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return format == DataFormat::csv ? parse_csv(in, path.string()) : parse_jsonl(in, path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  return read_dataset(path, infer_format(path));
}

void write_jsonl(std::ostream& out, const Dataset& ds) {
  for (const auto& r : ds.records()) {
    json obj;
    obj["id"] = r.id;
    obj["label"] = r.label;
    const auto& g = r.posterior;
    obj["mu"] = std::vector<double>(g.mean().data(), g.mean().data() + g.dim());
    obj["logvar"] = std::vector<double>(g.logvar().data(), g.logvar().data() + g.dim());
    out << obj.dump() << '\n';
  }
}

void write_csv(std::ostream& out, const Dataset& ds) {
  const auto d = ds.dim();
  out << "id,label";
  for (Eigen::Index j = 0; j < d; ++j) out << ",mu_" << j;
  for (Eigen::Index j = 0; j < d; ++j) out << ",logvar_" << j;
  out << '\n';
  for (const auto& r : ds.records()) {
    out << csv_escape(r.id) << ',' << csv_escape(r.label);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << shortest(r.posterior.mean()[j]);
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << shortest(r.posterior.logvar()[j]);
    out << '\n';
  }
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldSplit stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ValidationError("fold count must be positive");
  if (k > ds.size()) {
    throw ValidationError("fold count " + std::to_string(k) + " exceeds dataset size " +
                          std::to_string(ds.size()));
  }
  FoldSplit split;
  split.fold_count = k;
  split.fold_of.assign(ds.size(), 0);

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.size(); ++i) strata[ds[i].label].push_back(i);

  std::mt19937_64 rng = make_rng(seed, 0x6b666f6c64ULL);
  std::size_t next = 0;
  for (auto& [label, members] : strata) {
    if (members.size() < k) split.undersized_labels.push_back(label);
    std::shuffle(members.begin(), members.end(), rng);
    for (auto idx : members) {
      split.fold_of[idx] = next;
      next = (next + 1) % k;
    }
  }
  return split;
}

}  // namespace crsdkit
