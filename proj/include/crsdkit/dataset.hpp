#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crsdkit/gaussian.hpp"

namespace crsdkit {

/// One encoded cell: an id, its class label and its latent posterior.
struct EmbeddingRecord {
  std::string id;
  std::string label;
  DiagGaussian posterior;
};

/// Non-empty, ordered, id-unique collection of records sharing one latent
/// dimension. Immutable after construction.
class Dataset {
 public:
  /// Throws ValidationError on empty input, duplicate ids or ragged dimensions.
  explicit Dataset(std::vector<EmbeddingRecord> records);

  std::span<const EmbeddingRecord> records() const { return records_; }
  const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  Eigen::Index dim() const { return dim_; }

  /// Distinct labels in lexicographic order.
  std::vector<std::string> labels() const;

  /// Posterior means as rows of an n x d matrix.
  Eigen::MatrixXd means() const;
  std::vector<DiagGaussian> posteriors() const;

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<EmbeddingRecord> records_;
  Eigen::Index dim_ = 0;
};

enum class DataFormat { jsonl, csv };

DataFormat parse_format(std::string_view name);
/// Picks csv for a ".csv" extension, jsonl otherwise.
DataFormat infer_format(const std::filesystem::path& path);

/// Parse errors carry "<source>:<line>:"; validation errors name the record.
/// JSONL lines whose object has a "_provenance" key are skipped.
Dataset parse_jsonl(std::istream& in, const std::string& source = "<jsonl>");
Dataset parse_csv(std::istream& in, const std::string& source = "<csv>");
Dataset read_dataset(const std::filesystem::path& path, DataFormat format);
Dataset read_dataset(const std::filesystem::path& path);

void write_jsonl(std::ostream& out, const Dataset& ds);
void write_csv(std::ostream& out, const Dataset& ds);

/// Label-stratified fold assignment for k-fold cross-validation.
struct FoldSplit {
  std::size_t fold_count = 1;
  /// fold_of[i] is the fold of record i, in dataset order.
  std::vector<std::size_t> fold_of;
  /// Labels with fewer records than fold_count; some folds lack them.
  std::vector<std::string> undersized_labels;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Deterministic for a given seed. Within each label stratum fold sizes differ
/// by at most one; strata are dealt round-robin continuing from the previous
/// stratum so overall fold sizes also differ by at most one.
FoldSplit stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace crsdkit
