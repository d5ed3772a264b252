#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "crsdkit/dataset.hpp"

namespace crsdkit {

enum class FixturePreset { two_class, k_blobs, degenerate };

FixturePreset parse_preset(std::string_view name);
std::string_view to_string(FixturePreset p);

struct FixtureOptions {
  FixturePreset preset = FixturePreset::two_class;
  std::size_t n = 600;
  Eigen::Index dim = 8;
  double shift = 3.0;  // two-class: abnormal mean offset along a random unit vector
  double sep = 6.0;    // k-blobs: minimum distance between blob centres
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::string normal_label = "NILM";
  std::string abnormal_label = "ABN";
};

/// Synthetic posteriors standing in for encoder output. Means are drawn around
/// the class centre with unit spread and posterior variances are U[0.1, 0.5].
///
/// two-class: ceil(n/2) normals with means ~ N(0, I), the rest shifted by
///   shift along one random unit vector.
/// k-blobs: n records split over labels C0..C{k-1}. Centres are rescaled so
///   that the closest pair is exactly sep apart, and each blob's sample mean
///   is moved onto its centre.
/// degenerate: n normals plus duplicated posteriors under new ids, variances
///   at and just above the ingestion floor, and a label with a single record.
Dataset make_fixture(const FixtureOptions& options);

}  // namespace crsdkit
