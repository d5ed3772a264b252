#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "crsdkit/occ.hpp"
#include "crsdkit/provenance.hpp"

namespace crsdkit {

inline constexpr int kModelFormatVersion = 1;

/// JSON model file with fields version, dim, mean, cov_row_major,
/// jitter_applied, n_fit, estimator and an optional provenance object.
/// Doubles are written in shortest round-trip form, so mean and covariance
/// survive a write/read cycle bit-for-bit.
void write_model(std::ostream& out, const NormalModel& model,
                 const std::optional<Provenance>& provenance = std::nullopt);
void write_model(const std::filesystem::path& path, const NormalModel& model,
                 const std::optional<Provenance>& provenance = std::nullopt);

/// Throws ValidationError on a missing field, a version other than
/// kModelFormatVersion, or inconsistent sizes.
NormalModel read_model(std::istream& in);
NormalModel read_model(const std::filesystem::path& path);

}  // namespace crsdkit
