#pragma once

#include <string>

namespace crsdkit {

inline constexpr const char* kToolName = "crsdkit";
inline constexpr const char* kToolVersion = "0.1.0";

/// Stamped on every artifact the CLI writes.
struct Provenance {
  std::string command;
  /// 16 hex digits; hash of the canonical command configuration.
  std::string config_hash;
};

}  // namespace crsdkit
