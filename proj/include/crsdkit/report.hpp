#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "crsdkit/crossval.hpp"
#include "crsdkit/crsd.hpp"
#include "crsdkit/elbo_audit.hpp"
#include "crsdkit/metrics.hpp"
#include "crsdkit/provenance.hpp"

namespace crsdkit {

/// "# crsdkit 0.1.0 <command> config=<hash>"
std::string provenance_line(const Provenance& p);
/// {"_provenance":{...}} on one line, no trailing newline.
std::string provenance_jsonl(const Provenance& p);

/// "0.812±0.010"
std::string format_mean_std(const MeanStd& m, int digits = 3);

// Text reports end with a newline and start with provenance_line. JSON twins
// are pretty-printed objects with a "provenance" field.

std::string crossval_text(const CrossvalTable& t, const Provenance& p);
std::string crossval_json(const CrossvalTable& t, const Provenance& p);

std::string occ_text(const OccEvaluation& e, const Provenance& p);
std::string occ_json(const OccEvaluation& e, const Provenance& p);
/// threshold,fpr,tpr rows; the first threshold is "inf".
std::string roc_csv(const RocCurve& roc);

std::string identity_text(const IdentityReport& r, const Provenance& p);
std::string identity_json(const IdentityReport& r, const Provenance& p);

struct ObjectiveSummary {
  Objective model = Objective::vae;
  double recon_loglik = 0.0;
  double value = 0.0;
};

std::string elbo_text(const ElboAudit& a, const std::optional<ObjectiveSummary>& obj,
                      const Provenance& p);
std::string elbo_json(const ElboAudit& a, const std::optional<ObjectiveSummary>& obj,
                      const Provenance& p);

std::string cluster_score_text(const ClusterScoreReport& r, const Provenance& p);
std::string cluster_score_json(const ClusterScoreReport& r, const Provenance& p);

/// Rows are (beta, dim), columns augmentations; "-" for absent files.
std::string sweep_text(std::span<const SweepEntry> entries, const Provenance& p);
std::string sweep_json(std::span<const SweepEntry> entries, const Provenance& p);

/// Writes content to path, replacing it. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace crsdkit
