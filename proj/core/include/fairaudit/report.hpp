#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/inference.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

enum class Analysis { Describe = 0, Unadjusted, Adjusted, Sensitivity, Robustness };

inline constexpr std::array<Analysis, 5> kAllAnalyses = {Analysis::Describe, Analysis::Unadjusted,
                                                         Analysis::Adjusted, Analysis::Sensitivity,
                                                         Analysis::Robustness};

const char* analysis_key(Analysis a);
std::optional<Analysis> analysis_from_key(std::string_view key);
/// Comma-separated list, e.g. "describe,unadjusted". Throws on unknown names.
std::vector<Analysis> parse_analyses(std::string_view csv);

/// Resolved run configuration. CLI flags override config-file values, which
/// override these defaults.
struct RunConfig {
  std::vector<std::string> inputs;
  std::string mapping_path;  // empty: built-in default vocabulary
  ToleranceBand band{0.05, 0.05};
  BootstrapConfig bootstrap{1000, 42, 0.05};
  std::vector<Analysis> analyses{kAllAnalyses.begin(), kAllAnalyses.end()};
  std::string out_dir = "audit_out";
  MissingPolicy missing_policy = MissingPolicy::UnknownLevel;  // for the 'adjusted' block
  unsigned threads = 1;
};

/// Overlays config-file values onto `cfg` (JSON mirroring RunConfig fields).
void apply_config_json_text(RunConfig& cfg, const std::string& text);
void apply_config_json_file(RunConfig& cfg, const std::string& path);

/// FNV-1a over the semantically meaningful fields (inputs, mapping, band,
/// bootstrap, analyses as a set, missing policy). Output dir and thread
/// count do not change results, so they do not change the hash.
std::string config_hash(const RunConfig& cfg);

struct ReportMeta {
  std::string toolkit;
  std::string version;
  uint64_t seed = 0;
  int n_resamples = 0;
  double delta = 0.05;
  double alpha = 0.05;
  MissingPolicy missing_policy = MissingPolicy::UnknownLevel;
  std::string config_hash;
  size_t cases_loaded = 0;
  size_t rows_rejected = 0;
};

struct DescribeBlock {
  FrequencyReport freq;
  ProtocolSummary protocols;
  std::array<OverlapRow, kAttrCount> overlap;
};

struct AuditReport {
  ReportMeta meta;
  bool has_describe = false;
  DescribeBlock describe;
  std::vector<DisparityResult> unadjusted;
  std::vector<AdjustedResult> adjusted;
  std::vector<AdjustedResult> sensitivity;
  std::vector<AdjustedResult> robustness;
  std::vector<std::string> rejects;
};

/// Executes the requested analyses in fixed order (describe, unadjusted,
/// adjusted, sensitivity, robustness). Identical config and seed give a
/// byte-identical report regardless of `threads`.
AuditReport run(const RunConfig& cfg);

std::string report_to_json(const AuditReport& report);
AuditReport report_from_json(const std::string& text);

/// Fixed-column tables: rates at one decimal (pp), differences and CI
/// endpoints at two decimals (pp), Evidence Ratio as a whole percent with
/// its strength label.
std::string emit_markdown(const AuditReport& report);

/// Writes report.json, report.md and rejects.log into out_dir (created if
/// needed).
void write_outputs(const AuditReport& report, const std::string& out_dir);

}  // namespace fairaudit
