#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairaudit/glm.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

struct BootstrapConfig {
  int n_resamples = 1000;
  uint64_t seed = 0;
  double max_discard_fraction = 0.05;
};

/// Protocol-controlled adjusted disparity with a percentile bootstrap CI.
struct AdjustedResult {
  Attr attribute{};
  std::string adjustment_label;             // e.g. "Protocol + Race"
  std::vector<std::string> adjustment_set;  // machine keys, e.g. {"protocol","race"}
  MissingPolicy missing_policy = MissingPolicy::UnknownLevel;
  double adj_p0 = 0.0;
  double adj_p1 = 0.0;
  double adj_delta = 0.0;  // full-data point estimate, p1 - p0
  IntervalVerdict verdict; // percentile 2.5/97.5 CI vs band
  int discarded_resamples = 0;  // degenerate draws, replaced from the reserved substream
  int separation_events = 0;    // fits (point + resamples) that needed the automatic ridge
  size_t n_rows = 0;
  size_t rows_dropped = 0;      // complete-case exclusions
};

/// Case-level bootstrap of the marginally standardized disparity.
///
/// Resample r draws its indices from substream (seed, r) only, so output is
/// identical for any `threads` value. Draws where a factor level or an
/// attribute group vanishes, or where the refit fails, are discarded, counted
/// and replaced from a reserved substream; more than
/// max_discard_fraction * n_resamples discards raise
/// Error(BootstrapDiscardCap). Reference levels stay fixed at their full-data
/// choices across resamples.
AdjustedResult bootstrap_adjusted_delta(const Cohort& c, const ModelSpec& spec,
                                        const BootstrapConfig& cfg, const ToleranceBand& band,
                                        const AttributeMapping& mapping, unsigned threads = 1);

/// One adjusted row: protocol fixed effects plus one covariate (Unknown
/// levels retained).
AdjustedResult adjusted_audit(const Cohort& c, Attr attribute, Attr covariate,
                              const BootstrapConfig& cfg, const ToleranceBand& band,
                              const AttributeMapping& mapping, unsigned threads = 1);

/// A single control variable for sensitivity analyses: the protocol or one
/// other protected attribute.
struct ControlVar {
  bool is_protocol = false;
  Attr attr{};

  static ControlVar protocol() { return {true, Attr::Sex}; }
  static ControlVar attribute(Attr a) { return {false, a}; }
};

/// Intercept + attribute + one control only. Rows with unknown states for the
/// protected attribute are excluded (as in every audit); control covariates
/// keep their Unknown level.
AdjustedResult single_factor_sensitivity(const Cohort& c, Attr attribute, const ControlVar& control,
                                         const BootstrapConfig& cfg, const ToleranceBand& band,
                                         const AttributeMapping& mapping, unsigned threads = 1);

/// adjusted_audit under the complete-case policy; reports the row reduction.
AdjustedResult complete_case_robustness(const Cohort& c, Attr attribute, Attr covariate,
                                        const BootstrapConfig& cfg, const ToleranceBand& band,
                                        const AttributeMapping& mapping, unsigned threads = 1);

/// Linear-interpolation quantile of a sorted sample (R type 7).
double quantile_type7(const std::vector<double>& sorted, double q);

}  // namespace fairaudit
