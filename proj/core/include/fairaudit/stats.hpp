#pragma once

#include <string>
#include <utility>

#include "fairaudit/attribute.hpp"
#include "fairaudit/cohort.hpp"

namespace fairaudit {

/// Standard normal CDF, accurate to a few ulp (erfc-based).
double normal_cdf(double x);
/// Standard normal quantile for p in (0,1); |error| well below 1e-12.
double normal_quantile(double p);

/// Observed error count over one comparison group.
struct ProportionSummary {
  std::string group_label;
  size_t errors = 0;
  size_t n = 0;

  double rate() const { return n == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n); }
};

/// Pre-specified evaluation parameters: tolerance half-width delta (risk
/// difference scale) and two-sided significance level alpha.
struct ToleranceBand {
  double delta = 0.05;
  double alpha = 0.05;
};

enum class BandClass { Equivalence, Inconclusive, NonEquivalence };
enum class EvidenceStrength { Strong, Moderate, Weak };

const char* band_class_key(BandClass c);
const char* strength_key(EvidenceStrength s);
const char* strength_display(EvidenceStrength s);  // "Strong evidence", ...

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// CI-versus-band verdict: the three-way classification, the interval, and
/// the Evidence Ratio (CI width over the tolerance span 2*delta) with its
/// qualitative strength label.
struct IntervalVerdict {
  BandClass classification = BandClass::Inconclusive;
  Interval ci;
  double evidence_ratio = 0.0;
  EvidenceStrength strength = EvidenceStrength::Weak;
};

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided two-proportion z-test with pooled variance. Zero pooled
/// variance (all errors or none) yields z=0, p=1; both rates are equal then.
ZTest two_prop_z(const ProportionSummary& s0, const ProportionSummary& s1);

/// Wald CI for rate1 - rate0 with unpooled variance.
Interval wald_ci_diff(const ProportionSummary& s0, const ProportionSummary& s1, double alpha);

/// Exactly one of the three classes for every (lo <= hi, delta > 0):
///   Equivalence     lo >= -delta and hi <= +delta
///   NonEquivalence  lo > +delta or hi < -delta
///   Inconclusive    otherwise (partial overlap or full containment of band)
BandClass classify_tolerance(const Interval& ci, const ToleranceBand& band);

/// (hi - lo) / (2*delta); Strong < 0.50 <= Moderate < 0.80 <= Weak.
std::pair<double, EvidenceStrength> evidence_ratio(const Interval& ci, const ToleranceBand& band);

IntervalVerdict band_verdict(const Interval& ci, const ToleranceBand& band);

/// Achieved power to detect a disparity of magnitude band.delta at
/// band.alpha, via the arcsine (Cohen's h) normal approximation with the
/// pooled observed rate as baseline.
double power_two_prop(size_t n0, size_t n1, double baseline_rate, const ToleranceBand& band);

inline constexpr double kSufficientPower = 0.80;

/// Complete unadjusted audit for one attribute.
struct DisparityResult {
  Attr attribute{};
  ProportionSummary group0, group1;
  double delta = 0.0;  // rate1 - rate0
  double z = 0.0;
  double p_value = 1.0;
  IntervalVerdict verdict;
  double power = 0.0;
  bool power_sufficient = false;  // power >= 0.80; below it the comparison is
                                  // inconclusive regardless of the CI
};

/// Composes subcohorting, rates, z-test, Wald CI, band classification,
/// Evidence Ratio and power. Throws Error(Degenerate) when a group is empty
/// or the pooled rate is 0 or 1.
DisparityResult unadjusted_audit(const Cohort& c, Attr attribute, const ToleranceBand& band,
                                 const AttributeMapping& mapping);

}  // namespace fairaudit
