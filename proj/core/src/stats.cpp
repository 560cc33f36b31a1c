#include "fairaudit/stats.hpp"

#include <cmath>
#include <numbers>

#include "fairaudit/error.hpp"

namespace fairaudit {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw_input("normal_quantile requires 0 < p < 1");

  // Acklam's rational approximation (~1e-9), then two Halley steps against
  // the erfc-based CDF push the error to machine precision.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};

  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 0.97575) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  for (int i = 0; i < 2; ++i) {
    const double err = normal_cdf(x) - p;
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    if (!std::isfinite(u)) break;
    x -= u / (1.0 + x * u / 2.0);
  }
  return x;
}

const char* band_class_key(BandClass c) {
  switch (c) {
    case BandClass::Equivalence: return "equivalence";
    case BandClass::Inconclusive: return "inconclusive";
    case BandClass::NonEquivalence: return "non_equivalence";
  }
  return "?";
}

const char* strength_key(EvidenceStrength s) {
  switch (s) {
    case EvidenceStrength::Strong: return "strong";
    case EvidenceStrength::Moderate: return "moderate";
    case EvidenceStrength::Weak: return "weak";
  }
  return "?";
}

const char* strength_display(EvidenceStrength s) {
  switch (s) {
    case EvidenceStrength::Strong: return "Strong evidence";
    case EvidenceStrength::Moderate: return "Moderate evidence";
    case EvidenceStrength::Weak: return "Weak evidence";
  }
  return "?";
}

namespace {

void check_band(const ToleranceBand& band) {
  if (!(band.delta > 0.0 && band.delta < 1.0)) throw_input("tolerance delta must be in (0,1)");
  if (!(band.alpha > 0.0 && band.alpha < 1.0)) throw_input("alpha must be in (0,1)");
}

void check_interval(const Interval& ci) {
  if (!(ci.lo <= ci.hi)) throw_input("interval requires lo <= hi");
}

}  // namespace

ZTest two_prop_z(const ProportionSummary& s0, const ProportionSummary& s1) {
  if (s0.n < 1 || s1.n < 1) throw_input("two_prop_z requires n >= 1 in both groups");
  const double pooled =
      static_cast<double>(s0.errors + s1.errors) / static_cast<double>(s0.n + s1.n);
  if (pooled <= 0.0 || pooled >= 1.0) {
    // Zero pooled variance can only happen when both rates are 0 or both 1.
    return {0.0, 1.0};
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(s0.n) + 1.0 / static_cast<double>(s1.n)));
  const double z = (s1.rate() - s0.rate()) / se;
  return {z, 2.0 * normal_cdf(-std::abs(z))};
}

Interval wald_ci_diff(const ProportionSummary& s0, const ProportionSummary& s1, double alpha) {
  if (s0.n < 1 || s1.n < 1) throw_input("wald_ci_diff requires n >= 1 in both groups");
  const double zc = normal_quantile(1.0 - alpha / 2.0);
  const double p0 = s0.rate();
  const double p1 = s1.rate();
  const double se = std::sqrt(p1 * (1.0 - p1) / static_cast<double>(s1.n) +
                              p0 * (1.0 - p0) / static_cast<double>(s0.n));
  const double diff = p1 - p0;
  return {diff - zc * se, diff + zc * se};
}

BandClass classify_tolerance(const Interval& ci, const ToleranceBand& band) {
  check_interval(ci);
  check_band(band);
  if (ci.lo >= -band.delta && ci.hi <= band.delta) return BandClass::Equivalence;
  if (ci.lo > band.delta || ci.hi < -band.delta) return BandClass::NonEquivalence;
  return BandClass::Inconclusive;
}

std::pair<double, EvidenceStrength> evidence_ratio(const Interval& ci, const ToleranceBand& band) {
  check_interval(ci);
  check_band(band);
  const double ratio = ci.width() / (2.0 * band.delta);
  EvidenceStrength strength = EvidenceStrength::Weak;
  if (ratio < 0.50) {
    strength = EvidenceStrength::Strong;
  } else if (ratio < 0.80) {
    strength = EvidenceStrength::Moderate;
  }
  return {ratio, strength};
}

IntervalVerdict band_verdict(const Interval& ci, const ToleranceBand& band) {
  IntervalVerdict v;
  v.ci = ci;
  v.classification = classify_tolerance(ci, band);
  std::tie(v.evidence_ratio, v.strength) = evidence_ratio(ci, band);
  return v;
}

double power_two_prop(size_t n0, size_t n1, double baseline_rate, const ToleranceBand& band) {
  check_band(band);
  if (n0 < 2 || n1 < 2) throw_input("power_two_prop requires n >= 2 in both groups");
  if (!(baseline_rate > 0.0 && baseline_rate < 1.0)) {
    throw_input("power_two_prop requires 0 < baseline_rate < 1");
  }
  if (!(baseline_rate + band.delta < 1.0)) {
    throw_input("power_two_prop requires baseline_rate + delta < 1");
  }
  const double h =
      2.0 * std::asin(std::sqrt(baseline_rate + band.delta)) - 2.0 * std::asin(std::sqrt(baseline_rate));
  const double ze =
      h / std::sqrt(1.0 / static_cast<double>(n0) + 1.0 / static_cast<double>(n1));
  const double zc = normal_quantile(1.0 - band.alpha / 2.0);
  return normal_cdf(ze - zc) + normal_cdf(-ze - zc);
}

DisparityResult unadjusted_audit(const Cohort& c, Attr attribute, const ToleranceBand& band,
                                 const AttributeMapping& mapping) {
  check_band(band);
  const AttributeSpec& spec = mapping.spec(attribute);

  DisparityResult r;
  r.attribute = attribute;
  r.group0.group_label = spec.group0_label;
  r.group1.group_label = spec.group1_label;
  for (const DerivedCase& d : c.cases()) {
    const AttrState s = d.attr(attribute);
    if (s == AttrState::Group0) {
      ++r.group0.n;
      r.group0.errors += d.error ? 1 : 0;
    } else if (s == AttrState::Group1) {
      ++r.group1.n;
      r.group1.errors += d.error ? 1 : 0;
    }
  }
  if (r.group0.n == 0 || r.group1.n == 0) {
    const std::string& empty = r.group0.n == 0 ? spec.group0_label : spec.group1_label;
    throw_degenerate("attribute '" + std::string(attr_key(attribute)) + "': group '" + empty +
                     "' has no cases");
  }

  r.delta = r.group1.rate() - r.group0.rate();
  const ZTest zt = two_prop_z(r.group0, r.group1);
  r.z = zt.z;
  r.p_value = zt.p_value;
  r.verdict = band_verdict(wald_ci_diff(r.group0, r.group1, band.alpha), band);

  const double pooled = static_cast<double>(r.group0.errors + r.group1.errors) /
                        static_cast<double>(r.group0.n + r.group1.n);
  if (pooled <= 0.0 || pooled >= 1.0) {
    throw_degenerate("attribute '" + std::string(attr_key(attribute)) +
                     "': pooled error rate is degenerate (all " +
                     (pooled <= 0.0 ? std::string("0") : std::string("1")) + ")");
  }
  r.power = power_two_prop(r.group0.n, r.group1.n, pooled, band);
  r.power_sufficient = r.power >= kSufficientPower;
  return r;
}

}  // namespace fairaudit
