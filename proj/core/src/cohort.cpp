#include "fairaudit/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

std::string normalize_outcome_token(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::optional<ReviewOutcome> parse_review_outcome(std::string_view text) {
  const std::string t = normalize_outcome_token(text);
  if (t == "correctapproval") return ReviewOutcome::CorrectApproval;
  if (t == "falseapproval" || t == "incorrectapproval") return ReviewOutcome::FalseApproval;
  if (t == "correctescalation") return ReviewOutcome::CorrectEscalation;
  if (t == "unnecessaryescalation") return ReviewOutcome::UnnecessaryEscalation;
  return std::nullopt;
}

const char* outcome_key(ReviewOutcome o) {
  switch (o) {
    case ReviewOutcome::CorrectApproval: return "correct_approval";
    case ReviewOutcome::FalseApproval: return "false_approval";
    case ReviewOutcome::CorrectEscalation: return "correct_escalation";
    case ReviewOutcome::UnnecessaryEscalation: return "unnecessary_escalation";
  }
  return "?";
}

const char* outcome_display(ReviewOutcome o) {
  switch (o) {
    case ReviewOutcome::CorrectApproval: return "Correct approval";
    case ReviewOutcome::FalseApproval: return "False approval";
    case ReviewOutcome::CorrectEscalation: return "Correct escalation";
    case ReviewOutcome::UnnecessaryEscalation: return "Unnecessary escalation";
  }
  return "?";
}

std::array<AttrState, kAttrCount> derive_attributes(const RawCase& raw, const AttributeMapping& mapping,
                                                    const ReferenceDatePolicy& policy) {
  std::array<AttrState, kAttrCount> out{};
  out[static_cast<size_t>(Attr::Sex)] = mapping.spec(Attr::Sex).map_raw(raw.sex_raw);
  out[static_cast<size_t>(Attr::Race)] = mapping.spec(Attr::Race).map_raw(raw.race_raw);
  out[static_cast<size_t>(Attr::Ses)] = mapping.spec(Attr::Ses).map_raw(raw.payer_lob_raw);

  if (raw.birth_date.has_value()) {
    const Date ref =
        policy.kind == ReferenceDatePolicy::Kind::FixedDate ? policy.fixed : raw.reference_date;
    out[static_cast<size_t>(Attr::Age)] = band_age(age_in_whole_years(*raw.birth_date, ref));
  } else {
    out[static_cast<size_t>(Attr::Age)] = AttrState::Missing;
  }
  return out;
}

DerivedCase derive_case(const RawCase& raw, const AttributeMapping& mapping,
                        const ReferenceDatePolicy& policy) {
  DerivedCase d;
  d.case_id = raw.case_id;
  d.protocol_id = raw.protocol_id;
  d.outcome = raw.review_outcome;
  d.error = is_error_outcome(raw.review_outcome);
  d.attrs = derive_attributes(raw, mapping, policy);
  return d;
}

void Cohort::append(DerivedCase c) {
  if (frozen_) throw_input("cohort is frozen; no data may be added, removed or re-labeled");
  cases_.push_back(std::move(c));
}

void Cohort::freeze() {
  if (frozen_) return;
  protocol_index_.clear();
  for (size_t i = 0; i < cases_.size(); ++i) {
    protocol_index_[cases_[i].protocol_id].push_back(i);
  }
  frozen_ = true;
}

const std::map<std::string, std::vector<size_t>>& Cohort::protocol_index() const {
  if (!frozen_) throw_input("protocol index requires a frozen cohort");
  return protocol_index_;
}

LoadResult load_cohort(std::span<const CaseRow> rows, const AttributeMapping& mapping,
                       const ReferenceDatePolicy& policy) {
  LoadResult result;
  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(rows.size());

  for (const CaseRow& row : rows) {
    const std::string where =
        (row.source.empty() ? "" : row.source + " ") + "row " + std::to_string(row.row);
    if (!row.record.has_value()) {
      result.rejects.push_back(where + ": " + row.error);
      continue;
    }
    const RawCase& raw = *row.record;
    if (raw.case_id.empty()) {
      result.rejects.push_back(where + ": empty case_id");
      continue;
    }
    if (!seen_ids.insert(raw.case_id).second) {
      throw_input("duplicate case_id '" + raw.case_id + "' at " + where);
    }
    if (raw.birth_date.has_value() && raw.reference_date < *raw.birth_date) {
      result.rejects.push_back(where + ": reference_date precedes birth_date");
      continue;
    }
    DerivedCase d = derive_case(raw, mapping, policy);
    for (int a = 0; a < kAttrCount; ++a) {
      ++result.state_counts[static_cast<size_t>(a)][static_cast<size_t>(d.attrs[static_cast<size_t>(a)])];
    }
    result.cohort.append(std::move(d));
  }
  result.cohort.freeze();
  return result;
}

LoadResult load_cohort(std::span<const RawCase> records, const AttributeMapping& mapping,
                       const ReferenceDatePolicy& policy) {
  std::vector<CaseRow> rows;
  rows.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    rows.push_back(CaseRow{i + 1, records[i], {}, {}});
  }
  return load_cohort(rows, mapping, policy);
}

Cohort attribute_subcohort(const Cohort& c, Attr attribute) {
  Cohort out;
  for (const DerivedCase& d : c.cases()) {
    const AttrState s = d.attr(attribute);
    if (s == AttrState::Group0 || s == AttrState::Group1) out.append(d);
  }
  out.freeze();
  return out;
}

Cohort attribute_subcohort(const Cohort& c, std::string_view attribute) {
  auto a = attr_from_key(attribute);
  if (!a.has_value()) throw_input("unknown attribute '" + std::string(attribute) + "'");
  return attribute_subcohort(c, *a);
}

double round_half_up(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(x * scale) / scale;
}

namespace {

double pct_of(size_t count, size_t total) {
  if (total == 0) return 0.0;
  return round_half_up(100.0 * static_cast<double>(count) / static_cast<double>(total), 1);
}

/// Quantile with linear interpolation between order statistics (R type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - std::floor(h);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

FrequencyReport describe(const Cohort& c, const AttributeMapping& mapping) {
  FrequencyReport report;
  report.total = c.size();

  std::array<std::array<size_t, 4>, kAttrCount> counts{};
  std::array<size_t, kOutcomeCount> outcome_counts{};
  for (const DerivedCase& d : c.cases()) {
    for (int a = 0; a < kAttrCount; ++a) {
      ++counts[static_cast<size_t>(a)][static_cast<size_t>(d.attrs[static_cast<size_t>(a)])];
    }
    ++outcome_counts[static_cast<size_t>(d.outcome)];
  }

  for (Attr a : kAllAttrs) {
    const auto ai = static_cast<size_t>(a);
    const AttributeSpec& spec = mapping.spec(a);
    AttributeBreakdown& b = report.attributes[ai];
    b.attr = a;
    const auto row = [&](AttrState s, const std::string& label) {
      const size_t n = counts[ai][static_cast<size_t>(s)];
      return CategoryRow{label, n, pct_of(n, report.total)};
    };
    b.group1 = row(AttrState::Group1, spec.group1_label);
    b.group0 = row(AttrState::Group0, spec.group0_label);
    b.ignored = row(AttrState::Ignored, "Ignored");
    b.missing = row(AttrState::Missing, "Missing");
  }

  for (ReviewOutcome o : kAllOutcomes) {
    const auto oi = static_cast<size_t>(o);
    report.outcomes[oi] = CategoryRow{outcome_display(o), outcome_counts[oi],
                                      pct_of(outcome_counts[oi], report.total)};
  }
  return report;
}

ProtocolSummary protocol_summary(const Cohort& c) {
  ProtocolSummary s;
  if (c.empty()) return s;

  std::vector<double> sizes;
  sizes.reserve(c.protocol_index().size());
  for (const auto& [id, positions] : c.protocol_index()) {
    sizes.push_back(static_cast<double>(positions.size()));
  }
  s.distinct = sizes.size();
  std::sort(sizes.begin(), sizes.end());
  s.median_cases = quantile_sorted(sizes, 0.5);
  s.iqr_lo = quantile_sorted(sizes, 0.25);
  s.iqr_hi = quantile_sorted(sizes, 0.75);

  double top5 = 0.0;
  const size_t k = std::min<size_t>(5, sizes.size());
  for (size_t i = 0; i < k; ++i) top5 += sizes[sizes.size() - 1 - i];
  s.top5_share_pct = round_half_up(100.0 * top5 / static_cast<double>(c.size()), 1);
  return s;
}

OverlapRow protocol_overlap(const Cohort& c, Attr attribute) {
  OverlapRow row;
  row.attr = attribute;
  if (c.empty()) return row;

  for (const auto& [id, positions] : c.protocol_index()) {
    bool has0 = false;
    bool has1 = false;
    for (size_t i : positions) {
      const AttrState s = c[i].attr(attribute);
      has0 = has0 || s == AttrState::Group0;
      has1 = has1 || s == AttrState::Group1;
      if (has0 && has1) break;
    }
    if (has0 || has1) ++row.valid;
    if (has0 && has1) ++row.with_overlap;
  }
  if (row.valid > 0) {
    row.rate_pct = round_half_up(
        100.0 * static_cast<double>(row.with_overlap) / static_cast<double>(row.valid), 1);
  }
  return row;
}

ProtocolDiagnostics protocol_diagnostics(const Cohort& c, Attr attribute) {
  return {protocol_summary(c), protocol_overlap(c, attribute)};
}

}  // namespace fairaudit
