#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/attribute.hpp"
#include "fairaudit/dates.hpp"

namespace fairaudit {

/// Reviewer adjudication of one automated recommendation.
enum class ReviewOutcome : unsigned char {
  CorrectApproval = 0,
  FalseApproval = 1,
  CorrectEscalation = 2,
  UnnecessaryEscalation = 3
};

inline constexpr int kOutcomeCount = 4;
inline constexpr std::array<ReviewOutcome, kOutcomeCount> kAllOutcomes = {
    ReviewOutcome::CorrectApproval, ReviewOutcome::FalseApproval, ReviewOutcome::CorrectEscalation,
    ReviewOutcome::UnnecessaryEscalation};

/// Accepts common spellings ("False Approval", "false_approval", ...).
std::optional<ReviewOutcome> parse_review_outcome(std::string_view text);
const char* outcome_key(ReviewOutcome o);      // canonical wire value, e.g. "false_approval"
const char* outcome_display(ReviewOutcome o);  // e.g. "False approval"

/// A case is an error when the automated recommendation disagreed with the
/// human determination: a false approval or an unnecessary escalation.
inline bool is_error_outcome(ReviewOutcome o) {
  return o == ReviewOutcome::FalseApproval || o == ReviewOutcome::UnnecessaryEscalation;
}

/// One ingested case, before attribute standardization.
struct RawCase {
  std::string case_id;
  std::string protocol_id;
  ReviewOutcome review_outcome = ReviewOutcome::CorrectApproval;
  std::optional<std::string> sex_raw;
  std::optional<Date> birth_date;
  Date reference_date;  // date of review
  std::optional<std::string> race_raw;
  std::optional<std::string> payer_lob_raw;
};

/// A case after standardization: the binary error indicator plus one state
/// per protected attribute.
struct DerivedCase {
  std::string case_id;
  std::string protocol_id;
  ReviewOutcome outcome = ReviewOutcome::CorrectApproval;
  bool error = false;
  std::array<AttrState, kAttrCount> attrs{AttrState::Missing, AttrState::Missing, AttrState::Missing,
                                          AttrState::Missing};

  AttrState attr(Attr a) const { return attrs[static_cast<size_t>(a)]; }
};

/// Which date anchors the whole-year age computation.
struct ReferenceDatePolicy {
  enum class Kind { PerCaseReviewDate, FixedDate };
  Kind kind = Kind::PerCaseReviewDate;
  Date fixed{};

  static ReferenceDatePolicy per_case() { return {}; }
  static ReferenceDatePolicy fixed_date(Date d) { return {Kind::FixedDate, d}; }
};

std::array<AttrState, kAttrCount> derive_attributes(const RawCase& raw, const AttributeMapping& mapping,
                                                    const ReferenceDatePolicy& policy);
DerivedCase derive_case(const RawCase& raw, const AttributeMapping& mapping,
                        const ReferenceDatePolicy& policy);

/// An ordered, freezable collection of derived cases. Once frozen the cohort
/// is immutable: append() throws, and the protocol index is available.
class Cohort {
 public:
  Cohort() = default;

  void append(DerivedCase c);  // throws Error(Input) once frozen
  void freeze();
  bool frozen() const { return frozen_; }

  size_t size() const { return cases_.size(); }
  bool empty() const { return cases_.empty(); }
  const DerivedCase& operator[](size_t i) const { return cases_[i]; }
  const std::vector<DerivedCase>& cases() const { return cases_; }

  /// protocol_id -> positions of its cases, in cohort order. Frozen only.
  const std::map<std::string, std::vector<size_t>>& protocol_index() const;

 private:
  std::vector<DerivedCase> cases_;
  std::map<std::string, std::vector<size_t>> protocol_index_;
  bool frozen_ = false;
};

/// One input row: either a parsed record or a parse error, 1-based data row.
/// `source` (usually a file name) prefixes reject-log lines when set.
struct CaseRow {
  size_t row = 0;
  std::optional<RawCase> record;
  std::string error;  // set when record is empty
  std::string source;
};

struct LoadResult {
  Cohort cohort;                      // frozen
  std::vector<std::string> rejects;   // "row N: <reason>"
  std::array<std::array<size_t, 4>, kAttrCount> state_counts{};  // [attr][AttrState]
};

/// Derives every parseable row into the cohort and logs the rest. Duplicate
/// case ids are a hard error, not a rejection.
LoadResult load_cohort(std::span<const CaseRow> rows, const AttributeMapping& mapping,
                       const ReferenceDatePolicy& policy = {});
LoadResult load_cohort(std::span<const RawCase> records, const AttributeMapping& mapping,
                       const ReferenceDatePolicy& policy = {});

/// Cases whose state for `attribute` is Group0 or Group1, original order.
Cohort attribute_subcohort(const Cohort& c, Attr attribute);
/// String-keyed variant; throws Error(Input) on unknown attribute names.
Cohort attribute_subcohort(const Cohort& c, std::string_view attribute);

/// Frequency report: per-attribute counts with percentages of the total
/// cohort (half-up, one decimal), plus the outcome distribution.
struct CategoryRow {
  std::string label;
  size_t count = 0;
  double pct = 0.0;
};

struct AttributeBreakdown {
  Attr attr{};
  CategoryRow group1, group0, ignored, missing;
  std::array<const CategoryRow*, 4> rows() const { return {&group1, &group0, &ignored, &missing}; }
};

struct FrequencyReport {
  size_t total = 0;
  std::array<AttributeBreakdown, kAttrCount> attributes;
  std::array<CategoryRow, kOutcomeCount> outcomes;  // CorrectApproval..UnnecessaryEscalation
};

FrequencyReport describe(const Cohort& c, const AttributeMapping& mapping);

/// Protocol mix summary plus per-attribute overlap. A protocol is valid for
/// an attribute when it has at least one case in either comparison group;
/// it overlaps when it has at least one case in each.
struct ProtocolSummary {
  size_t distinct = 0;
  double median_cases = 0.0;
  double iqr_lo = 0.0;
  double iqr_hi = 0.0;
  double top5_share_pct = 0.0;
};

struct OverlapRow {
  Attr attr{};
  size_t with_overlap = 0;
  size_t valid = 0;
  double rate_pct = 0.0;  // 0 when valid == 0
};

struct ProtocolDiagnostics {
  ProtocolSummary summary;
  OverlapRow overlap;
};

ProtocolSummary protocol_summary(const Cohort& c);
OverlapRow protocol_overlap(const Cohort& c, Attr attribute);
ProtocolDiagnostics protocol_diagnostics(const Cohort& c, Attr attribute);

/// Half-up rounding (away from zero on ties) to `digits` decimals.
double round_half_up(double x, int digits);

}  // namespace fairaudit
