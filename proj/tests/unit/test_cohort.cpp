#include "fairaudit/cohort.hpp"

#include <sstream>

#include "doctest.h"
#include "fairaudit/error.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/rng.hpp"
#include "helpers.hpp"

using namespace fairaudit;

TEST_CASE("ISO date parsing and validity") {
  CHECK(parse_iso_date("2024-02-29").has_value());
  CHECK_FALSE(parse_iso_date("2023-02-29").has_value());
  CHECK_FALSE(parse_iso_date("2023-13-01").has_value());
  CHECK_FALSE(parse_iso_date("2023-2-3").has_value());
  CHECK_FALSE(parse_iso_date("20230203").has_value());
  CHECK_FALSE(parse_iso_date("").has_value());
  const Date d = *parse_iso_date("1999-12-31");
  CHECK(to_iso_string(d) == "1999-12-31");
}

TEST_CASE("age is completed years at the reference date") {
  const Date birth{1980, 6, 15};
  CHECK(age_in_whole_years(birth, {2020, 6, 14}) == 39);
  CHECK(age_in_whole_years(birth, {2020, 6, 15}) == 40);
  CHECK(age_in_whole_years(birth, {2020, 6, 16}) == 40);
  CHECK(age_in_whole_years(birth, {2021, 1, 1}) == 40);
  CHECK(age_in_whole_years({2000, 1, 1}, {1999, 1, 1}) == -1);
}

TEST_CASE("age banding boundaries") {
  CHECK(band_age(21) == AttrState::Ignored);
  CHECK(band_age(22) == AttrState::Group1);  // Adult
  CHECK(band_age(50) == AttrState::Group1);
  CHECK(band_age(51) == AttrState::Group0);  // Older
  CHECK(band_age(0) == AttrState::Ignored);
  CHECK(band_age(100) == AttrState::Group0);
  for (int age = -1; age <= 120; ++age) {
    const AttrState s = band_age(age);
    if (age <= 21) {
      CHECK(s == AttrState::Ignored);
    } else if (age <= 50) {
      CHECK(s == AttrState::Group1);
    } else {
      CHECK(s == AttrState::Group0);
    }
  }
}

TEST_CASE("error indicator: exactly two outcomes are errors") {
  CHECK(is_error_outcome(ReviewOutcome::FalseApproval));
  CHECK(is_error_outcome(ReviewOutcome::UnnecessaryEscalation));
  CHECK_FALSE(is_error_outcome(ReviewOutcome::CorrectApproval));
  CHECK_FALSE(is_error_outcome(ReviewOutcome::CorrectEscalation));
  int errors = 0;
  for (ReviewOutcome o : kAllOutcomes) errors += is_error_outcome(o) ? 1 : 0;
  CHECK(errors == 2);
}

TEST_CASE("review outcome spellings") {
  CHECK(parse_review_outcome("False Approval") == ReviewOutcome::FalseApproval);
  CHECK(parse_review_outcome("false_approval") == ReviewOutcome::FalseApproval);
  CHECK(parse_review_outcome("UNNECESSARY-ESCALATION") == ReviewOutcome::UnnecessaryEscalation);
  CHECK(parse_review_outcome("correctapproval") == ReviewOutcome::CorrectApproval);
  CHECK_FALSE(parse_review_outcome("approved").has_value());
}

TEST_CASE("attribute derivation follows the configured vocabulary") {
  const AttributeMapping mapping = AttributeMapping::defaults();
  RawCase raw;
  raw.case_id = "c1";
  raw.protocol_id = "P1";
  raw.reference_date = {2025, 6, 15};

  SUBCASE("payer medicare is excluded, not missing") {
    raw.payer_lob_raw = "Medicare";
    CHECK(derive_attributes(raw, mapping, {})[3] == AttrState::Ignored);
  }
  SUBCASE("payer commercial maps to High (group0)") {
    raw.payer_lob_raw = "Commercial";
    CHECK(derive_attributes(raw, mapping, {})[3] == AttrState::Group0);
  }
  SUBCASE("age 21 at reference is excluded; 51 is Older") {
    raw.birth_date = Date{2004, 6, 16};  // 20 years + 364 days
    CHECK(derive_attributes(raw, mapping, {})[1] == AttrState::Ignored);
    raw.birth_date = Date{1974, 6, 15};  // exactly 51
    CHECK(derive_attributes(raw, mapping, {})[1] == AttrState::Group0);
  }
  SUBCASE("absent race is missing; unmapped race strings are missing") {
    CHECK(derive_attributes(raw, mapping, {})[2] == AttrState::Missing);
    raw.race_raw = "martian";
    CHECK(derive_attributes(raw, mapping, {})[2] == AttrState::Missing);
    raw.race_raw = "  WHITE ";
    CHECK(derive_attributes(raw, mapping, {})[2] == AttrState::Group0);
    raw.race_raw = "declined";
    CHECK(derive_attributes(raw, mapping, {})[2] == AttrState::Ignored);
  }
  SUBCASE("sex outside the binary comparison is excluded") {
    raw.sex_raw = "nonbinary";
    CHECK(derive_attributes(raw, mapping, {})[0] == AttrState::Ignored);
    raw.sex_raw = "F";
    CHECK(derive_attributes(raw, mapping, {})[0] == AttrState::Group1);
  }
  SUBCASE("fixed reference-date policy overrides the review date") {
    raw.birth_date = Date{1974, 6, 15};
    const auto states =
        derive_attributes(raw, mapping, ReferenceDatePolicy::fixed_date({1995, 6, 15}));
    CHECK(states[1] == AttrState::Ignored);  // 21 at the fixed date
  }
}

TEST_CASE("load_cohort: rejects, duplicates, empty stream") {
  const AttributeMapping mapping = AttributeMapping::defaults();

  SUBCASE("empty stream gives an empty cohort and no rejections") {
    std::istringstream csv("");
    const auto rows = read_case_csv(csv);
    const LoadResult r = load_cohort(rows, mapping);
    CHECK(r.cohort.size() == 0);
    CHECK(r.rejects.empty());
  }

  SUBCASE("malformed rows go to the rejection log with row numbers") {
    std::istringstream csv(
        "case_id,protocol_id,review_outcome,sex,birth_date,reference_date,race,payer_lob\n"
        "c1,P1,false_approval,F,1980-01-01,2025-01-01,,\n"
        "c2,P1,approved,F,1980-01-01,2025-01-01,,\n"
        "c3,P1,correct_approval,F,1980-13-01,2025-01-01,,\n"
        "c4,P1,correct_approval,F,2030-01-01,2025-01-01,,\n"
        "c5,P1,correct_escalation,M,,2025-01-01,,\n");
    const LoadResult r = load_cohort(read_case_csv(csv), mapping);
    CHECK(r.cohort.size() == 2);
    REQUIRE(r.rejects.size() == 3);
    CHECK(r.rejects[0] == "row 2: unknown review_outcome 'approved'");
    CHECK(r.rejects[1] == "row 3: bad birth_date '1980-13-01'");
    CHECK(r.rejects[2] == "row 4: reference_date precedes birth_date");
    CHECK(r.cohort[0].error);        // false approval
    CHECK_FALSE(r.cohort[1].error);  // correct escalation
    // Per-attribute state tallies cover accepted rows only.
    CHECK(r.state_counts[static_cast<size_t>(Attr::Sex)][static_cast<size_t>(AttrState::Group1)] ==
          1);
    CHECK(r.state_counts[static_cast<size_t>(Attr::Sex)][static_cast<size_t>(AttrState::Group0)] ==
          1);
    CHECK(r.state_counts[static_cast<size_t>(Attr::Race)][static_cast<size_t>(AttrState::Missing)] ==
          2);
  }

  SUBCASE("duplicate case ids are a hard error") {
    std::istringstream csv(
        "case_id,protocol_id,review_outcome,sex,birth_date,reference_date,race,payer_lob\n"
        "c1,P1,correct_approval,,,2025-01-01,,\n"
        "c1,P1,correct_approval,,,2025-01-01,,\n");
    CHECK_THROWS_WITH_AS(load_cohort(read_case_csv(csv), mapping), doctest::Contains("duplicate"),
                         Error);
  }

  SUBCASE("missing required column is an input error") {
    std::istringstream csv("case_id,protocol_id,review_outcome,sex,birth_date,reference_date,race\n");
    CHECK_THROWS_WITH_AS(read_case_csv(csv), doctest::Contains("payer_lob"), Error);
  }

  SUBCASE("quoted CSV fields keep embedded commas") {
    std::istringstream csv(
        "case_id,protocol_id,review_outcome,sex,birth_date,reference_date,race,payer_lob\n"
        "\"c,1\",P1,correct_approval,\"fem\"\"ale\",,2025-01-01,,\n");
    const auto rows = read_case_csv(csv);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].record.has_value());
    CHECK(rows[0].record->case_id == "c,1");
    CHECK(rows[0].record->sex_raw == "fem\"ale");
  }

  SUBCASE("JSONL records mirror the CSV schema") {
    std::istringstream jsonl(
        R"({"case_id":"j1","protocol_id":"P2","review_outcome":"unnecessary_escalation","reference_date":"2025-01-01","race":"White"})"
        "\n"
        "not json\n"
        R"({"case_id":"j2","protocol_id":"P2","review_outcome":"correct_escalation","reference_date":"2025-01-01","sex":null})"
        "\n");
    const LoadResult r = load_cohort(read_case_jsonl(jsonl), mapping);
    CHECK(r.cohort.size() == 2);
    REQUIRE(r.rejects.size() == 1);
    CHECK(r.rejects[0] == "row 2: invalid JSON object");
    CHECK(r.cohort[0].error);
    CHECK(r.cohort[0].attr(Attr::Race) == AttrState::Group0);
    CHECK(r.cohort[1].attr(Attr::Sex) == AttrState::Missing);
  }
}

TEST_CASE("frozen cohorts reject mutation") {
  Cohort c;
  test::add_cases(c, "P1", AttrState::Group0, 3, 1);
  CHECK_FALSE(c.frozen());
  CHECK_THROWS_AS(c.protocol_index(), Error);
  c.freeze();
  CHECK(c.frozen());
  DerivedCase extra;
  extra.case_id = "x";
  CHECK_THROWS_AS(c.append(std::move(extra)), Error);
  CHECK(c.protocol_index().at("P1").size() == 3);
}

TEST_CASE("attribute_subcohort filters to comparison groups") {
  Cohort c;
  test::add_cases(c, "P1", AttrState::Group0, 40, 4);
  test::add_cases(c, "P2", AttrState::Group1, 30, 3);
  test::add_cases(c, "P1", AttrState::Ignored, 7, 0);
  test::add_cases(c, "P2", AttrState::Missing, 23, 0);
  c.freeze();

  const Cohort sub = attribute_subcohort(c, Attr::Sex);
  CHECK(sub.size() == 70);  // total - ignored - missing
  CHECK(sub.frozen());

  // Idempotent and order preserving.
  const Cohort sub2 = attribute_subcohort(sub, Attr::Sex);
  REQUIRE(sub2.size() == sub.size());
  for (size_t i = 0; i < sub.size(); ++i) CHECK(sub2[i].case_id == sub[i].case_id);

  size_t pos = 0;
  for (const DerivedCase& d : c.cases()) {
    const AttrState s = d.attr(Attr::Sex);
    if (s == AttrState::Group0 || s == AttrState::Group1) {
      CHECK(sub[pos].case_id == d.case_id);
      ++pos;
    }
  }

  CHECK_THROWS_AS(attribute_subcohort(c, "income"), Error);
  CHECK(attribute_subcohort(c, "sex").size() == 70);
}

TEST_CASE("state partition sums to the cohort size") {
  Rng rng(3);
  const AttributeMapping mapping = AttributeMapping::defaults();
  for (int trial = 0; trial < 20; ++trial) {
    Cohort c;
    const size_t n = 1 + rng.next_below(300);
    for (size_t i = 0; i < n; ++i) {
      DerivedCase d;
      d.case_id = "r" + std::to_string(trial) + "_" + std::to_string(i);
      d.protocol_id = "P" + std::to_string(rng.next_below(4));
      d.error = rng.next_bernoulli(0.1);
      d.outcome = d.error ? ReviewOutcome::UnnecessaryEscalation : ReviewOutcome::CorrectEscalation;
      for (int a = 0; a < kAttrCount; ++a) {
        d.attrs[static_cast<size_t>(a)] = static_cast<AttrState>(rng.next_below(4));
      }
      c.append(std::move(d));
    }
    c.freeze();
    const FrequencyReport rep = describe(c, mapping);
    for (const AttributeBreakdown& b : rep.attributes) {
      CHECK(b.group0.count + b.group1.count + b.ignored.count + b.missing.count == n);
      const double pct_sum = b.group0.pct + b.group1.pct + b.ignored.pct + b.missing.pct;
      CHECK(std::abs(pct_sum - 100.0) <= 0.2);
    }
  }
}

TEST_CASE("describe: single-case cohort reports 100%") {
  Cohort c;
  test::add_cases(c, "P1", AttrState::Group1, 1, 0);
  c.freeze();
  const FrequencyReport rep = describe(c, AttributeMapping::defaults());
  CHECK(rep.total == 1);
  CHECK(rep.attributes[0].group1.count == 1);
  CHECK(rep.attributes[0].group1.pct == doctest::Approx(100.0));
  CHECK(rep.outcomes[0].count == 1);  // correct approval
  CHECK(rep.outcomes[0].pct == doctest::Approx(100.0));
}

TEST_CASE("protocol summary and overlap") {
  SUBCASE("empty cohort gives a defined zero result") {
    Cohort c;
    c.freeze();
    const ProtocolDiagnostics d = protocol_diagnostics(c, Attr::Sex);
    CHECK(d.summary.distinct == 0);
    CHECK(d.overlap.valid == 0);
    CHECK(d.overlap.rate_pct == 0.0);
  }

  SUBCASE("quartiles and top-5 share") {
    Cohort c;
    test::add_cases(c, "A", AttrState::Group0, 10, 0);
    test::add_cases(c, "B", AttrState::Group0, 20, 0);
    test::add_cases(c, "C", AttrState::Group0, 30, 0);
    test::add_cases(c, "D", AttrState::Group0, 40, 0);
    c.freeze();
    const ProtocolSummary s = protocol_summary(c);
    CHECK(s.distinct == 4);
    CHECK(s.median_cases == doctest::Approx(25.0));
    CHECK(s.iqr_lo == doctest::Approx(17.5));
    CHECK(s.iqr_hi == doctest::Approx(32.5));
    CHECK(s.top5_share_pct == doctest::Approx(100.0));
  }

  SUBCASE("overlap needs one case from each group") {
    Cohort c;
    test::add_cases(c, "A", AttrState::Group0, 5, 0);
    test::add_cases(c, "A", AttrState::Group1, 5, 0);
    test::add_cases(c, "B", AttrState::Group0, 5, 0);
    test::add_cases(c, "C", AttrState::Missing, 5, 0);
    c.freeze();
    const OverlapRow o = protocol_overlap(c, Attr::Sex);
    CHECK(o.valid == 2);
    CHECK(o.with_overlap == 1);
    CHECK(o.rate_pct == doctest::Approx(50.0));
  }

  SUBCASE("no overlap when one group is absent everywhere") {
    Cohort c;
    test::add_cases(c, "A", AttrState::Group0, 5, 0);
    test::add_cases(c, "B", AttrState::Group0, 5, 0);
    c.freeze();
    const OverlapRow o = protocol_overlap(c, Attr::Sex);
    CHECK(o.valid == 2);
    CHECK(o.with_overlap == 0);
    CHECK(o.rate_pct == 0.0);
  }
}

TEST_CASE("mapping files override the defaults") {
  const std::string text = R"({
    "sex": {"group0": "M", "group1": "F", "group0_values": ["man"], "group1_values": ["woman"],
             "unmapped": "missing"},
    "age": {"group0": "51plus", "group1": "22to50"}
  })";
  const AttributeMapping m = AttributeMapping::from_json_text(text);
  CHECK(m.spec(Attr::Sex).group0_label == "M");
  CHECK(m.spec(Attr::Sex).map_raw(std::optional<std::string>("woman")) == AttrState::Group1);
  // Replacing the vocabulary drops the default entries.
  CHECK(m.spec(Attr::Sex).map_raw(std::optional<std::string>("female")) == AttrState::Missing);
  CHECK(m.spec(Attr::Age).group0_label == "51plus");
  // Untouched sections keep their defaults.
  CHECK(m.spec(Attr::Ses).map_raw(std::optional<std::string>("Medicaid")) == AttrState::Group1);

  CHECK_THROWS_AS(AttributeMapping::from_json_text("{\"sex\": {\"bogus\": 1}}"), Error);
  CHECK_THROWS_AS(AttributeMapping::from_json_text("{\"age\": {\"group0_values\": []}}"), Error);
  CHECK_THROWS_AS(AttributeMapping::from_json_text("{\"income\": {}}"), Error);
  CHECK_THROWS_AS(AttributeMapping::from_json_text("not json"), Error);
}

TEST_CASE("round_half_up rounds ties away from zero") {
  CHECK(round_half_up(55.25, 1) == doctest::Approx(55.3));
  CHECK(round_half_up(-0.125, 2) == doctest::Approx(-0.13));
  CHECK(round_half_up(2.5, 0) == doctest::Approx(3.0));
  CHECK(round_half_up(-2.5, 0) == doctest::Approx(-3.0));
}
