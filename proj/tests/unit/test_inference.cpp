#include "fairaudit/inference.hpp"

#include <cmath>

#include "doctest.h"
#include "fairaudit/error.hpp"
#include "fairaudit/synth.hpp"
#include "helpers.hpp"

using namespace fairaudit;

namespace {

const AttributeMapping& mapping() {
  static const AttributeMapping m = AttributeMapping::defaults();
  return m;
}

bool same_result(const AdjustedResult& a, const AdjustedResult& b) {
  return a.adj_delta == b.adj_delta && a.adj_p0 == b.adj_p0 && a.adj_p1 == b.adj_p1 &&
         a.verdict.ci.lo == b.verdict.ci.lo && a.verdict.ci.hi == b.verdict.ci.hi &&
         a.verdict.classification == b.verdict.classification &&
         a.discarded_resamples == b.discarded_resamples &&
         a.separation_events == b.separation_events && a.n_rows == b.n_rows &&
         a.rows_dropped == b.rows_dropped;
}

SynthSpec confounded_spec(uint64_t seed, size_t n, double dstar) {
  SynthSpec s;
  s.n_cases = n;
  s.seed = seed;
  s.protocols = {{"P1", 0.5, 0.05}, {"P2", 0.5, 0.10}};
  s.disparity_attribute = Attr::Sex;
  s.injected_disparity = dstar;
  s.attributes[0].probs = {0.6, 0.4, 0.0, 0.0};
  s.attributes[0].per_protocol["P2"] = {0.4, 0.6, 0.0, 0.0};
  s.attributes[1].probs = {0.5, 0.5, 0.0, 0.0};
  s.attributes[2].probs = {0.5, 0.3, 0.0, 0.2};
  s.attributes[3].probs = {0.0, 0.0, 0.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("quantile_type7 matches the interpolation convention") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_type7(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile_type7(v, 1.0) == doctest::Approx(4.0));
  std::vector<double> w;
  for (int i = 1; i <= 1000; ++i) w.push_back(i);
  CHECK(quantile_type7(w, 0.025) == doctest::Approx(25.975));
  CHECK(quantile_type7(w, 0.975) == doctest::Approx(975.025));
  CHECK_THROWS_AS(quantile_type7({}, 0.5), Error);
}

TEST_CASE("bootstrap is deterministic and thread-count invariant") {
  const Cohort c = generate_cohort(confounded_spec(31, 1200, 0.0), mapping()).cohort;
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const BootstrapConfig cfg{200, 99, 0.05};
  const ToleranceBand band;

  const AdjustedResult serial = bootstrap_adjusted_delta(c, spec, cfg, band, mapping(), 1);
  const AdjustedResult again = bootstrap_adjusted_delta(c, spec, cfg, band, mapping(), 1);
  const AdjustedResult threaded = bootstrap_adjusted_delta(c, spec, cfg, band, mapping(), 3);
  CHECK(same_result(serial, again));
  CHECK(same_result(serial, threaded));
  CHECK(serial.n_rows == c.size());

  // Point estimate inside the CI, CI contains the resample median by
  // construction of the percentile interval.
  CHECK(serial.verdict.ci.lo <= serial.adj_delta);
  CHECK(serial.adj_delta <= serial.verdict.ci.hi);
}

TEST_CASE("seed changes the draw, config changes are rejected") {
  const Cohort c = generate_cohort(confounded_spec(32, 800, 0.0), mapping()).cohort;
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const ToleranceBand band;
  const AdjustedResult a = bootstrap_adjusted_delta(c, spec, {150, 1, 0.05}, band, mapping());
  const AdjustedResult b = bootstrap_adjusted_delta(c, spec, {150, 2, 0.05}, band, mapping());
  CHECK(a.adj_delta == b.adj_delta);  // same point estimate
  CHECK(a.verdict.ci.lo != b.verdict.ci.lo);

  CHECK_THROWS_AS(bootstrap_adjusted_delta(c, spec, {50, 1, 0.05}, band, mapping()), Error);
  CHECK_THROWS_AS(bootstrap_adjusted_delta(c, spec, {150, 1, 1.5}, band, mapping()), Error);
  CHECK_THROWS_AS(adjusted_audit(c, Attr::Sex, Attr::Sex, {150, 1, 0.05}, band, mapping()), Error);
}

TEST_CASE("single protocol: adjusted equals covariate-only adjustment") {
  SynthSpec s = confounded_spec(33, 900, 0.02);
  s.protocols = {{"P1", 1.0, 0.07}};
  s.attributes[0].per_protocol.clear();
  const Cohort c = generate_cohort(s, mapping()).cohort;
  const BootstrapConfig cfg{150, 7, 0.05};
  const ToleranceBand band;

  const AdjustedResult with_protocol =
      adjusted_audit(c, Attr::Sex, Attr::Race, cfg, band, mapping());
  const AdjustedResult covariate_only =
      single_factor_sensitivity(c, Attr::Sex, ControlVar::attribute(Attr::Race), cfg, band,
                                mapping());
  CHECK(with_protocol.adj_delta == doctest::Approx(covariate_only.adj_delta).epsilon(1e-12));
  CHECK(with_protocol.verdict.ci.lo == doctest::Approx(covariate_only.verdict.ci.lo).epsilon(1e-12));
  CHECK(with_protocol.verdict.ci.hi == doctest::Approx(covariate_only.verdict.ci.hi).epsilon(1e-12));
}

TEST_CASE("single-level control collapses to the unadjusted difference") {
  SynthSpec s = confounded_spec(34, 700, 0.0);
  s.protocols = {{"P1", 1.0, 0.08}};
  s.attributes[0].per_protocol.clear();
  const Cohort c = generate_cohort(s, mapping()).cohort;

  const AdjustedResult sens = single_factor_sensitivity(c, Attr::Sex, ControlVar::protocol(),
                                                        {150, 11, 0.05}, {}, mapping());
  const DisparityResult unadj = unadjusted_audit(c, Attr::Sex, {}, mapping());
  CHECK(std::abs(sens.adj_delta - unadj.delta) < 1e-10);
  CHECK(sens.adjustment_label == "Protocol");
}

TEST_CASE("swapping group ordering negates the delta and mirrors the CI") {
  const Cohort c = generate_cohort(confounded_spec(35, 1000, 0.03), mapping()).cohort;
  Cohort swapped;
  for (const DerivedCase& d : c.cases()) {
    DerivedCase e = d;
    if (e.attrs[0] == AttrState::Group0) {
      e.attrs[0] = AttrState::Group1;
    } else if (e.attrs[0] == AttrState::Group1) {
      e.attrs[0] = AttrState::Group0;
    }
    swapped.append(std::move(e));
  }
  swapped.freeze();

  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const BootstrapConfig cfg{200, 17, 0.05};
  const AdjustedResult r = bootstrap_adjusted_delta(c, spec, cfg, {}, mapping());
  const AdjustedResult m = bootstrap_adjusted_delta(swapped, spec, cfg, {}, mapping());
  CHECK(m.adj_delta == doctest::Approx(-r.adj_delta).epsilon(1e-9));
  CHECK(m.verdict.ci.lo == doctest::Approx(-r.verdict.ci.hi).epsilon(1e-9));
  CHECK(m.verdict.ci.hi == doctest::Approx(-r.verdict.ci.lo).epsilon(1e-9));
  CHECK(m.discarded_resamples == r.discarded_resamples);
}

TEST_CASE("null disparity at n=4000 lands on equivalence with a CI around zero") {
  SynthSpec s = confounded_spec(38, 4000, 0.0);
  const Cohort c = generate_cohort(s, mapping()).cohort;
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const AdjustedResult r = bootstrap_adjusted_delta(c, spec, {300, 12, 0.05}, {}, mapping());
  CHECK(r.verdict.ci.lo < 0.0);
  CHECK(r.verdict.ci.hi > 0.0);
  CHECK(r.verdict.classification == BandClass::Equivalence);
}

TEST_CASE("constant outcome short-circuits to a zero-width interval") {
  Cohort c;
  test::add_cases(c, "P1", AttrState::Group0, 80, 0);
  test::add_cases(c, "P1", AttrState::Group1, 70, 0);
  c.freeze();
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const AdjustedResult r = bootstrap_adjusted_delta(c, spec, {200, 5, 0.05}, {}, mapping());
  CHECK(r.adj_delta == 0.0);
  CHECK(r.verdict.ci.lo == 0.0);
  CHECK(r.verdict.ci.hi == 0.0);
  CHECK(r.verdict.classification == BandClass::Equivalence);
  CHECK(r.discarded_resamples == 0);
}

TEST_CASE("fully observed covariate: complete-case equals unknown-level") {
  SynthSpec s = confounded_spec(36, 900, 0.0);
  s.attributes[2].probs = {0.6, 0.4, 0.0, 0.0};  // race always observed
  const Cohort c = generate_cohort(s, mapping()).cohort;
  const BootstrapConfig cfg{150, 23, 0.05};
  const AdjustedResult unknown = adjusted_audit(c, Attr::Sex, Attr::Race, cfg, {}, mapping());
  const AdjustedResult complete = complete_case_robustness(c, Attr::Sex, Attr::Race, cfg, {},
                                                           mapping());
  CHECK(complete.rows_dropped == 0);
  CHECK(unknown.adj_delta == complete.adj_delta);
  CHECK(unknown.verdict.ci.lo == complete.verdict.ci.lo);
  CHECK(unknown.verdict.ci.hi == complete.verdict.ci.hi);
  CHECK(unknown.missing_policy == MissingPolicy::UnknownLevel);
  CHECK(complete.missing_policy == MissingPolicy::CompleteCase);
}

TEST_CASE("degenerate resamples are discarded, redrawn and counted") {
  // A 4-case protocol vanishes from a resample with probability ~1.8%, so
  // some of 500 resamples are redrawn, but well under the 5% cap.
  Cohort c;
  test::add_cases(c, "P1", AttrState::Group0, 400, 28);
  test::add_cases(c, "P1", AttrState::Group1, 380, 30);
  test::add_cases(c, "P2", AttrState::Group0, 2, 1);
  test::add_cases(c, "P2", AttrState::Group1, 2, 1);
  c.freeze();
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const AdjustedResult r = bootstrap_adjusted_delta(c, spec, {500, 3, 0.05}, {}, mapping());
  CHECK(r.discarded_resamples > 0);
  CHECK(r.discarded_resamples <= 25);

  SUBCASE("the cap turns excessive discards into an error") {
    Cohort sparse;
    test::add_cases(sparse, "P1", AttrState::Group0, 300, 21);
    test::add_cases(sparse, "P1", AttrState::Group1, 300, 24);
    test::add_cases(sparse, "P2", AttrState::Group0, 1, 0);  // vanishes ~37% of the time
    sparse.freeze();
    try {
      bootstrap_adjusted_delta(sparse, spec, {500, 3, 0.05}, {}, mapping());
      FAIL("expected BootstrapDiscardCap");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BootstrapDiscardCap);
    }
  }
}

TEST_CASE("empty subcohort is a degenerate-statistics error") {
  Cohort c;
  test::add_cases(c, "P1", AttrState::Missing, 50, 3);
  c.freeze();
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  try {
    bootstrap_adjusted_delta(c, spec, {150, 1, 0.05}, {}, mapping());
    FAIL("expected Degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("adjustment labels mirror the model") {
  const Cohort c = generate_cohort(confounded_spec(37, 800, 0.0), mapping()).cohort;
  const BootstrapConfig cfg{150, 2, 0.05};
  CHECK(adjusted_audit(c, Attr::Sex, Attr::Race, cfg, {}, mapping()).adjustment_label ==
        "Protocol + Race");
  CHECK(single_factor_sensitivity(c, Attr::Sex, ControlVar::attribute(Attr::Age), cfg, {},
                                  mapping())
            .adjustment_label == "Age");
  const AdjustedResult cc = complete_case_robustness(c, Attr::Sex, Attr::Race, cfg, {}, mapping());
  CHECK(cc.adjustment_label == "Protocol + Race");
  CHECK(cc.adjustment_set == std::vector<std::string>{"protocol", "race"});
}
