#pragma once

#include <string>
#include <vector>

#include "fairaudit/cohort.hpp"

namespace fairaudit::test {

/// Appends `n` derived cases with the given states, `errors` of them errors.
inline void add_cases(Cohort& c, const std::string& protocol, AttrState sex, size_t n, size_t errors,
                      AttrState age = AttrState::Missing, AttrState race = AttrState::Missing,
                      AttrState ses = AttrState::Missing) {
  static size_t counter = 0;
  for (size_t i = 0; i < n; ++i) {
    DerivedCase d;
    d.case_id = "T" + std::to_string(++counter);
    d.protocol_id = protocol;
    d.error = i < errors;
    d.outcome = d.error ? ReviewOutcome::FalseApproval : ReviewOutcome::CorrectApproval;
    d.attrs = {sex, age, race, ses};
    c.append(std::move(d));
  }
}

/// Two-group cohort on one protocol: group0 with e0/n0 errors, group1 with
/// e1/n1, as states of the sex attribute.
inline Cohort two_group_cohort(size_t e0, size_t n0, size_t e1, size_t n1,
                               const std::string& protocol = "P1") {
  Cohort c;
  add_cases(c, protocol, AttrState::Group0, n0, e0);
  add_cases(c, protocol, AttrState::Group1, n1, e1);
  c.freeze();
  return c;
}

}  // namespace fairaudit::test
