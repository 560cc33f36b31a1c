#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace fairaudit {

/// Calendar date. Only needs to support ISO-8601 parsing, ordering and
/// whole-year age arithmetic.
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
};

bool is_valid_date(const Date& d);

/// Parses "YYYY-MM-DD". Returns nullopt for anything else (including
/// calendar-invalid dates such as 2023-02-30).
std::optional<Date> parse_iso_date(std::string_view text);

std::string to_iso_string(const Date& d);

/// Completed years between birth and reference ("age at reference date").
/// Negative when reference precedes birth.
int age_in_whole_years(const Date& birth, const Date& reference);

}  // namespace fairaudit
