#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fairaudit {

/// The four protected attributes audited by the toolkit.
enum class Attr : int { Sex = 0, Age = 1, Race = 2, Ses = 3 };

inline constexpr int kAttrCount = 4;
inline constexpr std::array<Attr, kAttrCount> kAllAttrs = {Attr::Sex, Attr::Age, Attr::Race, Attr::Ses};

const char* attr_key(Attr a);      // machine name: "sex", "age", "race", "ses"
const char* attr_display(Attr a);  // report name: "Sex", "Age group", ...
const char* attr_short(Attr a);    // adjustment-set name: "Sex", "Age", "Race", "SES"
std::optional<Attr> attr_from_key(std::string_view key);

/// Per-attribute case state. Group0/Group1 are the two comparison groups;
/// Ignored (explicitly excluded raw values) and Missing (absent/unextractable)
/// are distinct states and both excluded from group comparisons.
enum class AttrState : unsigned char { Group0 = 0, Group1 = 1, Ignored = 2, Missing = 3 };

/// Raw values that are present but not configured anywhere in the mapping.
enum class UnmappedPolicy { Missing, Ignored };

/// Recoding rule for one attribute: two group labels plus a raw-value map.
/// Lookups are case-insensitive on trimmed values.
struct AttributeSpec {
  std::string name;
  std::string group0_label;
  std::string group1_label;
  std::map<std::string, AttrState> mapping;  // normalized raw value -> Group0/Group1/Ignored
  UnmappedPolicy unmapped = UnmappedPolicy::Missing;
  std::string notes;

  /// Absent raw values are Missing; present values go through the map.
  AttrState map_raw(const std::optional<std::string>& raw) const;
  const std::string& group_label(AttrState s) const;  // Group0/Group1 only
  std::string state_label(AttrState s) const;         // group label, "Ignored" or "Missing"
};

/// Age banding, in completed years at the reference date. Cases at or below
/// kAgeIgnoredMax are excluded from the age comparison.
inline constexpr int kAgeIgnoredMax = 21;
inline constexpr int kAgeAdultMax = 50;

/// <=21 Ignored; 22..50 Adult (group1); 51+ Older (group0).
AttrState band_age(int age_years);

/// The full recoding configuration: one spec per attribute. The age spec
/// carries labels only; its states come from band_age, not from raw strings.
struct AttributeMapping {
  std::array<AttributeSpec, kAttrCount> specs;

  const AttributeSpec& spec(Attr a) const { return specs[static_cast<size_t>(a)]; }

  /// Built-in vocabulary: sex Female/Male (other documented values ignored),
  /// race White vs Non-white, payer line of business proxying SES with
  /// High = commercial/employer plans and Low = medicaid/marketplace plans;
  /// medicare, auto accident, self-pay and other carry no SES signal and are
  /// ignored.
  static AttributeMapping defaults();

  /// Loads a JSON mapping document; sections absent from the file keep their
  /// defaults. Throws Error(Input) on unreadable or malformed files.
  static AttributeMapping from_json_file(const std::string& path);
  static AttributeMapping from_json_text(const std::string& text);
};

/// Lowercases and trims; the normal form used for mapping keys.
std::string normalize_raw_value(std::string_view raw);

}  // namespace fairaudit
