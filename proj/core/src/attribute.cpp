#include "fairaudit/attribute.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fairaudit/error.hpp"
#include "json.hpp"

namespace fairaudit {

const char* attr_key(Attr a) {
  switch (a) {
    case Attr::Sex: return "sex";
    case Attr::Age: return "age";
    case Attr::Race: return "race";
    case Attr::Ses: return "ses";
  }
  return "?";
}

const char* attr_display(Attr a) {
  switch (a) {
    case Attr::Sex: return "Sex";
    case Attr::Age: return "Age group";
    case Attr::Race: return "Race/Ethnicity";
    case Attr::Ses: return "SES (payer-based)";
  }
  return "?";
}

const char* attr_short(Attr a) {
  switch (a) {
    case Attr::Sex: return "Sex";
    case Attr::Age: return "Age";
    case Attr::Race: return "Race";
    case Attr::Ses: return "SES";
  }
  return "?";
}

std::optional<Attr> attr_from_key(std::string_view key) {
  for (Attr a : kAllAttrs) {
    if (key == attr_key(a)) return a;
  }
  return std::nullopt;
}

std::string normalize_raw_value(std::string_view raw) {
  size_t b = 0;
  size_t e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out(raw.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

AttrState AttributeSpec::map_raw(const std::optional<std::string>& raw) const {
  if (!raw.has_value()) return AttrState::Missing;
  const std::string key = normalize_raw_value(*raw);
  if (key.empty()) return AttrState::Missing;
  auto it = mapping.find(key);
  if (it != mapping.end()) return it->second;
  return unmapped == UnmappedPolicy::Ignored ? AttrState::Ignored : AttrState::Missing;
}

const std::string& AttributeSpec::group_label(AttrState s) const {
  return s == AttrState::Group1 ? group1_label : group0_label;
}

std::string AttributeSpec::state_label(AttrState s) const {
  switch (s) {
    case AttrState::Group0: return group0_label;
    case AttrState::Group1: return group1_label;
    case AttrState::Ignored: return "Ignored";
    case AttrState::Missing: return "Missing";
  }
  return "?";
}

AttrState band_age(int age_years) {
  if (age_years <= kAgeIgnoredMax) return AttrState::Ignored;
  if (age_years <= kAgeAdultMax) return AttrState::Group1;  // Adult
  return AttrState::Group0;                                 // Older
}

namespace {

void add_values(AttributeSpec& spec, std::initializer_list<const char*> values, AttrState state) {
  for (const char* v : values) spec.mapping[normalize_raw_value(v)] = state;
}

}  // namespace

AttributeMapping AttributeMapping::defaults() {
  AttributeMapping m;

  // Group ordering fixes the sign of every reported disparity:
  // delta = rate(group1) - rate(group0). Reports always print both labels.
  AttributeSpec& sex = m.specs[static_cast<size_t>(Attr::Sex)];
  sex.name = "sex";
  sex.group0_label = "Male";
  sex.group1_label = "Female";
  add_values(sex, {"male", "m"}, AttrState::Group0);
  add_values(sex, {"female", "f"}, AttrState::Group1);
  // Documented values outside the binary comparison are excluded, not dropped
  // as missing, so they stay visible in the frequency report.
  sex.unmapped = UnmappedPolicy::Ignored;

  AttributeSpec& age = m.specs[static_cast<size_t>(Attr::Age)];
  age.name = "age";
  age.group0_label = "Older";
  age.group1_label = "Adult";
  age.notes = "derived from birth_date at the reference date; no raw-value mapping";

  AttributeSpec& race = m.specs[static_cast<size_t>(Attr::Race)];
  race.name = "race";
  race.group0_label = "White";
  race.group1_label = "Non-white";
  add_values(race, {"white", "caucasian"}, AttrState::Group0);
  add_values(race,
             {"non-white", "nonwhite", "black", "african american", "asian", "hispanic", "latino",
              "native american", "american indian", "pacific islander", "multiracial", "other race"},
             AttrState::Group1);
  add_values(race, {"declined", "declined to answer", "unknown"}, AttrState::Ignored);

  AttributeSpec& ses = m.specs[static_cast<size_t>(Attr::Ses)];
  ses.name = "ses";
  ses.group0_label = "High";
  ses.group1_label = "Low";
  add_values(ses, {"commercial", "employer", "employer-sponsored", "employer sponsored"},
             AttrState::Group0);
  add_values(ses, {"medicaid", "marketplace", "exchange"}, AttrState::Group1);
  add_values(ses, {"medicare", "medicare advantage", "auto accident", "self-pay", "self pay", "other"},
             AttrState::Ignored);

  return m;
}

namespace {

using nlohmann::json;

void apply_section(AttributeSpec& spec, const json& section, const std::string& name) {
  if (!section.is_object()) throw_input("mapping: section '" + name + "' must be an object");
  bool mapping_replaced = false;
  for (const auto& [key, value] : section.items()) {
    if (key == "group0") {
      spec.group0_label = value.get<std::string>();
    } else if (key == "group1") {
      spec.group1_label = value.get<std::string>();
    } else if (key == "group0_values" || key == "group1_values" || key == "ignored_values") {
      if (!mapping_replaced) {
        spec.mapping.clear();
        mapping_replaced = true;
      }
      const AttrState state = key == "group0_values"  ? AttrState::Group0
                              : key == "group1_values" ? AttrState::Group1
                                                       : AttrState::Ignored;
      if (!value.is_array()) throw_input("mapping: '" + name + "." + key + "' must be an array");
      for (const auto& raw : value) spec.mapping[normalize_raw_value(raw.get<std::string>())] = state;
    } else if (key == "unmapped") {
      const std::string policy = value.get<std::string>();
      if (policy == "missing") {
        spec.unmapped = UnmappedPolicy::Missing;
      } else if (policy == "ignored") {
        spec.unmapped = UnmappedPolicy::Ignored;
      } else {
        throw_input("mapping: '" + name + ".unmapped' must be \"missing\" or \"ignored\"");
      }
    } else if (key == "notes") {
      spec.notes = value.get<std::string>();
    } else {
      throw_input("mapping: unknown key '" + name + "." + key + "'");
    }
  }
}

}  // namespace

AttributeMapping AttributeMapping::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("mapping: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw_input("mapping: top level must be an object");

  AttributeMapping m = defaults();
  for (const auto& [key, section] : doc.items()) {
    auto attr = attr_from_key(key);
    if (!attr.has_value()) throw_input("mapping: unknown attribute section '" + key + "'");
    if (*attr == Attr::Age) {
      // Age has no raw-string vocabulary; only labels/notes may be overridden.
      for (const auto& [k, v] : section.items()) {
        if (k != "group0" && k != "group1" && k != "notes") {
          throw_input("mapping: 'age' accepts only group0/group1/notes, got '" + k + "'");
        }
      }
    }
    apply_section(m.specs[static_cast<size_t>(*attr)], section, key);
  }
  return m;
}

AttributeMapping AttributeMapping::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("mapping: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace fairaudit
