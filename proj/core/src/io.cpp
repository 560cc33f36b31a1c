#include "fairaudit/io.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fairaudit/error.hpp"
#include "json.hpp"

namespace fairaudit {

namespace {

constexpr std::array<const char*, 8> kColumns = {"case_id", "protocol_id", "review_outcome", "sex",
                                                 "birth_date", "reference_date", "race", "payer_lob"};

std::optional<std::string> nonempty(std::string value) {
  if (value.empty()) return std::nullopt;
  return value;
}

/// Builds a RawCase from field strings; returns an error message on failure.
std::string build_case(const std::map<std::string, std::string>& fields, RawCase& out) {
  const auto get = [&](const char* name) -> std::string {
    auto it = fields.find(name);
    return it == fields.end() ? std::string() : it->second;
  };

  out.case_id = get("case_id");
  out.protocol_id = get("protocol_id");

  const std::string outcome = get("review_outcome");
  auto parsed_outcome = parse_review_outcome(outcome);
  if (!parsed_outcome.has_value()) return "unknown review_outcome '" + outcome + "'";
  out.review_outcome = *parsed_outcome;

  const std::string ref = get("reference_date");
  auto ref_date = parse_iso_date(ref);
  if (!ref_date.has_value()) return "bad reference_date '" + ref + "'";
  out.reference_date = *ref_date;

  const std::string birth = get("birth_date");
  if (birth.empty()) {
    out.birth_date = std::nullopt;
  } else {
    auto birth_date = parse_iso_date(birth);
    if (!birth_date.has_value()) return "bad birth_date '" + birth + "'";
    out.birth_date = *birth_date;
  }

  out.sex_raw = nonempty(get("sex"));
  out.race_raw = nonempty(get("race"));
  out.payer_lob_raw = nonempty(get("payer_lob"));
  return {};
}

}  // namespace

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::vector<CaseRow> read_case_csv(std::istream& in) {
  std::vector<CaseRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;  // empty stream: no header, no rows

  const std::vector<std::string> header = split_csv_row(line);
  std::map<std::string, size_t> column_of;
  for (size_t i = 0; i < header.size(); ++i) column_of[normalize_raw_value(header[i])] = i;
  for (const char* required : kColumns) {
    if (!column_of.count(required)) {
      throw_input(std::string("case CSV: missing required column '") + required + "'");
    }
  }

  size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    CaseRow row{row_no, std::nullopt, {}, {}};
    const std::vector<std::string> fields = split_csv_row(line);
    std::map<std::string, std::string> named;
    for (const char* col : kColumns) {
      const size_t idx = column_of[col];
      named[col] = idx < fields.size() ? fields[idx] : std::string();
    }
    RawCase raw;
    const std::string err = build_case(named, raw);
    if (err.empty()) {
      row.record = std::move(raw);
    } else {
      row.error = err;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CaseRow> read_case_jsonl(std::istream& in) {
  using nlohmann::json;
  std::vector<CaseRow> rows;
  std::string line;
  size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    CaseRow row{row_no, std::nullopt, {}, {}};
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      row.error = "invalid JSON object";
      rows.push_back(std::move(row));
      continue;
    }
    std::map<std::string, std::string> named;
    bool bad_type = false;
    for (const char* col : kColumns) {
      if (!doc.contains(col) || doc[col].is_null()) continue;
      if (!doc[col].is_string()) {
        row.error = std::string("field '") + col + "' must be a string";
        bad_type = true;
        break;
      }
      named[col] = doc[col].get<std::string>();
    }
    if (!bad_type) {
      RawCase raw;
      const std::string err = build_case(named, raw);
      if (err.empty()) {
        row.record = std::move(raw);
      } else {
        row.error = err;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CaseRow> read_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("cannot open case file '" + path + "'");
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : normalize_raw_value(path.substr(dot + 1));
  if (ext == "csv") return read_case_csv(in);
  if (ext == "jsonl" || ext == "ndjson" || ext == "json") return read_case_jsonl(in);
  throw_input("case file '" + path + "': unknown extension (expected .csv or .jsonl)");
}

namespace {

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::array<std::string, 8> case_fields(const RawCase& r) {
  return {r.case_id,
          r.protocol_id,
          outcome_key(r.review_outcome),
          r.sex_raw.value_or(""),
          r.birth_date ? to_iso_string(*r.birth_date) : "",
          to_iso_string(r.reference_date),
          r.race_raw.value_or(""),
          r.payer_lob_raw.value_or("")};
}

}  // namespace

void write_case_csv(std::ostream& out, std::span<const RawCase> records) {
  for (size_t i = 0; i < kColumns.size(); ++i) {
    out << (i ? "," : "") << kColumns[i];
  }
  out << "\n";
  for (const RawCase& r : records) {
    const auto fields = case_fields(r);
    for (size_t i = 0; i < fields.size(); ++i) {
      out << (i ? "," : "") << csv_escape(fields[i]);
    }
    out << "\n";
  }
}

void write_case_jsonl(std::ostream& out, std::span<const RawCase> records) {
  using nlohmann::ordered_json;
  for (const RawCase& r : records) {
    ordered_json doc;
    const auto fields = case_fields(r);
    for (size_t i = 0; i < kColumns.size(); ++i) {
      if (!fields[i].empty()) doc[kColumns[i]] = fields[i];
    }
    out << doc.dump() << "\n";
  }
}

}  // namespace fairaudit
