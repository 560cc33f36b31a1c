#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/cohort.hpp"

namespace fairaudit {

/// Case-file schema, shared by CSV and JSONL:
///   case_id, protocol_id, review_outcome, sex, birth_date, reference_date,
///   race, payer_lob
/// Dates are ISO-8601; an empty string (or absent/null JSON field) means the
/// value is not present. Unparseable rows come back as CaseRow errors with
/// their 1-based data row number.
std::vector<CaseRow> read_case_csv(std::istream& in);
std::vector<CaseRow> read_case_jsonl(std::istream& in);

/// Picks the reader from the extension (.csv vs .jsonl/.ndjson/.json).
/// Throws Error(Input) for unreadable files or unknown extensions.
std::vector<CaseRow> read_case_file(const std::string& path);

void write_case_csv(std::ostream& out, std::span<const RawCase> records);
void write_case_jsonl(std::ostream& out, std::span<const RawCase> records);

/// Minimal RFC-4180 row splitter (quotes, escaped quotes, CRLF).
std::vector<std::string> split_csv_row(const std::string& line);

}  // namespace fairaudit
