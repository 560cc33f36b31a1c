#include "fairaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/version.hpp"
#include "json.hpp"

namespace fairaudit {

using nlohmann::json;
using nlohmann::ordered_json;

const char* analysis_key(Analysis a) {
  switch (a) {
    case Analysis::Describe: return "describe";
    case Analysis::Unadjusted: return "unadjusted";
    case Analysis::Adjusted: return "adjusted";
    case Analysis::Sensitivity: return "sensitivity";
    case Analysis::Robustness: return "robustness";
  }
  return "?";
}

std::optional<Analysis> analysis_from_key(std::string_view key) {
  for (Analysis a : kAllAnalyses) {
    if (key == analysis_key(a)) return a;
  }
  return std::nullopt;
}

std::vector<Analysis> parse_analyses(std::string_view csv) {
  std::vector<Analysis> out;
  size_t start = 0;
  while (start <= csv.size()) {
    const size_t comma = csv.find(',', start);
    const std::string_view token =
        csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::string name = normalize_raw_value(token);
    if (!name.empty()) {
      auto a = analysis_from_key(name);
      if (!a.has_value()) throw_input("unknown analysis '" + name + "'");
      out.push_back(*a);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw_input("analyses list is empty");
  return out;
}

void apply_config_json_text(RunConfig& cfg, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw_input("config: top level must be an object");

  for (const auto& [key, value] : doc.items()) {
    if (key == "inputs") {
      cfg.inputs = value.get<std::vector<std::string>>();
    } else if (key == "mapping") {
      cfg.mapping_path = value.get<std::string>();
    } else if (key == "band") {
      cfg.band.delta = value.value("delta", cfg.band.delta);
      cfg.band.alpha = value.value("alpha", cfg.band.alpha);
    } else if (key == "bootstrap") {
      cfg.bootstrap.n_resamples = value.value("resamples", cfg.bootstrap.n_resamples);
      cfg.bootstrap.seed = value.value("seed", cfg.bootstrap.seed);
      cfg.bootstrap.max_discard_fraction =
          value.value("max_discard_fraction", cfg.bootstrap.max_discard_fraction);
    } else if (key == "analyses") {
      cfg.analyses.clear();
      for (const auto& item : value) {
        auto a = analysis_from_key(item.get<std::string>());
        if (!a.has_value()) throw_input("config: unknown analysis '" + item.get<std::string>() + "'");
        cfg.analyses.push_back(*a);
      }
    } else if (key == "out") {
      cfg.out_dir = value.get<std::string>();
    } else if (key == "missing_policy") {
      const std::string p = value.get<std::string>();
      if (p == "unknown") {
        cfg.missing_policy = MissingPolicy::UnknownLevel;
      } else if (p == "complete-case" || p == "complete_case") {
        cfg.missing_policy = MissingPolicy::CompleteCase;
      } else {
        throw_input("config: missing_policy must be 'unknown' or 'complete-case'");
      }
    } else if (key == "threads") {
      cfg.threads = value.get<unsigned>();
    } else {
      throw_input("config: unknown key '" + key + "'");
    }
  }
}

void apply_config_json_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_json_text(cfg, buf.str());
}

std::string config_hash(const RunConfig& cfg) {
  std::string canon;
  const auto add = [&](const std::string& field) {
    canon += field;
    canon += '\x1f';
  };
  const auto add_double = [&](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    add(buf);
  };
  for (const std::string& input : cfg.inputs) add(input);
  add(cfg.mapping_path);
  add_double(cfg.band.delta);
  add_double(cfg.band.alpha);
  add(std::to_string(cfg.bootstrap.n_resamples));
  add(std::to_string(cfg.bootstrap.seed));
  add_double(cfg.bootstrap.max_discard_fraction);
  std::set<std::string> analyses;
  for (Analysis a : cfg.analyses) analyses.insert(analysis_key(a));
  for (const std::string& a : analyses) add(a);
  add(missing_policy_key(cfg.missing_policy));

  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

namespace {

MissingPolicy policy_from_key(const std::string& key) {
  if (key == "unknown") return MissingPolicy::UnknownLevel;
  if (key == "complete-case") return MissingPolicy::CompleteCase;
  throw_input("report: unknown missing policy '" + key + "'");
}

Attr attr_or_throw(const std::string& key) {
  auto a = attr_from_key(key);
  if (!a.has_value()) throw_input("report: unknown attribute '" + key + "'");
  return *a;
}

BandClass band_class_from_key(const std::string& key) {
  for (BandClass c : {BandClass::Equivalence, BandClass::Inconclusive, BandClass::NonEquivalence}) {
    if (key == band_class_key(c)) return c;
  }
  throw_input("report: unknown classification '" + key + "'");
}

EvidenceStrength strength_from_key(const std::string& key) {
  for (EvidenceStrength s :
       {EvidenceStrength::Strong, EvidenceStrength::Moderate, EvidenceStrength::Weak}) {
    if (key == strength_key(s)) return s;
  }
  throw_input("report: unknown strength '" + key + "'");
}

ordered_json category_to_json(const CategoryRow& row) {
  return ordered_json{{"label", row.label}, {"count", row.count}, {"pct", row.pct}};
}

CategoryRow category_from_json(const json& j) {
  return CategoryRow{j.at("label").get<std::string>(), j.at("count").get<size_t>(),
                     j.at("pct").get<double>()};
}

ordered_json summary_to_json(const ProportionSummary& s) {
  return ordered_json{{"label", s.group_label}, {"errors", s.errors}, {"n", s.n}, {"rate", s.rate()}};
}

ProportionSummary summary_from_json(const json& j) {
  return ProportionSummary{j.at("label").get<std::string>(), j.at("errors").get<size_t>(),
                           j.at("n").get<size_t>()};
}

void verdict_to_json(ordered_json& row, const IntervalVerdict& v) {
  row["ci"] = {v.ci.lo, v.ci.hi};
  row["classification"] = band_class_key(v.classification);
  row["evidence_ratio"] = v.evidence_ratio;
  row["strength"] = strength_key(v.strength);
}

IntervalVerdict verdict_from_json(const json& row) {
  IntervalVerdict v;
  v.ci.lo = row.at("ci").at(0).get<double>();
  v.ci.hi = row.at("ci").at(1).get<double>();
  v.classification = band_class_from_key(row.at("classification").get<std::string>());
  v.evidence_ratio = row.at("evidence_ratio").get<double>();
  v.strength = strength_from_key(row.at("strength").get<std::string>());
  return v;
}

ordered_json adjusted_to_json(const AdjustedResult& r) {
  ordered_json row;
  row["attribute"] = attr_key(r.attribute);
  row["adjustment"] = r.adjustment_label;
  row["adjustment_set"] = r.adjustment_set;
  row["missing_policy"] = missing_policy_key(r.missing_policy);
  row["adj_p0"] = r.adj_p0;
  row["adj_p1"] = r.adj_p1;
  row["adj_delta"] = r.adj_delta;
  verdict_to_json(row, r.verdict);
  row["discarded_resamples"] = r.discarded_resamples;
  row["separation_events"] = r.separation_events;
  row["n_rows"] = r.n_rows;
  row["rows_dropped"] = r.rows_dropped;
  return row;
}

AdjustedResult adjusted_from_json(const json& row) {
  AdjustedResult r;
  r.attribute = attr_or_throw(row.at("attribute").get<std::string>());
  r.adjustment_label = row.at("adjustment").get<std::string>();
  r.adjustment_set = row.at("adjustment_set").get<std::vector<std::string>>();
  r.missing_policy = policy_from_key(row.at("missing_policy").get<std::string>());
  r.adj_p0 = row.at("adj_p0").get<double>();
  r.adj_p1 = row.at("adj_p1").get<double>();
  r.adj_delta = row.at("adj_delta").get<double>();
  r.verdict = verdict_from_json(row);
  r.discarded_resamples = row.at("discarded_resamples").get<int>();
  r.separation_events = row.at("separation_events").get<int>();
  r.n_rows = row.at("n_rows").get<size_t>();
  r.rows_dropped = row.at("rows_dropped").get<size_t>();
  return r;
}

}  // namespace

std::string report_to_json(const AuditReport& report) {
  ordered_json doc;
  ordered_json& meta = doc["meta"];
  meta["toolkit"] = report.meta.toolkit;
  meta["version"] = report.meta.version;
  meta["seed"] = report.meta.seed;
  meta["resamples"] = report.meta.n_resamples;
  meta["delta"] = report.meta.delta;
  meta["alpha"] = report.meta.alpha;
  meta["missing_policy"] = missing_policy_key(report.meta.missing_policy);
  meta["config_hash"] = report.meta.config_hash;
  meta["cases_loaded"] = report.meta.cases_loaded;
  meta["rows_rejected"] = report.meta.rows_rejected;

  if (report.has_describe) {
    ordered_json& d = doc["describe"];
    d["total"] = report.describe.freq.total;
    d["attributes"] = ordered_json::array();
    for (const AttributeBreakdown& b : report.describe.freq.attributes) {
      ordered_json entry;
      entry["attribute"] = attr_key(b.attr);
      entry["display"] = attr_display(b.attr);
      entry["group1"] = category_to_json(b.group1);
      entry["group0"] = category_to_json(b.group0);
      entry["ignored"] = category_to_json(b.ignored);
      entry["missing"] = category_to_json(b.missing);
      d["attributes"].push_back(std::move(entry));
    }
    d["outcomes"] = ordered_json::array();
    for (const CategoryRow& row : report.describe.freq.outcomes) {
      d["outcomes"].push_back(category_to_json(row));
    }
    ordered_json& p = d["protocols"];
    p["distinct"] = report.describe.protocols.distinct;
    p["median_cases"] = report.describe.protocols.median_cases;
    p["iqr"] = {report.describe.protocols.iqr_lo, report.describe.protocols.iqr_hi};
    p["top5_share_pct"] = report.describe.protocols.top5_share_pct;
    d["overlap"] = ordered_json::array();
    for (const OverlapRow& row : report.describe.overlap) {
      d["overlap"].push_back(ordered_json{{"attribute", attr_key(row.attr)},
                                          {"with_overlap", row.with_overlap},
                                          {"valid", row.valid},
                                          {"rate_pct", row.rate_pct}});
    }
  }

  doc["unadjusted"] = ordered_json::array();
  for (const DisparityResult& r : report.unadjusted) {
    ordered_json row;
    row["attribute"] = attr_key(r.attribute);
    row["group1"] = summary_to_json(r.group1);
    row["group0"] = summary_to_json(r.group0);
    row["delta"] = r.delta;
    row["z"] = r.z;
    row["p_value"] = r.p_value;
    verdict_to_json(row, r.verdict);
    row["power"] = r.power;
    row["power_sufficient"] = r.power_sufficient;
    doc["unadjusted"].push_back(std::move(row));
  }

  for (const auto& [name, rows] :
       std::initializer_list<std::pair<const char*, const std::vector<AdjustedResult>*>>{
           {"adjusted", &report.adjusted},
           {"sensitivity", &report.sensitivity},
           {"robustness", &report.robustness}}) {
    doc[name] = ordered_json::array();
    for (const AdjustedResult& r : *rows) doc[name].push_back(adjusted_to_json(r));
  }

  doc["rejects"] = report.rejects;
  return doc.dump(2) + "\n";
}

AuditReport report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("report: invalid JSON: ") + e.what());
  }

  AuditReport report;
  const json& meta = doc.at("meta");
  report.meta.toolkit = meta.at("toolkit").get<std::string>();
  report.meta.version = meta.at("version").get<std::string>();
  report.meta.seed = meta.at("seed").get<uint64_t>();
  report.meta.n_resamples = meta.at("resamples").get<int>();
  report.meta.delta = meta.at("delta").get<double>();
  report.meta.alpha = meta.at("alpha").get<double>();
  report.meta.missing_policy = policy_from_key(meta.at("missing_policy").get<std::string>());
  report.meta.config_hash = meta.at("config_hash").get<std::string>();
  report.meta.cases_loaded = meta.at("cases_loaded").get<size_t>();
  report.meta.rows_rejected = meta.at("rows_rejected").get<size_t>();

  if (doc.contains("describe")) {
    report.has_describe = true;
    const json& d = doc.at("describe");
    report.describe.freq.total = d.at("total").get<size_t>();
    for (const json& entry : d.at("attributes")) {
      const Attr a = attr_or_throw(entry.at("attribute").get<std::string>());
      AttributeBreakdown& b = report.describe.freq.attributes[static_cast<size_t>(a)];
      b.attr = a;
      b.group1 = category_from_json(entry.at("group1"));
      b.group0 = category_from_json(entry.at("group0"));
      b.ignored = category_from_json(entry.at("ignored"));
      b.missing = category_from_json(entry.at("missing"));
    }
    const json& outcomes = d.at("outcomes");
    for (size_t i = 0; i < report.describe.freq.outcomes.size() && i < outcomes.size(); ++i) {
      report.describe.freq.outcomes[i] = category_from_json(outcomes.at(i));
    }
    const json& p = d.at("protocols");
    report.describe.protocols.distinct = p.at("distinct").get<size_t>();
    report.describe.protocols.median_cases = p.at("median_cases").get<double>();
    report.describe.protocols.iqr_lo = p.at("iqr").at(0).get<double>();
    report.describe.protocols.iqr_hi = p.at("iqr").at(1).get<double>();
    report.describe.protocols.top5_share_pct = p.at("top5_share_pct").get<double>();
    for (const json& row : d.at("overlap")) {
      const Attr a = attr_or_throw(row.at("attribute").get<std::string>());
      OverlapRow& o = report.describe.overlap[static_cast<size_t>(a)];
      o.attr = a;
      o.with_overlap = row.at("with_overlap").get<size_t>();
      o.valid = row.at("valid").get<size_t>();
      o.rate_pct = row.at("rate_pct").get<double>();
    }
  }

  for (const json& row : doc.at("unadjusted")) {
    DisparityResult r;
    r.attribute = attr_or_throw(row.at("attribute").get<std::string>());
    r.group1 = summary_from_json(row.at("group1"));
    r.group0 = summary_from_json(row.at("group0"));
    r.delta = row.at("delta").get<double>();
    r.z = row.at("z").get<double>();
    r.p_value = row.at("p_value").get<double>();
    r.verdict = verdict_from_json(row);
    r.power = row.at("power").get<double>();
    r.power_sufficient = row.at("power_sufficient").get<bool>();
    report.unadjusted.push_back(std::move(r));
  }

  for (const auto& [name, rows] :
       std::initializer_list<std::pair<const char*, std::vector<AdjustedResult>*>>{
           {"adjusted", &report.adjusted},
           {"sensitivity", &report.sensitivity},
           {"robustness", &report.robustness}}) {
    for (const json& row : doc.at(name)) rows->push_back(adjusted_from_json(row));
  }

  report.rejects = doc.at("rejects").get<std::vector<std::string>>();
  return report;
}

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string fmt_count(size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string fmt_pct1(double pct) { return fmt("%.1f%%", round_half_up(pct, 1)); }
std::string fmt_rate(double rate) { return fmt_pct1(rate * 100.0); }

/// Percentage points at two decimals, sign always shown.
std::string fmt_pp_signed(double frac) { return fmt("%+.2f", round_half_up(frac * 100.0, 2)); }

std::string fmt_ci_pp(const Interval& ci) {
  return "[" + fmt("%.2f", round_half_up(ci.lo * 100.0, 2)) + ", " +
         fmt("%.2f", round_half_up(ci.hi * 100.0, 2)) + "]";
}

std::string fmt_ratio(const IntervalVerdict& v) {
  return fmt("%.0f%%", round_half_up(v.evidence_ratio * 100.0, 0)) + " (" +
         strength_display(v.strength) + ")";
}

const char* band_yes_no(BandClass c) { return c == BandClass::Equivalence ? "Yes" : "No"; }

std::string reading_of(const DisparityResult& r) {
  if (!r.power_sufficient) return "inconclusive (underpowered)";
  switch (r.verdict.classification) {
    case BandClass::Equivalence: return "equivalence";
    case BandClass::Inconclusive: return "inconclusive";
    case BandClass::NonEquivalence: return "non-equivalence";
  }
  return "?";
}

void emit_adjusted_table(std::ostringstream& md, const std::vector<AdjustedResult>& rows,
                         bool show_rows_dropped) {
  md << "| Attribute | Adjustment | n |" << (show_rows_dropped ? " Dropped |" : "")
     << " Adj. delta (pp) | 95% CI (pp) | CI in band | Evidence ratio |\n";
  md << "|---|---|---:|" << (show_rows_dropped ? "---:|" : "")
     << "---:|---|---|---|\n";
  for (const AdjustedResult& r : rows) {
    md << "| " << attr_display(r.attribute) << " | " << r.adjustment_label << " | "
       << fmt_count(r.n_rows) << " | ";
    if (show_rows_dropped) md << fmt_count(r.rows_dropped) << " | ";
    md << fmt_pp_signed(r.adj_delta) << " | " << fmt_ci_pp(r.verdict.ci) << " | "
       << band_yes_no(r.verdict.classification) << " | " << fmt_ratio(r.verdict) << " |\n";
  }
  md << "\n";
}

}  // namespace

std::string emit_markdown(const AuditReport& report) {
  std::ostringstream md;
  md << "# Fairness audit report\n\n";
  md << "- toolkit: " << report.meta.toolkit << " " << report.meta.version << "\n";
  md << "- seed: " << report.meta.seed << ", bootstrap resamples: " << report.meta.n_resamples
     << "\n";
  md << "- tolerance band: +/-" << fmt("%.1f", report.meta.delta * 100.0)
     << "pp, alpha: " << fmt("%g", report.meta.alpha) << "\n";
  md << "- missing-covariate policy (adjusted block): "
     << missing_policy_key(report.meta.missing_policy) << "\n";
  md << "- config hash: " << report.meta.config_hash << "\n";
  md << "- cases loaded: " << fmt_count(report.meta.cases_loaded) << ", rows rejected: "
     << fmt_count(report.meta.rows_rejected) << "\n\n";

  if (report.has_describe) {
    md << "## Cohort composition\n\n";
    md << "| Attribute | Category | Count | % |\n|---|---|---:|---:|\n";
    for (const AttributeBreakdown& b : report.describe.freq.attributes) {
      for (const CategoryRow* row : b.rows()) {
        md << "| " << attr_display(b.attr) << " | " << row->label << " | " << fmt_count(row->count)
           << " | " << fmt_pct1(row->pct) << " |\n";
      }
    }
    md << "\n## Review outcomes\n\n| Outcome | Count | % |\n|---|---:|---:|\n";
    for (const CategoryRow& row : report.describe.freq.outcomes) {
      md << "| " << row.label << " | " << fmt_count(row.count) << " | " << fmt_pct1(row.pct)
         << " |\n";
    }
    md << "\n## Protocol mix\n\n";
    md << "- distinct protocols: " << report.describe.protocols.distinct << "\n";
    md << "- median cases per protocol (IQR): " << fmt("%.0f", report.describe.protocols.median_cases)
       << " (" << fmt("%.0f", report.describe.protocols.iqr_lo) << "-"
       << fmt("%.0f", report.describe.protocols.iqr_hi) << ")\n";
    md << "- share of cases in top 5 protocols: " << fmt_pct1(report.describe.protocols.top5_share_pct)
       << "\n\n";
    md << "| Attribute | Protocols with overlap | Valid protocols | Overlap rate |\n";
    md << "|---|---:|---:|---:|\n";
    for (const OverlapRow& row : report.describe.overlap) {
      md << "| " << attr_display(row.attr) << " | " << row.with_overlap << " | " << row.valid
         << " | " << fmt_pct1(row.rate_pct) << " |\n";
    }
    md << "\n";
  }

  if (!report.unadjusted.empty()) {
    md << "## Unadjusted disparities\n\n";
    md << "| Attribute | Groups | Error rates | Delta (pp) | z | p | 95% CI (pp) | CI in band | "
          "Power | Reading |\n";
    md << "|---|---|---|---:|---:|---:|---|---|---:|---|\n";
    for (const DisparityResult& r : report.unadjusted) {
      md << "| " << attr_display(r.attribute) << " | " << r.group1.group_label << ", "
         << r.group0.group_label << " | " << fmt_rate(r.group1.rate()) << ", "
         << fmt_rate(r.group0.rate()) << " | " << fmt_pp_signed(r.delta) << " | "
         << fmt("%.2f", r.z) << " | " << fmt("%.3f", r.p_value) << " | " << fmt_ci_pp(r.verdict.ci)
         << " | " << band_yes_no(r.verdict.classification) << " | " << fmt("%.2f", r.power) << " | "
         << reading_of(r) << " |\n";
    }
    md << "\n";
  }

  if (!report.adjusted.empty()) {
    md << "## Adjusted disparities (protocol-controlled)\n\n";
    emit_adjusted_table(md, report.adjusted, false);
  }
  if (!report.sensitivity.empty()) {
    md << "## Single-factor sensitivity\n\n";
    emit_adjusted_table(md, report.sensitivity, false);
  }
  if (!report.robustness.empty()) {
    md << "## Complete-case robustness\n\n";
    emit_adjusted_table(md, report.robustness, true);
  }
  return md.str();
}

AuditReport run(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw_input("no input files given");

  const AttributeMapping mapping = cfg.mapping_path.empty()
                                       ? AttributeMapping::defaults()
                                       : AttributeMapping::from_json_file(cfg.mapping_path);

  std::vector<CaseRow> rows;
  for (const std::string& path : cfg.inputs) {
    std::vector<CaseRow> file_rows = read_case_file(path);
    if (cfg.inputs.size() > 1) {
      const std::string name = std::filesystem::path(path).filename().string();
      for (CaseRow& r : file_rows) r.source = name;
    }
    rows.insert(rows.end(), std::make_move_iterator(file_rows.begin()),
                std::make_move_iterator(file_rows.end()));
  }
  LoadResult loaded = load_cohort(rows, mapping, ReferenceDatePolicy::per_case());
  const Cohort& cohort = loaded.cohort;

  AuditReport report;
  report.meta.toolkit = kToolkitName;
  report.meta.version = kToolkitVersion;
  report.meta.seed = cfg.bootstrap.seed;
  report.meta.n_resamples = cfg.bootstrap.n_resamples;
  report.meta.delta = cfg.band.delta;
  report.meta.alpha = cfg.band.alpha;
  report.meta.missing_policy = cfg.missing_policy;
  report.meta.config_hash = config_hash(cfg);
  report.meta.cases_loaded = cohort.size();
  report.meta.rows_rejected = loaded.rejects.size();
  report.rejects = loaded.rejects;

  std::set<Analysis> requested(cfg.analyses.begin(), cfg.analyses.end());

  if (requested.count(Analysis::Describe)) {
    report.has_describe = true;
    report.describe.freq = describe(cohort, mapping);
    report.describe.protocols = protocol_summary(cohort);
    for (Attr a : kAllAttrs) {
      report.describe.overlap[static_cast<size_t>(a)] = protocol_overlap(cohort, a);
    }
  }

  if (requested.count(Analysis::Unadjusted)) {
    for (Attr a : kAllAttrs) {
      report.unadjusted.push_back(unadjusted_audit(cohort, a, cfg.band, mapping));
    }
  }

  if (requested.count(Analysis::Adjusted)) {
    for (Attr a : kAllAttrs) {
      for (Attr cov : kAllAttrs) {
        if (cov == a) continue;
        report.adjusted.push_back(
            cfg.missing_policy == MissingPolicy::CompleteCase
                ? complete_case_robustness(cohort, a, cov, cfg.bootstrap, cfg.band, mapping,
                                           cfg.threads)
                : adjusted_audit(cohort, a, cov, cfg.bootstrap, cfg.band, mapping, cfg.threads));
      }
    }
  }

  if (requested.count(Analysis::Sensitivity)) {
    for (Attr a : kAllAttrs) {
      report.sensitivity.push_back(single_factor_sensitivity(cohort, a, ControlVar::protocol(),
                                                             cfg.bootstrap, cfg.band, mapping,
                                                             cfg.threads));
      for (Attr control : kAllAttrs) {
        if (control == a) continue;
        report.sensitivity.push_back(single_factor_sensitivity(
            cohort, a, ControlVar::attribute(control), cfg.bootstrap, cfg.band, mapping,
            cfg.threads));
      }
    }
  }

  if (requested.count(Analysis::Robustness)) {
    for (Attr a : kAllAttrs) {
      for (Attr cov : kAllAttrs) {
        if (cov == a) continue;
        report.robustness.push_back(
            complete_case_robustness(cohort, a, cov, cfg.bootstrap, cfg.band, mapping, cfg.threads));
      }
    }
  }
  return report;
}

void write_outputs(const AuditReport& report, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw_input("cannot create output directory '" + out_dir + "': " + ec.message());

  const auto write_file = [&](const char* name, const std::string& content) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_input("cannot write '" + path + "'");
    out << content;
  };
  write_file("report.json", report_to_json(report));
  write_file("report.md", emit_markdown(report));
  std::string rejects;
  for (const std::string& line : report.rejects) {
    rejects += line;
    rejects += '\n';
  }
  write_file("rejects.log", rejects);
}

}  // namespace fairaudit
