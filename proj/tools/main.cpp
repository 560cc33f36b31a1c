#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/version.hpp"

namespace {

using namespace fairaudit;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitBootstrapCap = 4;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Input: return kExitInput;
    case ErrorKind::Degenerate: return kExitDegenerate;
    case ErrorKind::BootstrapDiscardCap: return kExitBootstrapCap;
  }
  return kExitInput;
}

struct AuditFlags {
  std::string config_path;
  std::vector<std::string> inputs;
  std::string mapping;
  double delta = 0.0;
  double alpha = 0.0;
  int resamples = 0;
  uint64_t seed = 0;
  std::string analyses;
  std::string out_dir;
  std::string missing_policy;
  unsigned threads = 0;
};

void add_audit_flags(CLI::App* cmd, AuditFlags& f, bool with_analysis_flags) {
  cmd->add_option("--config", f.config_path, "JSON run configuration; flags override its values");
  cmd->add_option("--input", f.inputs, "case file (.csv or .jsonl); repeatable");
  cmd->add_option("--mapping", f.mapping, "attribute mapping JSON (default: built-in vocabulary)");
  cmd->add_option("--out", f.out_dir, "output directory (report.json, report.md, rejects.log)");
  if (with_analysis_flags) {
    cmd->add_option("--delta", f.delta, "tolerance half-width on the risk-difference scale");
    cmd->add_option("--alpha", f.alpha, "two-sided significance level");
    cmd->add_option("--resamples", f.resamples, "bootstrap resamples");
    cmd->add_option("--seed", f.seed, "bootstrap seed");
    cmd->add_option("--analyses", f.analyses,
                    "comma list from describe,unadjusted,adjusted,sensitivity,robustness");
    cmd->add_option("--missing-policy", f.missing_policy,
                    "covariate missingness in the adjusted block: unknown|complete-case")
        ->check(CLI::IsMember({"unknown", "complete-case"}));
    cmd->add_option("--threads", f.threads, "bootstrap worker threads (does not change results)");
  }
}

RunConfig resolve_config(const CLI::App* cmd, const AuditFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) apply_config_json_file(cfg, f.config_path);
  const auto given = [&](const char* name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--input")) cfg.inputs = f.inputs;
  if (given("--mapping")) cfg.mapping_path = f.mapping;
  if (given("--out")) cfg.out_dir = f.out_dir;
  if (given("--delta")) cfg.band.delta = f.delta;
  if (given("--alpha")) cfg.band.alpha = f.alpha;
  if (given("--resamples")) cfg.bootstrap.n_resamples = f.resamples;
  if (given("--seed")) cfg.bootstrap.seed = f.seed;
  if (given("--analyses")) cfg.analyses = parse_analyses(f.analyses);
  if (given("--missing-policy")) {
    cfg.missing_policy = f.missing_policy == "complete-case" ? MissingPolicy::CompleteCase
                                                             : MissingPolicy::UnknownLevel;
  }
  if (given("--threads")) cfg.threads = std::max(1u, f.threads);
  return cfg;
}

int run_audit(const RunConfig& cfg) {
  const AuditReport report = run(cfg);
  write_outputs(report, cfg.out_dir);
  std::cout << "wrote " << cfg.out_dir << "/report.json, report.md, rejects.log ("
            << report.meta.cases_loaded << " cases, " << report.meta.rows_rejected
            << " rejected rows)\n";
  return kExitOk;
}

int run_synth(const std::string& spec_path, const std::string& out_dir, const std::string& format) {
  const SynthSpec spec = SynthSpec::from_json_file(spec_path);
  const AttributeMapping mapping = AttributeMapping::defaults();
  const std::vector<RawCase> cases = generate_raw_cases(spec, mapping);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw_input("cannot create output directory '" + out_dir + "': " + ec.message());

  const auto open = [&](const char* name) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_input("cannot write '" + path + "'");
    return out;
  };
  if (format == "csv" || format == "both") {
    auto out = open("cases.csv");
    write_case_csv(out, cases);
  }
  if (format == "jsonl" || format == "both") {
    auto out = open("cases.jsonl");
    write_case_jsonl(out, cases);
  }
  {
    auto out = open("truth.json");
    out << "{\n  \"n_cases\": " << cases.size() << ",\n  \"true_delta\": " << true_delta(spec)
        << ",\n  \"disparity_attribute\": \"" << attr_key(spec.disparity_attribute) << "\"\n}\n";
  }
  std::cout << "wrote " << cases.size() << " cases to " << out_dir << " (" << format << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolkitName) + " " + kToolkitVersion +
               " - error-rate fairness audits for prior-authorization decision systems"};
  app.require_subcommand(1);

  AuditFlags audit_flags;
  CLI::App* audit_cmd = app.add_subcommand("audit", "run the configured analyses");
  add_audit_flags(audit_cmd, audit_flags, true);

  AuditFlags describe_flags;
  CLI::App* describe_cmd =
      app.add_subcommand("describe", "cohort composition and protocol diagnostics only");
  add_audit_flags(describe_cmd, describe_flags, false);

  std::string synth_spec, synth_out = "synth_out", synth_format = "csv";
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort with known truth");
  synth_cmd->add_option("--spec", synth_spec, "SynthSpec JSON file")->required();
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->add_option("--format", synth_format, "cases.csv and/or cases.jsonl")
      ->check(CLI::IsMember({"csv", "jsonl", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (audit_cmd->parsed()) {
      return run_audit(resolve_config(audit_cmd, audit_flags));
    }
    if (describe_cmd->parsed()) {
      RunConfig cfg = resolve_config(describe_cmd, describe_flags);
      cfg.analyses = {Analysis::Describe};
      return run_audit(cfg);
    }
    if (synth_cmd->parsed()) {
      return run_synth(synth_spec, synth_out, synth_format);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
