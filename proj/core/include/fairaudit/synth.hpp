#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairaudit/cohort.hpp"

namespace fairaudit {

struct ProtocolGenSpec {
  std::string id;
  double weight = 0.0;
  double base_error_rate = 0.0;
};

/// Four-way state distribution for one attribute: group0, group1, ignored,
/// missing. Must sum to 1.
struct StateProbs {
  double group0 = 0.0;
  double group1 = 0.0;
  double ignored = 0.0;
  double missing = 0.0;

  double sum() const { return group0 + group1 + ignored + missing; }
};

struct AttributeGenConfig {
  StateProbs probs;
  /// Optional per-protocol overrides; protocols not listed use `probs`.
  /// Group-imbalanced protocol mixes create protocol confounding on purpose.
  std::map<std::string, StateProbs> per_protocol;
  /// Raw source strings written into generated case records. Age ignores
  /// these (birth dates encode the band).
  std::string raw_group0, raw_group1, raw_ignored;

  const StateProbs& probs_for(const std::string& protocol_id) const {
    auto it = per_protocol.find(protocol_id);
    return it == per_protocol.end() ? probs : it->second;
  }
};

/// Generative specification for a cohort with known ground-truth disparity:
/// protocol ~ weights, attributes ~ configured state distributions, and
/// error ~ Bernoulli(base_rate(protocol) + injected_disparity * [group1 of
/// the disparity attribute]).
struct SynthSpec {
  size_t n_cases = 0;
  uint64_t seed = 0;
  Date reference_date{2025, 6, 15};
  std::vector<ProtocolGenSpec> protocols;
  Attr disparity_attribute = Attr::Sex;
  double injected_disparity = 0.0;
  std::array<AttributeGenConfig, kAttrCount> attributes;

  /// Weights summing to 1, probabilities in [0,1], base_rate + disparity in
  /// [0,1] for every protocol. Throws Error(Input) otherwise.
  void validate() const;

  static SynthSpec from_json_file(const std::string& path);
  static SynthSpec from_json_text(const std::string& text);

  /// A ready-to-use spec: two protocols, balanced groups, mild missingness.
  static SynthSpec example();
};

/// Deterministic given the seed; byte-identical cohorts on every platform.
/// Outcome labels alternate within each error class, so the two error labels
/// (and the two correct labels) come out evenly split.
std::vector<RawCase> generate_raw_cases(const SynthSpec& spec, const AttributeMapping& mapping);

/// Generated records pushed through the regular load path (so every cohort
/// invariant holds by construction). Rejects are always empty.
LoadResult generate_cohort(const SynthSpec& spec, const AttributeMapping& mapping);

/// Population error-rate difference implied by a SynthSpec: protocol mix may
/// differ between groups, so this is the exact weighted sum, not always
/// injected_disparity itself.
double true_delta(const SynthSpec& spec);

}  // namespace fairaudit
