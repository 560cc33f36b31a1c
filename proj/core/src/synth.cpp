#include "fairaudit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/rng.hpp"
#include "json.hpp"

namespace fairaudit {

namespace {

constexpr double kProbTol = 1e-9;

std::string default_raw(Attr a, AttrState s) {
  switch (a) {
    case Attr::Sex:
      return s == AttrState::Group0 ? "Male" : s == AttrState::Group1 ? "Female" : "Nonbinary";
    case Attr::Race:
      return s == AttrState::Group0 ? "White" : s == AttrState::Group1 ? "Non-white" : "Declined";
    case Attr::Ses:
      return s == AttrState::Group0 ? "Commercial" : s == AttrState::Group1 ? "Medicaid" : "Medicare";
    case Attr::Age:
      return "";
  }
  return "";
}

void check_probs(const StateProbs& p, const std::string& what) {
  for (double v : {p.group0, p.group1, p.ignored, p.missing}) {
    if (!(v >= 0.0 && v <= 1.0)) throw_input("synth: " + what + ": probabilities must be in [0,1]");
  }
  if (std::abs(p.sum() - 1.0) > kProbTol) throw_input("synth: " + what + ": probabilities must sum to 1");
}

AttrState draw_state(Rng& rng, const StateProbs& p) {
  const double u = rng.next_unit();
  if (u < p.group0) return AttrState::Group0;
  if (u < p.group0 + p.group1) return AttrState::Group1;
  if (u < p.group0 + p.group1 + p.ignored) return AttrState::Ignored;
  return AttrState::Missing;
}

Date birth_for_age(int age, const Date& reference) {
  Date b{reference.year - age, reference.month, reference.day};
  if (!is_valid_date(b)) b.day -= 1;  // Feb 29 reference, non-leap birth year
  return b;
}

}  // namespace

void SynthSpec::validate() const {
  if (protocols.empty()) throw_input("synth: at least one protocol required");
  double total_weight = 0.0;
  for (const ProtocolGenSpec& p : protocols) {
    if (p.id.empty()) throw_input("synth: protocol id must be nonempty");
    if (!(p.weight >= 0.0)) throw_input("synth: protocol '" + p.id + "': weight must be >= 0");
    if (!(p.base_error_rate >= 0.0 && p.base_error_rate <= 1.0)) {
      throw_input("synth: protocol '" + p.id + "': base_error_rate must be in [0,1]");
    }
    const double shifted = p.base_error_rate + injected_disparity;
    if (!(shifted >= 0.0 && shifted <= 1.0)) {
      throw_input("synth: protocol '" + p.id + "': base_error_rate + injected_disparity outside [0,1]");
    }
    total_weight += p.weight;
  }
  if (std::abs(total_weight - 1.0) > kProbTol) throw_input("synth: protocol weights must sum to 1");

  for (Attr a : kAllAttrs) {
    const AttributeGenConfig& cfg = attributes[static_cast<size_t>(a)];
    check_probs(cfg.probs, std::string("attribute '") + attr_key(a) + "'");
    for (const auto& [proto, probs] : cfg.per_protocol) {
      bool known = false;
      for (const ProtocolGenSpec& p : protocols) known = known || p.id == proto;
      if (!known) {
        throw_input(std::string("synth: attribute '") + attr_key(a) +
                    "': per_protocol override for unknown protocol '" + proto + "'");
      }
      check_probs(probs, std::string("attribute '") + attr_key(a) + "' protocol '" + proto + "'");
    }
  }
  if (!is_valid_date(reference_date)) throw_input("synth: invalid reference_date");
}

std::vector<RawCase> generate_raw_cases(const SynthSpec& spec, const AttributeMapping& mapping) {
  (void)mapping;  // raw vocabularies must agree with the mapping; see README
  spec.validate();

  std::vector<double> cumulative;
  cumulative.reserve(spec.protocols.size());
  double acc = 0.0;
  for (const ProtocolGenSpec& p : spec.protocols) {
    acc += p.weight;
    cumulative.push_back(acc);
  }

  Rng rng = Rng::substream(spec.seed, 0);
  std::vector<RawCase> cases;
  cases.reserve(spec.n_cases);
  size_t error_toggle = 0;
  size_t correct_toggle = 0;

  for (size_t i = 0; i < spec.n_cases; ++i) {
    RawCase c;
    char id[16];
    std::snprintf(id, sizeof(id), "S%06zu", i + 1);
    c.case_id = id;
    c.reference_date = spec.reference_date;

    const double up = rng.next_unit();
    size_t proto = 0;
    while (proto + 1 < cumulative.size() && up >= cumulative[proto]) ++proto;
    const ProtocolGenSpec& protocol = spec.protocols[proto];
    c.protocol_id = protocol.id;

    std::array<AttrState, kAttrCount> states{};
    for (Attr a : kAllAttrs) {
      const AttributeGenConfig& cfg = spec.attributes[static_cast<size_t>(a)];
      states[static_cast<size_t>(a)] = draw_state(rng, cfg.probs_for(protocol.id));
    }

    const auto raw_for = [&](Attr a) -> std::optional<std::string> {
      const AttributeGenConfig& cfg = spec.attributes[static_cast<size_t>(a)];
      switch (states[static_cast<size_t>(a)]) {
        case AttrState::Group0:
          return cfg.raw_group0.empty() ? default_raw(a, AttrState::Group0) : cfg.raw_group0;
        case AttrState::Group1:
          return cfg.raw_group1.empty() ? default_raw(a, AttrState::Group1) : cfg.raw_group1;
        case AttrState::Ignored:
          return cfg.raw_ignored.empty() ? default_raw(a, AttrState::Ignored) : cfg.raw_ignored;
        case AttrState::Missing:
          return std::nullopt;
      }
      return std::nullopt;
    };
    c.sex_raw = raw_for(Attr::Sex);
    c.race_raw = raw_for(Attr::Race);
    c.payer_lob_raw = raw_for(Attr::Ses);

    switch (states[static_cast<size_t>(Attr::Age)]) {
      case AttrState::Group1:  // Adult, 22..50
        c.birth_date = birth_for_age(22 + static_cast<int>(rng.next_below(29)), spec.reference_date);
        break;
      case AttrState::Group0:  // Older, 51..90
        c.birth_date = birth_for_age(51 + static_cast<int>(rng.next_below(40)), spec.reference_date);
        break;
      case AttrState::Ignored:  // 1..21
        c.birth_date = birth_for_age(1 + static_cast<int>(rng.next_below(21)), spec.reference_date);
        break;
      case AttrState::Missing:
        c.birth_date = std::nullopt;
        break;
    }

    double p_error = protocol.base_error_rate;
    if (states[static_cast<size_t>(spec.disparity_attribute)] == AttrState::Group1) {
      p_error += spec.injected_disparity;
    }
    const bool error = rng.next_bernoulli(p_error);
    if (error) {
      c.review_outcome = (error_toggle++ % 2 == 0) ? ReviewOutcome::FalseApproval
                                                   : ReviewOutcome::UnnecessaryEscalation;
    } else {
      c.review_outcome = (correct_toggle++ % 2 == 0) ? ReviewOutcome::CorrectApproval
                                                     : ReviewOutcome::CorrectEscalation;
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

LoadResult generate_cohort(const SynthSpec& spec, const AttributeMapping& mapping) {
  const std::vector<RawCase> cases = generate_raw_cases(spec, mapping);
  return load_cohort(cases, mapping, ReferenceDatePolicy::per_case());
}

double true_delta(const SynthSpec& spec) {
  spec.validate();
  const AttributeGenConfig& cfg = spec.attributes[static_cast<size_t>(spec.disparity_attribute)];
  double mass0 = 0.0, mass1 = 0.0, rate0 = 0.0, rate1 = 0.0;
  for (const ProtocolGenSpec& p : spec.protocols) {
    const StateProbs& probs = cfg.probs_for(p.id);
    mass0 += p.weight * probs.group0;
    mass1 += p.weight * probs.group1;
    rate0 += p.weight * probs.group0 * p.base_error_rate;
    rate1 += p.weight * probs.group1 * p.base_error_rate;
  }
  if (mass0 <= 0.0 || mass1 <= 0.0) {
    throw_degenerate(std::string("synth: attribute '") + attr_key(spec.disparity_attribute) +
                     "' gives zero mass to a comparison group");
  }
  return (rate1 / mass1 + spec.injected_disparity) - rate0 / mass0;
}

SynthSpec SynthSpec::example() {
  SynthSpec s;
  s.n_cases = 8000;
  s.seed = 20250610;
  s.protocols = {{"P01", 0.55, 0.05}, {"P02", 0.45, 0.09}};
  s.disparity_attribute = Attr::Sex;
  s.injected_disparity = 0.0;
  s.attributes[static_cast<size_t>(Attr::Sex)].probs = {0.40, 0.50, 0.0, 0.10};
  s.attributes[static_cast<size_t>(Attr::Age)].probs = {0.55, 0.35, 0.03, 0.07};
  s.attributes[static_cast<size_t>(Attr::Race)].probs = {0.11, 0.04, 0.005, 0.845};
  s.attributes[static_cast<size_t>(Attr::Ses)].probs = {0.22, 0.06, 0.07, 0.65};
  return s;
}

namespace {

using nlohmann::json;

StateProbs parse_probs(const json& obj, const std::string& what) {
  if (!obj.is_object()) throw_input("synth spec: " + what + " must be an object");
  StateProbs p;
  p.group0 = obj.value("group0", 0.0);
  p.group1 = obj.value("group1", 0.0);
  p.ignored = obj.value("ignored", 0.0);
  p.missing = obj.value("missing", 0.0);
  return p;
}

}  // namespace

SynthSpec SynthSpec::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("synth spec: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw_input("synth spec: top level must be an object");

  SynthSpec s;
  // Attributes left unconfigured generate as fully missing.
  for (Attr a : kAllAttrs) s.attributes[static_cast<size_t>(a)].probs = {0.0, 0.0, 0.0, 1.0};

  s.n_cases = doc.value("n_cases", size_t{0});
  s.seed = doc.value("seed", uint64_t{0});
  if (doc.contains("reference_date")) {
    auto d = parse_iso_date(doc["reference_date"].get<std::string>());
    if (!d.has_value()) throw_input("synth spec: bad reference_date");
    s.reference_date = *d;
  }
  if (doc.contains("disparity_attribute")) {
    auto a = attr_from_key(doc["disparity_attribute"].get<std::string>());
    if (!a.has_value()) throw_input("synth spec: unknown disparity_attribute");
    s.disparity_attribute = *a;
  }
  s.injected_disparity = doc.value("injected_disparity", 0.0);

  if (!doc.contains("protocols") || !doc["protocols"].is_array()) {
    throw_input("synth spec: 'protocols' array required");
  }
  for (const auto& p : doc["protocols"]) {
    ProtocolGenSpec proto;
    proto.id = p.value("id", std::string());
    proto.weight = p.value("weight", 0.0);
    proto.base_error_rate = p.value("base_error_rate", 0.0);
    s.protocols.push_back(std::move(proto));
  }

  if (doc.contains("attributes")) {
    for (const auto& [key, section] : doc["attributes"].items()) {
      auto a = attr_from_key(key);
      if (!a.has_value()) throw_input("synth spec: unknown attribute '" + key + "'");
      AttributeGenConfig& cfg = s.attributes[static_cast<size_t>(*a)];
      cfg.probs = parse_probs(section, "attributes." + key);
      cfg.raw_group0 = section.value("raw_group0", std::string());
      cfg.raw_group1 = section.value("raw_group1", std::string());
      cfg.raw_ignored = section.value("raw_ignored", std::string());
      if (section.contains("per_protocol")) {
        for (const auto& [proto, probs] : section["per_protocol"].items()) {
          cfg.per_protocol[proto] = parse_probs(probs, "attributes." + key + ".per_protocol." + proto);
        }
      }
    }
  }
  s.validate();
  return s;
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("synth spec: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

}  // namespace fairaudit
