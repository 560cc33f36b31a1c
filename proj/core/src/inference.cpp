#include "fairaudit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include "fairaudit/error.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

double quantile_type7(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw_input("quantile of an empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (h - std::floor(h));
}

namespace {

void draw_indices(Rng& rng, size_t n, std::vector<uint32_t>& out) {
  out.resize(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint32_t>(rng.next_below(n));
}

/// A draw is unusable when any full-data factor level (reference included)
/// or either attribute group has no rows in it.
bool resample_ok(const DesignMatrix& full, const std::vector<uint32_t>& idx) {
  bool has0 = false;
  bool has1 = false;
  for (uint32_t i : idx) {
    if (full.X(i, full.attribute_col) > 0.5) {
      has1 = true;
    } else {
      has0 = true;
    }
    if (has0 && has1) break;
  }
  if (!has0 || !has1) return false;

  for (const FactorBlock& block : full.factors) {
    std::vector<char> seen(block.levels.size(), 0);
    size_t distinct = 0;
    for (uint32_t i : idx) {
      char& s = seen[static_cast<size_t>(block.level_of_row[i])];
      if (!s) {
        s = 1;
        if (++distinct == block.levels.size()) break;
      }
    }
    if (distinct != block.levels.size()) return false;
  }
  return true;
}

DesignMatrix resample_design(const DesignMatrix& full, const std::vector<uint32_t>& idx) {
  DesignMatrix d;
  const auto m = static_cast<Eigen::Index>(idx.size());
  d.X.resize(m, full.p());
  d.y.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    d.X.row(r) = full.X.row(idx[static_cast<size_t>(r)]);
    d.y(r) = full.y(idx[static_cast<size_t>(r)]);
  }
  d.column_names = full.column_names;
  d.attribute_col = full.attribute_col;
  d.factors = full.factors;
  for (FactorBlock& block : d.factors) {
    std::vector<int32_t> rows(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) rows[r] = block.level_of_row[idx[r]];
    block.level_of_row = std::move(rows);
  }
  return d;
}

struct ResampleOutcome {
  bool ok = false;
  double delta = 0.0;
  bool used_ridge = false;
};

ResampleOutcome resample_delta(const DesignMatrix& full, const std::vector<uint32_t>& idx,
                               const Eigen::VectorXd& warm_start) {
  ResampleOutcome out;
  if (!resample_ok(full, idx)) return out;
  const DesignMatrix d = resample_design(full, idx);
  FitResult fit;
  try {
    fit = fit_logistic_irls(d, {}, &warm_start);
  } catch (const Error&) {
    return out;  // rank-deficient draw: discard
  }
  if (!fit.converged) return out;
  out.ok = true;
  out.used_ridge = !fit.separation_flags.empty();
  out.delta = marginal_standardization(fit, d).delta;
  return out;
}

std::string adjustment_display(const ModelSpec& spec) {
  std::string label;
  if (spec.include_protocol) label = "Protocol";
  for (Attr cov : spec.covariates) {
    if (!label.empty()) label += " + ";
    label += attr_short(cov);
  }
  return label.empty() ? "None" : label;
}

std::vector<std::string> adjustment_keys(const ModelSpec& spec) {
  std::vector<std::string> keys;
  if (spec.include_protocol) keys.emplace_back("protocol");
  for (Attr cov : spec.covariates) keys.emplace_back(attr_key(cov));
  return keys;
}

}  // namespace

AdjustedResult bootstrap_adjusted_delta(const Cohort& c, const ModelSpec& spec,
                                        const BootstrapConfig& cfg, const ToleranceBand& band,
                                        const AttributeMapping& mapping, unsigned threads) {
  if (cfg.n_resamples < 100) throw_input("bootstrap requires n_resamples >= 100");
  if (!(cfg.max_discard_fraction >= 0.0 && cfg.max_discard_fraction <= 1.0)) {
    throw_input("max_discard_fraction must be in [0,1]");
  }

  const Cohort subcohort = attribute_subcohort(c, spec.attribute);
  if (subcohort.empty()) {
    throw_degenerate(std::string("attribute '") + attr_key(spec.attribute) +
                     "': no cases in either comparison group");
  }
  const DesignMatrix full = build_design(subcohort, spec, mapping);

  AdjustedResult result;
  result.attribute = spec.attribute;
  result.adjustment_label = adjustment_display(spec);
  result.adjustment_set = adjustment_keys(spec);
  result.missing_policy = spec.missing_policy;
  result.n_rows = static_cast<size_t>(full.n());
  result.rows_dropped = full.rows_dropped;

  const auto n = static_cast<size_t>(full.n());

  // A constant outcome admits no finite MLE, but the standardized rates are
  // exactly that constant in both groups, in the full data and in every
  // resample: delta 0 with a zero-width CI.
  const double ysum = full.y.sum();
  if (ysum == 0.0 || ysum == static_cast<double>(full.n())) {
    const double rate = ysum == 0.0 ? 0.0 : 1.0;
    result.adj_p0 = rate;
    result.adj_p1 = rate;
    result.adj_delta = 0.0;
    result.verdict = band_verdict({0.0, 0.0}, band);
    return result;
  }

  const FitResult point_fit = fit_logistic_irls(full);
  if (!point_fit.converged) {
    throw_degenerate("point-estimate fit did not converge after " +
                     std::to_string(point_fit.iterations) + " iterations");
  }
  if (!point_fit.separation_flags.empty()) ++result.separation_events;
  const Standardized point = marginal_standardization(point_fit, full);
  result.adj_p0 = point.p0;
  result.adj_p1 = point.p1;
  result.adj_delta = point.delta;

  const auto R = static_cast<size_t>(cfg.n_resamples);
  std::vector<double> deltas(R, 0.0);
  std::vector<char> filled(R, 0);
  std::vector<char> ridge_events(R, 0);

  // Phase 1: resample r depends only on (seed, r); any thread partition
  // produces identical slots.
  const auto worker = [&](size_t begin, size_t end) {
    std::vector<uint32_t> idx;
    for (size_t r = begin; r < end; ++r) {
      Rng rng = Rng::substream(cfg.seed, r + 1);
      draw_indices(rng, n, idx);
      const ResampleOutcome out = resample_delta(full, idx, point_fit.beta);
      if (out.ok) {
        deltas[r] = out.delta;
        filled[r] = 1;
        ridge_events[r] = out.used_ridge ? 1 : 0;
      }
    }
  };

  const unsigned hw = std::max(1u, threads);
  if (hw <= 1 || R < 2 * hw) {
    worker(0, R);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (R + hw - 1) / hw;
    for (unsigned t = 0; t < hw; ++t) {
      const size_t begin = t * chunk;
      const size_t end = std::min(R, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Phase 2: replace degenerate draws from the reserved substream, in slot
  // order, so the redraw sequence is deterministic too.
  const auto max_discards = static_cast<double>(cfg.max_discard_fraction) * static_cast<double>(R);
  int discards = 0;
  uint64_t reserve_index = R;  // substreams R+1, R+2, ...
  std::vector<uint32_t> idx;
  for (size_t r = 0; r < R; ++r) {
    if (filled[r]) continue;
    ++discards;
    for (;;) {
      if (static_cast<double>(discards) > max_discards) {
        throw Error(ErrorKind::BootstrapDiscardCap,
                    "bootstrap discarded " + std::to_string(discards) + " of " + std::to_string(R) +
                        " resamples (cap " + std::to_string(cfg.max_discard_fraction) +
                        "); data too sparse for a stable bootstrap");
      }
      Rng rng = Rng::substream(cfg.seed, ++reserve_index);
      draw_indices(rng, n, idx);
      const ResampleOutcome out = resample_delta(full, idx, point_fit.beta);
      if (out.ok) {
        deltas[r] = out.delta;
        filled[r] = 1;
        ridge_events[r] = out.used_ridge ? 1 : 0;
        break;
      }
      ++discards;
    }
  }
  result.discarded_resamples = discards;
  for (char e : ridge_events) result.separation_events += e;

  std::sort(deltas.begin(), deltas.end());
  const Interval ci{quantile_type7(deltas, 0.025), quantile_type7(deltas, 0.975)};
  result.verdict = band_verdict(ci, band);
  return result;
}

AdjustedResult adjusted_audit(const Cohort& c, Attr attribute, Attr covariate,
                              const BootstrapConfig& cfg, const ToleranceBand& band,
                              const AttributeMapping& mapping, unsigned threads) {
  if (covariate == attribute) throw_input("adjusted_audit: covariate must differ from attribute");
  ModelSpec spec;
  spec.attribute = attribute;
  spec.include_protocol = true;
  spec.covariates = {covariate};
  spec.missing_policy = MissingPolicy::UnknownLevel;
  return bootstrap_adjusted_delta(c, spec, cfg, band, mapping, threads);
}

AdjustedResult single_factor_sensitivity(const Cohort& c, Attr attribute, const ControlVar& control,
                                         const BootstrapConfig& cfg, const ToleranceBand& band,
                                         const AttributeMapping& mapping, unsigned threads) {
  ModelSpec spec;
  spec.attribute = attribute;
  spec.missing_policy = MissingPolicy::UnknownLevel;
  if (control.is_protocol) {
    spec.include_protocol = true;
  } else {
    if (control.attr == attribute) {
      throw_input("single_factor_sensitivity: control must differ from attribute");
    }
    spec.include_protocol = false;
    spec.covariates = {control.attr};
  }
  return bootstrap_adjusted_delta(c, spec, cfg, band, mapping, threads);
}

AdjustedResult complete_case_robustness(const Cohort& c, Attr attribute, Attr covariate,
                                        const BootstrapConfig& cfg, const ToleranceBand& band,
                                        const AttributeMapping& mapping, unsigned threads) {
  if (covariate == attribute) {
    throw_input("complete_case_robustness: covariate must differ from attribute");
  }
  ModelSpec spec;
  spec.attribute = attribute;
  spec.include_protocol = true;
  spec.covariates = {covariate};
  spec.missing_policy = MissingPolicy::CompleteCase;
  return bootstrap_adjusted_delta(c, spec, cfg, band, mapping, threads);
}

}  // namespace fairaudit
