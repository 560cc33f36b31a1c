#include "fairaudit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairaudit/error.hpp"

namespace fairaudit {

const char* missing_policy_key(MissingPolicy p) {
  return p == MissingPolicy::UnknownLevel ? "unknown" : "complete-case";
}

namespace {

constexpr const char* kUnknownLevel = "Unknown";

std::string covariate_level(const AttributeSpec& spec, AttrState s) {
  switch (s) {
    case AttrState::Group0: return spec.group0_label;
    case AttrState::Group1: return spec.group1_label;
    default: return kUnknownLevel;
  }
}

/// Most frequent level wins; ties go to the lexicographically smallest.
int pick_reference(const std::vector<std::string>& levels, const std::vector<size_t>& counts) {
  int ref = 0;
  for (size_t i = 1; i < levels.size(); ++i) {
    if (counts[i] > counts[static_cast<size_t>(ref)]) ref = static_cast<int>(i);
  }
  return ref;
}

}  // namespace

DesignMatrix build_design(const Cohort& subcohort, const ModelSpec& spec,
                          const AttributeMapping& mapping) {
  for (Attr cov : spec.covariates) {
    if (cov == spec.attribute) {
      throw_input(std::string("model: attribute '") + attr_key(spec.attribute) +
                  "' cannot also be a covariate");
    }
  }

  // Row filter. The subcohort must already be restricted to the comparison
  // groups; complete-case additionally drops rows with unknown covariates.
  std::vector<size_t> keep;
  keep.reserve(subcohort.size());
  size_t dropped = 0;
  for (size_t i = 0; i < subcohort.size(); ++i) {
    const DerivedCase& d = subcohort[i];
    const AttrState a = d.attr(spec.attribute);
    if (a != AttrState::Group0 && a != AttrState::Group1) {
      throw_input(std::string("build_design: cohort not filtered to '") + attr_key(spec.attribute) +
                  "' comparison groups (case '" + d.case_id + "')");
    }
    bool drop = false;
    if (spec.missing_policy == MissingPolicy::CompleteCase) {
      for (Attr cov : spec.covariates) {
        const AttrState s = d.attr(cov);
        if (s == AttrState::Ignored || s == AttrState::Missing) {
          drop = true;
          break;
        }
      }
    }
    if (drop) {
      ++dropped;
    } else {
      keep.push_back(i);
    }
  }
  if (keep.empty()) throw_degenerate("build_design: no rows left after filtering");

  const auto n = static_cast<Eigen::Index>(keep.size());
  DesignMatrix d;
  d.rows_dropped = dropped;
  d.column_names = {"intercept",
                    std::string(attr_key(spec.attribute)) + "[" +
                        mapping.spec(spec.attribute).group1_label + "]"};
  d.attribute_col = 1;

  // Factor metadata first so the column count is known before filling X.
  struct PendingFactor {
    std::string name;
    std::vector<std::string> levels;
    std::vector<int32_t> level_of_row;
  };
  std::vector<PendingFactor> pending;

  const auto add_factor = [&](const std::string& name, auto&& level_for_case) {
    PendingFactor f;
    f.name = name;
    std::map<std::string, int32_t> index_of;
    f.level_of_row.reserve(keep.size());
    for (size_t i : keep) {
      const std::string level = level_for_case(subcohort[i]);
      auto [it, inserted] = index_of.try_emplace(level, static_cast<int32_t>(f.levels.size()));
      if (inserted) f.levels.push_back(level);
      f.level_of_row.push_back(it->second);
    }
    // std::map iteration inserted levels in first-seen order; sort for
    // deterministic column layout independent of row order.
    std::vector<int32_t> rank(f.levels.size());
    std::vector<std::string> sorted = f.levels;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < f.levels.size(); ++i) {
      rank[i] = static_cast<int32_t>(
          std::lower_bound(sorted.begin(), sorted.end(), f.levels[i]) - sorted.begin());
    }
    for (auto& lv : f.level_of_row) lv = rank[static_cast<size_t>(lv)];
    f.levels = std::move(sorted);
    pending.push_back(std::move(f));
  };

  if (spec.include_protocol) {
    add_factor("protocol", [](const DerivedCase& c) { return c.protocol_id; });
  }
  for (Attr cov : spec.covariates) {
    const AttributeSpec& cov_spec = mapping.spec(cov);
    add_factor(attr_key(cov),
               [&](const DerivedCase& c) { return covariate_level(cov_spec, c.attr(cov)); });
  }

  Eigen::Index p = 2;
  for (PendingFactor& f : pending) {
    FactorBlock block;
    block.name = std::move(f.name);
    block.levels = std::move(f.levels);
    block.level_of_row = std::move(f.level_of_row);

    std::vector<size_t> counts(block.levels.size(), 0);
    for (int32_t lv : block.level_of_row) ++counts[static_cast<size_t>(lv)];
    block.reference = pick_reference(block.levels, counts);

    block.col_of_level.assign(block.levels.size(), -1);
    if (block.levels.size() == 1) {
      d.warnings.push_back("factor '" + block.name + "' has a single level ('" + block.levels[0] +
                           "'); no columns added");
    } else {
      for (size_t lv = 0; lv < block.levels.size(); ++lv) {
        if (static_cast<int>(lv) == block.reference) continue;
        block.col_of_level[lv] = static_cast<int>(p++);
        d.column_names.push_back(block.name + "[" + block.levels[lv] + "]");
      }
    }
    d.factors.push_back(std::move(block));
  }

  d.X = Eigen::MatrixXd::Zero(n, p);
  d.y = Eigen::VectorXd::Zero(n);
  d.X.col(0).setOnes();
  for (Eigen::Index r = 0; r < n; ++r) {
    const DerivedCase& c = subcohort[keep[static_cast<size_t>(r)]];
    d.y(r) = c.error ? 1.0 : 0.0;
    if (c.attr(spec.attribute) == AttrState::Group1) d.X(r, 1) = 1.0;
  }
  for (const FactorBlock& block : d.factors) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const int col = block.col_of_level[static_cast<size_t>(block.level_of_row[static_cast<size_t>(r)])];
      if (col >= 0) d.X(r, col) = 1.0;
    }
  }
  return d;
}

std::vector<std::string> separation_flags(const DesignMatrix& d) {
  std::vector<std::string> flags;
  const auto n = d.n();

  const auto check_cells = [&](const std::string& name, const std::vector<std::string>& levels,
                               auto&& level_of) {
    std::vector<Eigen::Index> count(levels.size(), 0);
    std::vector<double> errors(levels.size(), 0.0);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto lv = static_cast<size_t>(level_of(r));
      ++count[lv];
      errors[lv] += d.y(r);
    }
    for (size_t lv = 0; lv < levels.size(); ++lv) {
      if (count[lv] > 0 && (errors[lv] == 0.0 || errors[lv] == static_cast<double>(count[lv]))) {
        flags.push_back(name + "=" + levels[lv]);
      }
    }
  };

  // The attribute behaves like a two-level factor for separation purposes.
  std::vector<std::string> attr_levels = {"0", "1"};
  check_cells(d.column_names[static_cast<size_t>(d.attribute_col)].substr(
                  0, d.column_names[static_cast<size_t>(d.attribute_col)].find('[')),
              attr_levels,
              [&](Eigen::Index r) { return d.X(r, d.attribute_col) > 0.5 ? 1 : 0; });
  for (const FactorBlock& block : d.factors) {
    check_cells(block.name, block.levels,
                [&](Eigen::Index r) { return block.level_of_row[static_cast<size_t>(r)]; });
  }
  return flags;
}

double sigmoid(double eta) {
  if (eta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-eta));
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

/// Numerically stable Bernoulli log-likelihood: sum y*eta - softplus(eta).
double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = eta(i);
    const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - softplus;
  }
  return ll;
}

[[noreturn]] void throw_collinear(const DesignMatrix& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  std::string names;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = rank; i < d.p(); ++i) {
    if (!names.empty()) names += ", ";
    names += d.column_names[static_cast<size_t>(perm(i))];
  }
  throw_degenerate("design matrix is rank deficient; collinear columns: " + names);
}

}  // namespace

FitResult fit_logistic_irls(const DesignMatrix& d, const FitControls& controls,
                            const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  if (n < p) throw_input("fit_logistic_irls requires at least as many rows as columns");

  FitResult fit;
  fit.column_names = d.column_names;
  fit.separation_flags = separation_flags(d);
  double lambda = controls.ridge;
  if (lambda == 0.0 && !fit.separation_flags.empty()) lambda = kAutoRidge;
  fit.ridge_used = lambda;

  // Intercept is never penalized.
  Eigen::VectorXd penalty_mask = Eigen::VectorXd::Ones(p);
  penalty_mask(0) = 0.0;

  Eigen::VectorXd beta = warm_start != nullptr && warm_start->size() == p
                             ? *warm_start
                             : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = d.X * beta;

  const auto objective = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    return -log_likelihood(d.y, e) + lambda * (penalty_mask.array() * b.array().square()).sum();
  };
  double obj = objective(beta, eta);

  Eigen::VectorXd mu(n), w(n);
  for (int iter = 1; iter <= controls.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-12);
    }
    Eigen::VectorXd grad =
        d.X.transpose() * (d.y - mu) - 2.0 * lambda * (penalty_mask.array() * beta.array()).matrix();
    Eigen::MatrixXd hess = d.X.transpose() * w.asDiagonal() * d.X;
    hess.diagonal() += 2.0 * lambda * penalty_mask;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    bool singular = false;
    if (lambda == 0.0) {
      // At beta=0 the weights are uniform, so a near-zero pivot means X
      // itself is rank deficient (LDLT can otherwise "solve" consistent
      // singular systems without complaint).
      const Eigen::VectorXd dvec = ldlt.vectorD();
      singular = !(dvec.minCoeff() > dvec.cwiseAbs().maxCoeff() * 1e-12);
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    const double solve_residual = (hess * step - grad).norm();
    if (singular || !step.allFinite() || solve_residual > 1e-6 * (grad.norm() + 1.0)) {
      if (iter == 1) throw_collinear(d);
      break;  // ill-conditioned far from the start: report non-convergence
    }

    // Step halving keeps the penalized deviance monotone.
    double scale = 1.0;
    bool accepted = false;
    Eigen::VectorXd beta_try, eta_try;
    for (int half = 0; half < 40; ++half) {
      beta_try = beta + scale * step;
      eta_try = d.X * beta_try;
      const double obj_try = objective(beta_try, eta_try);
      if (obj_try <= obj + 1e-12 * (1.0 + std::abs(obj))) {
        accepted = true;
        obj = obj_try;
        break;
      }
      scale /= 2.0;
    }
    if (!accepted) break;

    const double max_change = (scale * step).cwiseAbs().maxCoeff();
    beta = beta_try;
    eta = eta_try;
    fit.iterations = iter;
    if (max_change < controls.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.beta = beta;
  fit.deviance = -2.0 * log_likelihood(d.y, eta);
  return fit;
}

double predict_prob(const FitResult& fit, std::span<const double> row) {
  if (static_cast<Eigen::Index>(row.size()) != fit.beta.size()) {
    throw_input("predict_prob: row has " + std::to_string(row.size()) + " values, fit has " +
                std::to_string(fit.beta.size()) + " columns");
  }
  double eta = 0.0;
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i) eta += row[static_cast<size_t>(i)] * fit.beta(i);
  return sigmoid(eta);
}

Standardized marginal_standardization(const FitResult& fit, const DesignMatrix& d) {
  if (!fit.converged) throw_input("marginal_standardization requires a converged fit");
  if (fit.beta.size() != d.p()) throw_input("marginal_standardization: fit/design mismatch");

  const double beta_attr = fit.beta(d.attribute_col);
  // Force the attribute to g by shifting the linear predictor; other columns
  // keep each row's observed values.
  const Eigen::VectorXd eta = d.X * fit.beta;
  const Eigen::VectorXd eta0 = eta - d.X.col(d.attribute_col) * beta_attr;

  double sum0 = 0.0;
  double sum1 = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    sum0 += sigmoid(eta0(i));
    sum1 += sigmoid(eta0(i) + beta_attr);
  }
  Standardized s;
  s.p0 = sum0 / static_cast<double>(d.n());
  s.p1 = sum1 / static_cast<double>(d.n());
  s.delta = s.p1 - s.p0;
  return s;
}

}  // namespace fairaudit
