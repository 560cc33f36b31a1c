#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/attribute.hpp"
#include "fairaudit/cohort.hpp"

namespace fairaudit {

/// How covariate rows with Missing/Ignored states enter the model: as an
/// explicit "Unknown" level (preserves sample size) or dropped entirely.
enum class MissingPolicy { UnknownLevel, CompleteCase };

const char* missing_policy_key(MissingPolicy p);

/// error ~ attribute + protocol fixed effects + categorical covariates.
struct ModelSpec {
  Attr attribute{};
  bool include_protocol = true;
  std::vector<Attr> covariates;
  MissingPolicy missing_policy = MissingPolicy::UnknownLevel;
};

/// One categorical factor expanded to (levels - 1) indicator columns.
/// levels[reference] is the dropped (most frequent) level.
struct FactorBlock {
  std::string name;
  std::vector<std::string> levels;
  int reference = 0;
  std::vector<int> col_of_level;     // column index per level; -1 for the reference
  std::vector<int32_t> level_of_row; // length n
};

struct DesignMatrix {
  Eigen::MatrixXd X;  // n x p; column 0 is the intercept, column 1 the attribute indicator
  Eigen::VectorXd y;  // 0/1 error outcomes
  std::vector<std::string> column_names;
  int attribute_col = 1;
  std::vector<FactorBlock> factors;
  size_t rows_dropped = 0;  // complete-case exclusions
  std::vector<std::string> warnings;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Expands the subcohort into a dense 0/1 design. The cohort must already be
/// filtered to Group states for the protected attribute (attribute_subcohort);
/// group1 encodes as 1. Reference level per factor is the most frequent level
/// (ties broken lexicographically). Single-level factors contribute no
/// columns and are recorded in warnings.
DesignMatrix build_design(const Cohort& subcohort, const ModelSpec& spec,
                          const AttributeMapping& mapping);

struct FitControls {
  int max_iter = 100;
  double tol = 1e-8;   // max |coefficient change|
  double ridge = 0.0;  // penalty on non-intercept coefficients
};

/// Ridge applied automatically when a factor cell is outcome-invariant.
inline constexpr double kAutoRidge = 1e-6;

struct FitResult {
  Eigen::VectorXd beta;
  std::vector<std::string> column_names;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;    // -2 log-likelihood (unpenalized)
  double ridge_used = 0.0;
  std::vector<std::string> separation_flags;  // e.g. "protocol=P07"
};

/// Factor levels (attribute groups included) whose cases are all errors or
/// all non-errors; such cells push the MLE to the boundary.
std::vector<std::string> separation_flags(const DesignMatrix& d);

/// Newton/IRLS with step-halving on the (penalized) deviance. Non-convergence
/// is reported through converged=false, not an exception; rank-deficient
/// designs raise Error(Degenerate) naming the collinear columns.
FitResult fit_logistic_irls(const DesignMatrix& d, const FitControls& controls = {},
                            const Eigen::VectorXd* warm_start = nullptr);

double sigmoid(double eta);

/// Fitted probability for one design row (same column order as the fit).
double predict_prob(const FitResult& fit, std::span<const double> row);

/// Marginal standardization (g-computation over the combined population):
/// average fitted probability with the attribute column forced to 0 and to 1.
struct Standardized {
  double p0 = 0.0;
  double p1 = 0.0;
  double delta = 0.0;  // p1 - p0
};

Standardized marginal_standardization(const FitResult& fit, const DesignMatrix& d);

}  // namespace fairaudit
