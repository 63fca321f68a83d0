#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpmpm/catdata.hpp"

namespace dpmpm {

enum class CombineMethod { Imputation, SynthesisFull, SynthesisPartial };

// "imputation", "synthesis_full", "synthesis_partial"; ConfigError otherwise.
CombineMethod parse_combine_method(std::string_view name);
std::string_view to_string(CombineMethod method);

// Degrees of freedom reported when the between-dataset variance is zero.
inline constexpr double kDfCap = 1e9;

/// Estimate of one estimand from one completed dataset.
struct PerDatasetEstimate {
  std::string label;
  double q = 0.0;
  double u = 0.0;
};

struct PooledEstimate {
  std::string label;
  double estimate = 0.0;
  double std_error = 0.0;
  double df = 0.0;
  double statistic = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  // Set when the fully synthetic variance was raised to its floor.
  bool variance_clamped = false;
  // Components, kept for inspection.
  double between = 0.0;
  double within = 0.0;
  double total_variance = 0.0;
};

/// Combines m >= 2 per-dataset estimates of one estimand.
///
/// With qbar = mean q, b = sample variance of q and ubar = mean u:
///   imputation          T = (1 + 1/m) b + ubar,  df = (m-1)(1 + ubar / ((1 + 1/m) b))^2
///   synthesis_partial   T = b/m + ubar,          df = (m-1)(1 + ubar / (b/m))^2
///   synthesis_full      T = (1 + 1/m) b - ubar,  df = (m-1)(1 - m ubar / ((m+1) b))^2
/// b = 0 gives df = kDfCap. The fully synthetic T is floored at ubar/m and
/// flagged. Intervals use the t quantile at 0.975.
PooledEstimate combine(std::span<const PerDatasetEstimate> estimates, CombineMethod method);
PooledEstimate combine(std::span<const double> q, std::span<const double> u, CombineMethod method);

/// Quantile of Student's t; df >= kDfCap falls back to the normal quantile.
double student_t_quantile(double p, double df);

// ---------------------------------------------------------------------------
// Cell probabilities

/// One marginal or joint table request: variable names.
using VarTuple = std::vector<std::string>;

struct ProbabilityCell {
  // Level labels, one per variable of the tuple.
  std::vector<std::string> levels;
  // One estimate per dataset.
  std::vector<PerDatasetEstimate> estimates;
};

struct ProbabilityTable {
  VarTuple variables;
  std::vector<ProbabilityCell> cells;
};

/// Relative frequency q and variance q(1-q)/n of every cell of every
/// requested table, per dataset. Cells run over the full level cross
/// product, first variable slowest.
std::vector<ProbabilityTable> compute_probs(std::span<const CategoricalDataset> datasets,
                                            const std::vector<VarTuple>& varlist);

struct PooledProbabilityTable {
  VarTuple variables;
  std::vector<std::vector<std::string>> levels;
  std::vector<PooledEstimate> rows;
};

std::vector<PooledProbabilityTable> pool_estimated_probs(const std::vector<ProbabilityTable>& tables,
                                                         CombineMethod method);

// "MAR;SEX;MAR,WKL" -> {{MAR}, {SEX}, {MAR, WKL}}
std::vector<VarTuple> parse_varlist(std::string_view spec);

// ---------------------------------------------------------------------------
// GLMs

enum class GlmFamily { Logistic, Multinomial };

struct GlmFormula {
  std::string response;
  std::vector<std::string> predictors;
};

// "SEX~WKL+MAR"; whitespace is ignored.
GlmFormula parse_formula(std::string_view text);

struct GlmFit {
  // Coefficient labels follow R's conventions: "(Intercept)", "<var><level>";
  // multinomial fits prefix the response level: "Married SEXMale".
  std::vector<PerDatasetEstimate> coefficients;
  // Non-reference response levels, one per coefficient (multinomial only).
  std::vector<std::string> response_levels;
  std::vector<std::string> terms;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  double max_abs_score = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kScoreTolerance = 1e-8;
inline constexpr double kStepTolerance = 1e-6;
inline constexpr int kMaxGlmIterations = 100;
inline constexpr double kSeparationBound = 30.0;

/// Binary logistic regression by IRLS. The design matrix is an intercept
/// plus treatment-coded dummies (first level as reference).
GlmFit fit_logistic(const CategoricalDataset& data, const std::string& response,
                    const std::vector<std::string>& predictors);

/// Baseline-category logit with the first response level as reference, fit
/// by Newton-Raphson on the full log-likelihood.
GlmFit fit_multinomial(const CategoricalDataset& data, const std::string& response,
                       const std::vector<std::string>& predictors);

GlmFit fit_glm(const CategoricalDataset& data, const GlmFormula& formula, GlmFamily family);

struct PooledGlmTable {
  std::vector<std::string> response_levels;
  std::vector<std::string> terms;
  std::vector<PooledEstimate> rows;
};

// Throws DataError when the coefficient sets differ across fits.
PooledGlmTable pool_fitted_glms(const std::vector<GlmFit>& fits, CombineMethod method);

// ---------------------------------------------------------------------------
// Output

std::string format_probs_csv(const std::vector<PooledProbabilityTable>& tables);
std::string format_probs_text(const std::vector<PooledProbabilityTable>& tables);
std::string format_glm_csv(const PooledGlmTable& table);
// Numbers rounded to 4 decimal places.
std::string format_glm_text(const PooledGlmTable& table);

}  // namespace dpmpm
