#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmpm/catdata.hpp"
#include "dpmpm/model.hpp"

namespace dpmpm {

struct AcfResult {
  // r_0 .. r_max_lag
  std::vector<double> values;
  // Constant series: every r_h with h >= 1 is reported as 0.
  bool zero_variance = false;
};

std::size_t default_max_lag(std::size_t length);

// Sample autocorrelation; needs series.size() > max_lag >= 1.
AcfResult acf(std::span<const double> series, std::size_t max_lag);

// A rendered figure and the numbers behind it.
struct Plot {
  std::string svg;
  std::string csv;
};

struct KstarSummary {
  double mean = 0.0;
  int min = 0;
  int max = 0;
  std::size_t points = 0;
};

struct KstarDiagnostics {
  Plot trace;
  Plot acf;
  AcfResult acf_values;
  KstarSummary summary;
  std::vector<std::string> warnings;
};

/// Trace and autocorrelation plots of the kept kstar values. The trace must
/// hold exactly the iterations kept under (nrun, burn, thin); when K is given
/// the summary is checked against it.
KstarDiagnostics kstar_mcmc_diag(const TraceLog& trace, std::size_t nrun, std::size_t burn, std::size_t thin,
                                 std::optional<int> K = std::nullopt);

enum class CompareMode { Imputation, Synthesis };

struct MarginalComparison {
  std::string variable;
  std::vector<std::string> levels;
  // "observed", then "imp1".. or "syn1"..
  std::vector<std::string> columns;
  // percent[level][column]
  std::vector<std::vector<double>> percent;
  Plot plot;
};

/// Level percentages of `var` in the observed data (missing cells excluded)
/// and in each completed dataset, with a grouped bar chart.
MarginalComparison marginal_compare(const CategoricalDataset& obsdata, std::span<const CategoricalDataset> completed,
                                    const std::string& var, CompareMode mode);

// Aligned text table, percentages to 2 decimals.
std::string format_comparison_text(const MarginalComparison& cmp);

}  // namespace dpmpm
