#include "dpmpm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dpmpm/csv.hpp"
#include "dpmpm/errors.hpp"
#include "svg.hpp"

namespace dpmpm {

namespace {

std::string full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::size_t default_max_lag(std::size_t length) { return std::min<std::size_t>(40, length / 2); }

AcfResult acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (max_lag < 1 || n <= max_lag) {
    throw ConfigError("autocorrelation needs series length > max_lag >= 1 (length " + std::to_string(n) +
                      ", max_lag " + std::to_string(max_lag) + ")");
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - mean) * (x - mean);

  AcfResult out;
  out.values.assign(max_lag + 1, 0.0);
  out.values[0] = 1.0;
  if (!(denom > 0.0)) {
    out.zero_variance = true;
    return out;
  }
  for (std::size_t h = 1; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t t = 0; t + h < n; ++t) s += (series[t] - mean) * (series[t + h] - mean);
    out.values[h] = std::clamp(s / denom, -1.0, 1.0);
  }
  return out;
}

KstarDiagnostics kstar_mcmc_diag(const TraceLog& trace, std::size_t nrun, std::size_t burn, std::size_t thin,
                                 std::optional<int> K) {
  if (thin == 0 || burn >= nrun) throw ConfigError("need burn < nrun and thin >= 1");
  const auto kept = kept_iterations(nrun, burn, thin);
  if (trace.size() != kept.size()) {
    throw ConfigError("trace has " + std::to_string(trace.size()) + " points but nrun = " + std::to_string(nrun) +
                      ", burn = " + std::to_string(burn) + ", thin = " + std::to_string(thin) + " keep " +
                      std::to_string(kept.size()));
  }
  if (!std::equal(kept.begin(), kept.end(), trace.iter.begin())) {
    throw ConfigError("trace iterations do not match nrun = " + std::to_string(nrun) + ", burn = " +
                      std::to_string(burn) + ", thin = " + std::to_string(thin));
  }
  if (trace.size() < 2) throw ConfigError("trace needs at least 2 kept points");

  KstarDiagnostics out;
  std::vector<double> x, y;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    x.push_back(static_cast<double>(trace.iter[r]));
    y.push_back(trace.kstar[r]);
  }
  auto& s = out.summary;
  s.points = y.size();
  s.min = *std::min_element(trace.kstar.begin(), trace.kstar.end());
  s.max = *std::max_element(trace.kstar.begin(), trace.kstar.end());
  for (double v : y) s.mean += v;
  s.mean /= static_cast<double>(y.size());
  if (K) {
    if (s.max > *K) throw DataError("kstar exceeds K = " + std::to_string(*K) + " in the trace");
    if (s.max == *K) out.warnings.push_back("kstar reached K = " + std::to_string(*K) + "; re-run with a larger K");
  }

  out.trace.svg = svg::line_plot("Traceplot of kstar", "iteration", "kstar", x, y);
  out.trace.csv = "iter,kstar\n";
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out.trace.csv += std::to_string(trace.iter[r]) + "," + std::to_string(trace.kstar[r]) + "\n";
  }

  out.acf_values = acf(y, default_max_lag(y.size()));
  if (out.acf_values.zero_variance) out.warnings.push_back("kstar is constant; autocorrelations reported as 0");
  std::vector<double> lags;
  for (std::size_t h = 0; h < out.acf_values.values.size(); ++h) lags.push_back(static_cast<double>(h));
  const double lo = std::min(0.0, *std::min_element(out.acf_values.values.begin(), out.acf_values.values.end()));
  out.acf.svg = svg::stem_plot("Autocorrelation of kstar", "lag", "ACF", lags, out.acf_values.values,
                               lo < 0.0 ? -1.0 : 0.0, 1.0);
  out.acf.csv = "lag,acf\n";
  for (std::size_t h = 0; h < out.acf_values.values.size(); ++h) {
    out.acf.csv += std::to_string(h) + "," + full(out.acf_values.values[h]) + "\n";
  }
  return out;
}

MarginalComparison marginal_compare(const CategoricalDataset& obsdata, std::span<const CategoricalDataset> completed,
                                    const std::string& var, CompareMode mode) {
  const Schema& schema = obsdata.schema();
  const std::size_t j = schema.index_of(var);
  for (const auto& ds : completed) {
    if (!(ds.schema() == schema)) throw SchemaError("completed datasets do not share the observed data schema");
  }
  const int d = schema.levels(j);

  auto percentages = [&](const CategoricalDataset& ds) {
    std::vector<double> counts(static_cast<std::size_t>(d), 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
      const Code x = ds.at(i, j);
      if (x == kMissing) continue;
      counts[static_cast<std::size_t>(x)] += 1.0;
      n += 1.0;
    }
    if (n == 0.0) throw DataError("variable '" + var + "' has no observed values");
    for (double& c : counts) c = 100.0 * c / n;
    return counts;
  };

  MarginalComparison out;
  out.variable = var;
  out.levels = schema[j].levels;
  out.columns.push_back("observed");
  const std::string tag = mode == CompareMode::Imputation ? "imp" : "syn";
  std::vector<std::vector<double>> by_column{percentages(obsdata)};
  for (std::size_t l = 0; l < completed.size(); ++l) {
    out.columns.push_back(tag + std::to_string(l + 1));
    by_column.push_back(percentages(completed[l]));
  }
  out.percent.assign(static_cast<std::size_t>(d), std::vector<double>(by_column.size()));
  for (std::size_t c = 0; c < by_column.size(); ++c) {
    for (int l = 0; l < d; ++l) out.percent[static_cast<std::size_t>(l)][c] = by_column[c][static_cast<std::size_t>(l)];
  }

  std::vector<svg::Series> series;
  for (std::size_t c = 0; c < by_column.size(); ++c) series.push_back({out.columns[c], by_column[c]});
  const std::string what = mode == CompareMode::Imputation ? "imputed" : "synthetic";
  out.plot.svg = svg::grouped_bars("Marginal distribution of " + var + ": observed and " + what, "percent",
                                   out.levels, series);
  out.plot.csv = "level";
  for (const auto& c : out.columns) out.plot.csv += "," + c;
  out.plot.csv += "\n";
  for (int l = 0; l < d; ++l) {
    out.plot.csv += csv::escape(out.levels[static_cast<std::size_t>(l)]);
    for (double v : out.percent[static_cast<std::size_t>(l)]) out.plot.csv += "," + full(v);
    out.plot.csv += "\n";
  }
  return out;
}

std::string format_comparison_text(const MarginalComparison& cmp) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{cmp.variable};
  header.insert(header.end(), cmp.columns.begin(), cmp.columns.end());
  rows.push_back(header);
  for (std::size_t l = 0; l < cmp.levels.size(); ++l) {
    std::vector<std::string> row{cmp.levels[l]};
    for (double v : cmp.percent[l]) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      row.push_back(buf);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(' ');
      if (c == 0) {
        out += row[c];
        out.append(width[c] - row[c].size(), ' ');
      } else {
        out.append(width[c] - row[c].size(), ' ');
        out += row[c];
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace dpmpm
