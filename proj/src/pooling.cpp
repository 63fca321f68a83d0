#include "dpmpm/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "dpmpm/csv.hpp"
#include "dpmpm/errors.hpp"

namespace dpmpm {

namespace {

// Smallest df reported; only reached when the fully synthetic df formula
// evaluates to exactly zero.
constexpr double kDfFloor = 1e-6;

}  // namespace

CombineMethod parse_combine_method(std::string_view name) {
  if (name == "imputation") return CombineMethod::Imputation;
  if (name == "synthesis_full") return CombineMethod::SynthesisFull;
  if (name == "synthesis_partial") return CombineMethod::SynthesisPartial;
  throw ConfigError("unknown combining method '" + std::string(name) +
                    "' (expected imputation, synthesis_full or synthesis_partial)");
}

std::string_view to_string(CombineMethod method) {
  switch (method) {
    case CombineMethod::Imputation:
      return "imputation";
    case CombineMethod::SynthesisFull:
      return "synthesis_full";
    case CombineMethod::SynthesisPartial:
      return "synthesis_partial";
  }
  return "?";
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw ContractViolation("quantile probability must lie in (0, 1)");
  if (!(df > 0.0)) throw ContractViolation("t quantile needs positive degrees of freedom");
  if (p == 0.5) return 0.0;
  if (df >= kDfCap) return boost::math::quantile(boost::math::normal_distribution<>(), p);
  // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
  const double tail = p > 0.5 ? 1.0 - p : p;
  const double x = boost::math::ibeta_inv(df / 2.0, 0.5, 2.0 * tail);
  const double t = std::sqrt(df * (1.0 - x) / x);
  return p > 0.5 ? t : -t;
}

PooledEstimate combine(std::span<const double> q, std::span<const double> u, CombineMethod method) {
  const std::size_t m = q.size();
  if (m < 2) throw ConfigError("combining rules need at least 2 datasets");
  if (u.size() != m) throw ContractViolation("q and u must have the same length");
  const double md = static_cast<double>(m);

  double qbar = 0.0, ubar = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    qbar += q[l];
    ubar += u[l];
  }
  qbar /= md;
  ubar /= md;
  double b = 0.0;
  for (double x : q) b += (x - qbar) * (x - qbar);
  b /= md - 1.0;

  PooledEstimate out;
  out.estimate = qbar;
  out.between = b;
  out.within = ubar;
  double T = 0.0, df = kDfCap;
  switch (method) {
    case CombineMethod::Imputation:
      T = (1.0 + 1.0 / md) * b + ubar;
      if (b > 0.0) df = (md - 1.0) * std::pow(1.0 + ubar / ((1.0 + 1.0 / md) * b), 2);
      break;
    case CombineMethod::SynthesisPartial:
      T = b / md + ubar;
      if (b > 0.0) df = (md - 1.0) * std::pow(1.0 + ubar / (b / md), 2);
      break;
    case CombineMethod::SynthesisFull: {
      T = (1.0 + 1.0 / md) * b - ubar;
      if (b > 0.0) df = (md - 1.0) * std::pow(1.0 - md * ubar / ((md + 1.0) * b), 2);
      const double floor = ubar / md;
      if (T < floor) {
        T = floor;
        out.variance_clamped = true;
      }
      break;
    }
  }
  df = std::clamp(df, kDfFloor, kDfCap);
  out.total_variance = T;
  out.std_error = std::sqrt(T);
  out.df = df;
  out.statistic = out.std_error > 0.0 ? qbar / out.std_error : std::numeric_limits<double>::quiet_NaN();
  const double tq = student_t_quantile(0.975, df);
  out.ci_lower = qbar - tq * out.std_error;
  out.ci_upper = qbar + tq * out.std_error;
  return out;
}

PooledEstimate combine(std::span<const PerDatasetEstimate> estimates, CombineMethod method) {
  std::vector<double> q, u;
  q.reserve(estimates.size());
  u.reserve(estimates.size());
  for (const auto& e : estimates) {
    q.push_back(e.q);
    u.push_back(e.u);
  }
  auto out = combine(q, u, method);
  if (!estimates.empty()) out.label = estimates.front().label;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<VarTuple> parse_varlist(std::string_view spec) {
  std::vector<VarTuple> out;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
  };
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find(';', start), spec.size());
    const auto group = spec.substr(start, end - start);
    VarTuple tuple;
    std::size_t s = 0;
    while (s <= group.size()) {
      const std::size_t e = std::min(group.find(',', s), group.size());
      auto name = trim(group.substr(s, e - s));
      if (!name.empty()) tuple.push_back(std::move(name));
      s = e + 1;
    }
    if (!tuple.empty()) out.push_back(std::move(tuple));
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("empty variable list");
  return out;
}

std::vector<ProbabilityTable> compute_probs(std::span<const CategoricalDataset> datasets,
                                            const std::vector<VarTuple>& varlist) {
  if (datasets.empty()) throw ConfigError("compute_probs needs at least one dataset");
  const Schema& schema = datasets.front().schema();
  for (const auto& ds : datasets) {
    if (!(ds.schema() == schema)) throw SchemaError("datasets do not share a schema");
  }
  std::vector<ProbabilityTable> out;
  for (const auto& tuple : varlist) {
    std::vector<std::size_t> cols;
    std::size_t cells = 1;
    for (const auto& name : tuple) {
      cols.push_back(schema.index_of(name));
      cells *= static_cast<std::size_t>(schema.levels(cols.back()));
    }
    ProbabilityTable table;
    table.variables = tuple;
    table.cells.resize(cells);
    // Labels, first variable slowest.
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rest = c;
      std::vector<std::string> levels(cols.size());
      for (std::size_t v = cols.size(); v-- > 0;) {
        const auto d = static_cast<std::size_t>(schema.levels(cols[v]));
        levels[v] = schema.label(cols[v], static_cast<Code>(rest % d));
        rest /= d;
      }
      table.cells[c].levels = std::move(levels);
    }
    for (const auto& ds : datasets) {
      std::vector<double> counts(cells, 0.0);
      double n = 0.0;
      for (std::size_t i = 0; i < ds.rows(); ++i) {
        std::size_t index = 0;
        bool complete = true;
        for (std::size_t col : cols) {
          const Code x = ds.at(i, col);
          if (x == kMissing) {
            complete = false;
            break;
          }
          index = index * static_cast<std::size_t>(schema.levels(col)) + static_cast<std::size_t>(x);
        }
        if (!complete) continue;
        counts[index] += 1.0;
        n += 1.0;
      }
      for (std::size_t c = 0; c < cells; ++c) {
        const double q = n > 0.0 ? counts[c] / n : 0.0;
        const double u = n > 0.0 ? q * (1.0 - q) / n : 0.0;
        std::string label;
        for (std::size_t v = 0; v < cols.size(); ++v) label += (v ? ", " : "") + table.cells[c].levels[v];
        table.cells[c].estimates.push_back({label, q, u});
      }
    }
    out.push_back(std::move(table));
  }
  return out;
}

std::vector<PooledProbabilityTable> pool_estimated_probs(const std::vector<ProbabilityTable>& tables,
                                                         CombineMethod method) {
  std::vector<PooledProbabilityTable> out;
  for (const auto& table : tables) {
    PooledProbabilityTable pooled;
    pooled.variables = table.variables;
    for (const auto& cell : table.cells) {
      pooled.levels.push_back(cell.levels);
      pooled.rows.push_back(combine(cell.estimates, method));
    }
    out.push_back(std::move(pooled));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(const char* spec, double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string full(double x) { return fmt("%.17g", x); }

std::vector<std::string> number_row(const PooledEstimate& e, const char* est_spec, const char* other_spec) {
  return {fmt(est_spec, e.estimate), fmt(other_spec, e.std_error), fmt(other_spec, e.df),
          fmt(other_spec, e.statistic), fmt(other_spec, e.ci_lower), fmt(other_spec, e.ci_upper)};
}

// Right-aligned columns separated by one space.
std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(' ');
      out.append(width[c] - row[c].size(), ' ');
      out += row[c];
    }
    out.push_back('\n');
  }
  return out;
}

const std::vector<std::string> kNumberHeader = {"Estimate", "Std.Error", "Df", "Statistic", "CI_Lower", "CI_Upper"};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string format_probs_csv(const std::vector<PooledProbabilityTable>& tables) {
  csv::Row header{"Variables", "Levels"};
  header.insert(header.end(), kNumberHeader.begin(), kNumberHeader.end());
  std::string out = csv::format_row(header);
  for (const auto& table : tables) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& e = table.rows[r];
      out += csv::format_row({join(table.variables, ","), join(table.levels[r], ","), full(e.estimate),
                              full(e.std_error), full(e.df), full(e.statistic), full(e.ci_lower), full(e.ci_upper)});
    }
  }
  return out;
}

std::string format_probs_text(const std::vector<PooledProbabilityTable>& tables) {
  std::string out;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& table = tables[t];
    if (t) out.push_back('\n');
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"", join(table.variables, ", ")};
    header.insert(header.end(), kNumberHeader.begin(), kNumberHeader.end());
    rows.push_back(header);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      std::vector<std::string> row{std::to_string(r + 1), join(table.levels[r], ", ")};
      auto nums = number_row(table.rows[r], "%.4f", "%.6f");
      row.insert(row.end(), nums.begin(), nums.end());
      rows.push_back(std::move(row));
    }
    out += align(rows);
  }
  return out;
}

std::string format_glm_csv(const PooledGlmTable& table) {
  const bool multinomial = !table.response_levels.empty();
  csv::Row header;
  if (multinomial) header.push_back("Levels");
  header.push_back("Parameter");
  header.insert(header.end(), kNumberHeader.begin(), kNumberHeader.end());
  std::string out = csv::format_row(header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& e = table.rows[r];
    csv::Row row;
    if (multinomial) row.push_back(table.response_levels[r]);
    row.push_back(table.terms[r]);
    for (double x : {e.estimate, e.std_error, e.df, e.statistic, e.ci_lower, e.ci_upper}) row.push_back(full(x));
    out += csv::format_row(row);
  }
  return out;
}

std::string format_glm_text(const PooledGlmTable& table) {
  const bool multinomial = !table.response_levels.empty();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  if (multinomial) {
    header.push_back("Levels");
    header.push_back("Parameter");
  } else {
    header.push_back("");
  }
  header.insert(header.end(), kNumberHeader.begin(), kNumberHeader.end());
  rows.push_back(header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    if (multinomial) row.push_back(table.response_levels[r]);
    row.push_back(table.terms[r]);
    auto nums = number_row(table.rows[r], "%.4f", "%.4f");
    row.insert(row.end(), nums.begin(), nums.end());
    rows.push_back(std::move(row));
  }
  return align(rows);
}

}  // namespace dpmpm
