#include "dpmpm/catdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "dpmpm/csv.hpp"
#include "dpmpm/errors.hpp"
#include "dpmpm/rng.hpp"

namespace dpmpm {

// ---------------------------------------------------------------------------
// Schema

Schema::Schema(std::vector<Variable> variables) : variables_(std::move(variables)) {
  std::set<std::string> names;
  lookup_.reserve(variables_.size());
  for (const auto& var : variables_) {
    if (var.name.empty()) throw SchemaError("variable with empty name");
    if (!names.insert(var.name).second) throw SchemaError("duplicate variable name '" + var.name + "'");
    if (var.levels.size() < 2) {
      throw SchemaError("variable '" + var.name + "' needs at least 2 levels, has " +
                        std::to_string(var.levels.size()));
    }
    std::unordered_map<std::string, Code> codes;
    for (std::size_t l = 0; l < var.levels.size(); ++l) {
      if (var.levels[l].empty()) throw SchemaError("variable '" + var.name + "' has an empty level label");
      if (!codes.emplace(var.levels[l], static_cast<Code>(l)).second) {
        throw SchemaError("variable '" + var.name + "' repeats level '" + var.levels[l] + "'");
      }
    }
    lookup_.push_back(std::move(codes));
  }
}

std::vector<int> Schema::level_counts() const {
  std::vector<int> d;
  d.reserve(size());
  for (std::size_t j = 0; j < size(); ++j) d.push_back(levels(j));
  return d;
}

std::size_t Schema::total_levels() const {
  std::size_t total = 0;
  for (const auto& var : variables_) total += var.levels.size();
  return total;
}

std::size_t Schema::cell_count() const {
  std::size_t total = 1;
  for (const auto& var : variables_) {
    if (total > std::numeric_limits<std::size_t>::max() / var.levels.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= var.levels.size();
  }
  return total;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (variables_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto j = find(name)) return *j;
  throw SchemaError("unknown variable '" + std::string(name) + "'");
}

std::optional<Code> Schema::code_of(std::size_t j, std::string_view label) const {
  const auto& codes = lookup_[j];
  auto it = codes.find(std::string(label));
  if (it == codes.end()) return std::nullopt;
  return it->second;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& var : variables_) {
    vars.push_back({{"name", var.name}, {"levels", var.levels}});
  }
  return {{"variables", vars}};
}

Schema Schema::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array()) {
    throw FormatError("schema JSON must be an object with a \"variables\" array");
  }
  std::vector<Variable> vars;
  for (const auto& entry : doc["variables"]) {
    if (!entry.contains("name") || !entry.contains("levels")) {
      throw FormatError("schema variable entries need \"name\" and \"levels\"");
    }
    try {
      vars.push_back({entry["name"].get<std::string>(), entry["levels"].get<std::vector<std::string>>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("schema JSON: ") + e.what());
    }
  }
  return Schema(std::move(vars));
}

bool operator==(const Schema& a, const Schema& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].name != b[j].name || a[j].levels != b[j].levels) return false;
  }
  return true;
}

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  const std::string text = csv::read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

Schema load_schema_json(const std::filesystem::path& path) {
  return Schema::from_json(parse_json_file(path));
}

void write_schema_json(const Schema& schema, const std::filesystem::path& path) {
  csv::write_file(path, schema.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CategoricalDataset

CategoricalDataset::CategoricalDataset(Schema schema, std::size_t n)
    : schema_(std::move(schema)), n_(n), cells_(n * schema_.size(), kMissing) {}

CategoricalDataset::CategoricalDataset(Schema schema, std::size_t n, std::vector<Code> cells)
    : schema_(std::move(schema)), n_(n), cells_(std::move(cells)) {
  if (cells_.size() != n_ * schema_.size()) {
    throw ContractViolation("cell vector has " + std::to_string(cells_.size()) + " entries, expected " +
                            std::to_string(n_ * schema_.size()));
  }
  const std::size_t p = schema_.size();
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const Code c = cells_[i * p + j];
      if (c != kMissing && (c < 0 || c >= schema_.levels(j))) {
        throw SchemaError("code " + std::to_string(c) + " out of range for variable '" + schema_[j].name +
                          "' at row " + std::to_string(i));
      }
    }
  }
}

void CategoricalDataset::set(std::size_t i, std::size_t j, Code code) {
  if (code != kMissing && (code < 0 || code >= schema_.levels(j))) {
    throw SchemaError("code " + std::to_string(code) + " out of range for variable '" + schema_[j].name + "'");
  }
  cells_[i * cols() + j] = code;
}

std::size_t CategoricalDataset::missing_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kMissing));
}

// ---------------------------------------------------------------------------
// Structural zeros

DisallowedPatternSet::DisallowedPatternSet(Schema schema) : schema_(std::move(schema)) {}

DisallowedPatternSet::DisallowedPatternSet(Schema schema, std::vector<std::vector<Code>> patterns)
    : schema_(std::move(schema)) {
  for (auto& pattern : patterns) add(std::move(pattern));
}

void DisallowedPatternSet::add(std::vector<Code> pattern) {
  if (pattern.size() != schema_.size()) {
    throw FormatError("pattern has " + std::to_string(pattern.size()) + " entries, schema has " +
                      std::to_string(schema_.size()));
  }
  bool any_fixed = false;
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    if (pattern[j] == kWildcard) continue;
    if (pattern[j] < 0 || pattern[j] >= schema_.levels(j)) {
      throw SchemaError("pattern code out of range for variable '" + schema_[j].name + "'");
    }
    any_fixed = true;
  }
  if (!any_fixed) throw FormatError("pattern with no fixed entries would disallow every record");
  patterns_.push_back(std::move(pattern));
}

bool DisallowedPatternSet::matches_unchecked(std::span<const Code> record) const {
  for (const auto& pattern : patterns_) {
    bool hit = true;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
      if (pattern[j] != kWildcard && pattern[j] != record[j]) {
        hit = false;
        break;
      }
    }
    if (hit) return true;
  }
  return false;
}

bool matches_mcz(std::span<const Code> record, const DisallowedPatternSet& mcz) {
  if (record.size() != mcz.schema().size()) {
    throw ContractViolation("record width does not match the pattern schema");
  }
  for (Code c : record) {
    if (c == kMissing) throw ContractViolation("matches_mcz needs a complete record");
  }
  return mcz.matches_unchecked(record);
}

// ---------------------------------------------------------------------------
// MixtureTruth

void MixtureTruth::validate(const Schema& schema) const {
  constexpr double tol = 1e-12;
  auto check_pmf = [&](const std::vector<double>& v, const std::string& what) {
    double s = 0.0;
    for (double x : v) {
      if (!(x >= 0.0)) throw ConfigError(what + " has a negative or NaN entry");
      s += x;
    }
    if (std::abs(s - 1.0) > tol) throw ConfigError(what + " does not sum to 1");
  };
  if (weights.empty()) throw ConfigError("mixture has no components");
  check_pmf(weights, "mixture weights");
  if (component_pmfs.size() != weights.size()) throw ConfigError("one pmf set per mixture weight required");
  for (std::size_t k = 0; k < component_pmfs.size(); ++k) {
    if (component_pmfs[k].size() != schema.size()) {
      throw ConfigError("component " + std::to_string(k) + " has wrong number of variables");
    }
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (component_pmfs[k][j].size() != static_cast<std::size_t>(schema.levels(j))) {
        throw ConfigError("component " + std::to_string(k) + ", variable '" + schema[j].name +
                          "' has wrong number of levels");
      }
      check_pmf(component_pmfs[k][j], "component " + std::to_string(k) + " pmf of '" + schema[j].name + "'");
    }
  }
}

TruthFile load_truth_json(const std::filesystem::path& path) {
  const auto doc = parse_json_file(path);
  TruthFile out;
  out.schema = Schema::from_json(doc);
  try {
    out.truth.weights = doc.at("weights").get<std::vector<double>>();
    out.truth.component_pmfs = doc.at("components").get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  out.truth.validate(out.schema);
  return out;
}

nlohmann::json truth_to_json(const Schema& schema, const MixtureTruth& truth) {
  auto doc = schema.to_json();
  doc["weights"] = truth.weights;
  doc["components"] = truth.component_pmfs;
  return doc;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

bool is_missing_token(const std::string& cell, std::string_view token) {
  return cell.empty() || cell == token;
}

}  // namespace

CategoricalDataset parse_csv(std::string_view text, std::string_view missing_token, const Schema* schema) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw FormatError("CSV input has no header row");
  const csv::Row header = rows.front();
  const std::size_t p = header.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != p) {
      throw FormatError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                        " fields, header has " + std::to_string(p));
    }
  }
  const std::size_t n = rows.size() - 1;

  Schema resolved;
  if (schema) {
    if (schema->size() != p) {
      throw SchemaError("CSV has " + std::to_string(p) + " columns, schema has " + std::to_string(schema->size()));
    }
    for (std::size_t j = 0; j < p; ++j) {
      if ((*schema)[j].name != header[j]) {
        throw SchemaError("CSV column " + std::to_string(j) + " is '" + header[j] + "', schema expects '" +
                          (*schema)[j].name + "'");
      }
    }
    resolved = *schema;
  } else {
    std::vector<Variable> vars;
    for (std::size_t j = 0; j < p; ++j) {
      std::set<std::string> levels;
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (!is_missing_token(rows[r][j], missing_token)) levels.insert(rows[r][j]);
      }
      if (levels.empty()) throw SchemaError("column '" + header[j] + "' has no observed levels");
      vars.push_back({header[j], {levels.begin(), levels.end()}});
    }
    resolved = Schema(std::move(vars));
  }

  std::vector<Code> cells(n * p, kMissing);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto& cell = rows[r][j];
      if (is_missing_token(cell, missing_token)) continue;
      auto code = resolved.code_of(j, cell);
      if (!code) {
        throw SchemaError("row " + std::to_string(r) + ", column '" + header[j] + "': unknown level '" + cell + "'");
      }
      cells[(r - 1) * p + j] = *code;
    }
  }
  return CategoricalDataset(std::move(resolved), n, std::move(cells));
}

CategoricalDataset load_csv(const std::filesystem::path& path, std::string_view missing_token, const Schema* schema) {
  return parse_csv(csv::read_file(path), missing_token, schema);
}

std::string format_csv(const CategoricalDataset& data, std::string_view missing_token) {
  const auto& schema = data.schema();
  csv::Row row;
  for (const auto& var : schema.variables()) row.push_back(var.name);
  std::string out = csv::format_row(row);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    row.clear();
    for (std::size_t j = 0; j < data.cols(); ++j) {
      const Code c = data.at(i, j);
      row.push_back(c == kMissing ? std::string(missing_token) : schema.label(j, c));
    }
    out += csv::format_row(row);
  }
  return out;
}

void write_csv(const CategoricalDataset& data, const std::filesystem::path& path, std::string_view missing_token) {
  csv::write_file(path, format_csv(data, missing_token));
}

DisallowedPatternSet parse_mcz(std::string_view text, const Schema& schema, std::string_view placeholder_token) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw FormatError("MCZ file has no header row");
  const auto& header = rows.front();
  if (header.size() != schema.size()) {
    throw FormatError("MCZ has " + std::to_string(header.size()) + " columns, data has " +
                      std::to_string(schema.size()));
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != schema[j].name) {
      throw FormatError("MCZ column " + std::to_string(j) + " is '" + header[j] + "' but the data has '" +
                        schema[j].name + "' there; columns must follow the data order");
    }
  }
  DisallowedPatternSet out(schema);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw FormatError("MCZ row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) + " fields");
    }
    std::vector<Code> pattern(header.size(), kWildcard);
    bool any_fixed = false;
    for (std::size_t j = 0; j < header.size(); ++j) {
      const auto& cell = rows[r][j];
      if (is_missing_token(cell, placeholder_token)) continue;
      auto code = schema.code_of(j, cell);
      if (!code) {
        throw SchemaError("MCZ row " + std::to_string(r) + ", column '" + header[j] + "': unknown level '" + cell +
                          "'");
      }
      pattern[j] = *code;
      any_fixed = true;
    }
    if (!any_fixed) {
      throw FormatError("MCZ row " + std::to_string(r) + " is all placeholders and would disallow every record");
    }
    out.add(std::move(pattern));
  }
  return out;
}

DisallowedPatternSet load_mcz(const std::filesystem::path& path, const Schema& schema,
                              std::string_view placeholder_token) {
  return parse_mcz(csv::read_file(path), schema, placeholder_token);
}

// ---------------------------------------------------------------------------
// Simulation

CategoricalDataset inject_mcar(const CategoricalDataset& data, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("MCAR rate must lie in [0, 1]");
  Rng rng(seed);
  CategoricalDataset out = data;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (rng.uniform() < rate) out.set_unchecked(i, j, kMissing);
    }
  }
  return out;
}

CategoricalDataset generate_from_mixture(const MixtureTruth& truth, std::size_t n, const Schema& schema,
                                         std::uint64_t seed, const DisallowedPatternSet* mcz) {
  truth.validate(schema);
  if (mcz && !(mcz->schema() == schema)) throw SchemaError("pattern set schema differs from the data schema");
  const bool reject = mcz && !mcz->empty();
  Rng rng(seed);
  const std::size_t p = schema.size();
  std::vector<Code> cells(n * p);
  std::vector<Code> record(p);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rejections = 0;
    for (;;) {
      const std::size_t k = rng.categorical(truth.weights);
      for (std::size_t j = 0; j < p; ++j) {
        record[j] = static_cast<Code>(rng.categorical(truth.component_pmfs[k][j]));
      }
      if (!reject || !mcz->matches_unchecked(record)) break;
      if (++rejections > kMaxConsecutiveRejections) {
        throw DataError("mixture truth places (almost) all mass on disallowed patterns");
      }
    }
    std::copy(record.begin(), record.end(), cells.begin() + static_cast<std::ptrdiff_t>(i * p));
  }
  return CategoricalDataset(schema, n, std::move(cells));
}

}  // namespace dpmpm
