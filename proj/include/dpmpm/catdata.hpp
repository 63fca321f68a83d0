#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace dpmpm {

class Rng;

/// Level code of a categorical cell. Valid codes lie in [0, d_j).
using Code = std::int32_t;
inline constexpr Code kMissing = -1;
inline constexpr Code kWildcard = -1;

struct Variable {
  std::string name;
  std::vector<std::string> levels;
};

/// Ordered list of categorical variables with their level labels.
///
/// Every variable has at least two distinct non-empty labels and names are
/// unique; the constructor enforces both and throws SchemaError otherwise.
class Schema {
public:
  Schema() = default;
  explicit Schema(std::vector<Variable> variables);

  std::size_t size() const { return variables_.size(); }
  const Variable& operator[](std::size_t j) const { return variables_[j]; }
  const std::vector<Variable>& variables() const { return variables_; }

  int levels(std::size_t j) const { return static_cast<int>(variables_[j].levels.size()); }
  std::vector<int> level_counts() const;
  // Sum of d_j over all variables.
  std::size_t total_levels() const;
  // Product of d_j; saturates at SIZE_MAX.
  std::size_t cell_count() const;

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws SchemaError naming the variable when absent.
  std::size_t index_of(std::string_view name) const;
  std::optional<Code> code_of(std::size_t j, std::string_view label) const;
  const std::string& label(std::size_t j, Code code) const { return variables_[j].levels[code]; }

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& doc);

  friend bool operator==(const Schema& a, const Schema& b);

private:
  std::vector<Variable> variables_;
  std::vector<std::unordered_map<std::string, Code>> lookup_;
};

Schema load_schema_json(const std::filesystem::path& path);
void write_schema_json(const Schema& schema, const std::filesystem::path& path);

/// n x p table of level codes, row-major, with kMissing for absent cells.
class CategoricalDataset {
public:
  CategoricalDataset() = default;
  // All cells start out missing.
  CategoricalDataset(Schema schema, std::size_t n);
  // Validates every code against the schema.
  CategoricalDataset(Schema schema, std::size_t n, std::vector<Code> cells);

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return n_; }
  std::size_t cols() const { return schema_.size(); }

  Code at(std::size_t i, std::size_t j) const { return cells_[i * cols() + j]; }
  bool is_missing(std::size_t i, std::size_t j) const { return at(i, j) == kMissing; }
  // Throws SchemaError for codes outside [0, d_j) other than kMissing.
  void set(std::size_t i, std::size_t j, Code code);
  // Unchecked write used by the samplers' inner loops.
  void set_unchecked(std::size_t i, std::size_t j, Code code) { cells_[i * cols() + j] = code; }

  std::span<const Code> row(std::size_t i) const { return {cells_.data() + i * cols(), cols()}; }
  std::span<const Code> cells() const { return cells_; }

  std::size_t missing_count() const;
  bool has_missing() const { return missing_count() > 0; }

  friend bool operator==(const CategoricalDataset& a, const CategoricalDataset& b) {
    return a.n_ == b.n_ && a.schema_ == b.schema_ && a.cells_ == b.cells_;
  }

private:
  Schema schema_;
  std::size_t n_ = 0;
  std::vector<Code> cells_;
};

/// Structural-zero definition: each pattern fixes some variables to levels
/// and leaves the rest as kWildcard. A complete record is disallowed when it
/// agrees with any pattern on all of that pattern's fixed entries.
class DisallowedPatternSet {
public:
  DisallowedPatternSet() = default;
  explicit DisallowedPatternSet(Schema schema);
  DisallowedPatternSet(Schema schema, std::vector<std::vector<Code>> patterns);

  const Schema& schema() const { return schema_; }
  const std::vector<std::vector<Code>>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }

  void add(std::vector<Code> pattern);

  // Record must be complete; no kMissing entries are checked here.
  bool matches_unchecked(std::span<const Code> record) const;

private:
  Schema schema_;
  std::vector<std::vector<Code>> patterns_;
};

// Throws ContractViolation if the record has a missing cell.
bool matches_mcz(std::span<const Code> record, const DisallowedPatternSet& mcz);

/// Data-generating mixture used for fixtures: class weights and per-class,
/// per-variable level probabilities.
struct MixtureTruth {
  std::vector<double> weights;
  // component_pmfs[k][j][level]
  std::vector<std::vector<std::vector<double>>> component_pmfs;

  // Checks dimensions against the schema and that all vectors are pmfs.
  void validate(const Schema& schema) const;
};

struct TruthFile {
  Schema schema;
  MixtureTruth truth;
};
// {"variables": [...schema...], "weights": [...], "components": [[[...]]]}
TruthFile load_truth_json(const std::filesystem::path& path);
nlohmann::json truth_to_json(const Schema& schema, const MixtureTruth& truth);

// ---------------------------------------------------------------------------
// I/O

inline constexpr std::string_view kDefaultMissingToken = "NA";

// When `schema` is given, the header must match its names and every label
// must be one of its levels; otherwise levels are collected from the file
// and sorted lexicographically.
CategoricalDataset load_csv(const std::filesystem::path& path,
                            std::string_view missing_token = kDefaultMissingToken,
                            const Schema* schema = nullptr);
CategoricalDataset parse_csv(std::string_view text, std::string_view missing_token = kDefaultMissingToken,
                             const Schema* schema = nullptr);

void write_csv(const CategoricalDataset& data, const std::filesystem::path& path,
               std::string_view missing_token = kDefaultMissingToken);
std::string format_csv(const CategoricalDataset& data, std::string_view missing_token = kDefaultMissingToken);

DisallowedPatternSet load_mcz(const std::filesystem::path& path, const Schema& schema,
                              std::string_view placeholder_token = kDefaultMissingToken);
DisallowedPatternSet parse_mcz(std::string_view text, const Schema& schema,
                               std::string_view placeholder_token = kDefaultMissingToken);

// ---------------------------------------------------------------------------
// Simulation helpers

// Each cell independently becomes missing with probability `rate`.
CategoricalDataset inject_mcar(const CategoricalDataset& data, double rate, std::uint64_t seed);

// i.i.d. records from the mixture; with `mcz`, records matching a pattern
// are rejected and redrawn.
CategoricalDataset generate_from_mixture(const MixtureTruth& truth, std::size_t n, const Schema& schema,
                                         std::uint64_t seed, const DisallowedPatternSet* mcz = nullptr);

inline constexpr std::size_t kMaxConsecutiveRejections = 1'000'000;

}  // namespace dpmpm
