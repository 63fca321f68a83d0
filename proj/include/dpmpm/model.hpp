#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dpmpm/catdata.hpp"
#include "dpmpm/rng.hpp"

namespace dpmpm {

/// Prior settings of the truncated DP mixture of products of multinomials.
struct HyperParams {
  int K = 1;
  double a_alpha = 0.25;
  double b_alpha = 0.25;
  // Per-variable Dirichlet concentrations; empty means all ones.
  std::vector<std::vector<double>> dirichlet;
  // Holds alpha at this value instead of sampling it. Used by the exact
  // posterior comparisons, which integrate with alpha fixed.
  std::optional<double> fixed_alpha;

  // Throws ConfigError on K < 1, non-positive Gamma parameters or Dirichlet
  // entries, or Dirichlet vectors whose sizes disagree with the schema.
  void validate(const Schema& schema) const;
  double dirichlet_at(std::size_t j, int level) const {
    return dirichlet.empty() ? 1.0 : dirichlet[j][level];
  }
};

/// K x (sum d_j) table of class-specific level probabilities.
class ThetaTable {
public:
  ThetaTable() = default;
  ThetaTable(int K, const std::vector<int>& level_counts);

  int classes() const { return K_; }
  std::size_t variables() const { return d_.size(); }
  int levels(std::size_t j) const { return d_[j]; }
  std::size_t offset(std::size_t j) const { return offsets_[j]; }
  // Sum of d_j, the row stride of the table.
  std::size_t stride() const { return stride_; }

  std::span<double> pmf(int k, std::size_t j) {
    return {values_.data() + static_cast<std::size_t>(k) * stride_ + offsets_[j], static_cast<std::size_t>(d_[j])};
  }
  std::span<const double> pmf(int k, std::size_t j) const {
    return {values_.data() + static_cast<std::size_t>(k) * stride_ + offsets_[j], static_cast<std::size_t>(d_[j])};
  }
  double at(int k, std::size_t j, Code level) const {
    return values_[static_cast<std::size_t>(k) * stride_ + offsets_[j] + static_cast<std::size_t>(level)];
  }

private:
  int K_ = 0;
  std::vector<int> d_;
  std::vector<std::size_t> offsets_;
  std::size_t stride_ = 0;
  std::vector<double> values_;
};

/// Full Gibbs sampler state.
struct DpmpmState {
  std::vector<int> z;
  std::vector<double> v;
  std::vector<double> pi;
  double alpha = 1.0;
  ThetaTable theta;
  // Observed cells as in the data; missing cells hold the current draws.
  CategoricalDataset completed;
  // Size of the augmented structural-zero sample from the latest sweep.
  std::size_t nmis = 0;

  int K() const { return static_cast<int>(pi.size()); }
  // Number of distinct classes in z.
  int kstar() const;
};

/// Per-kept-iteration traces.
struct TraceLog {
  std::vector<std::size_t> iter;
  std::vector<int> kstar;
  std::vector<double> alpha;
  std::vector<std::size_t> nmis;

  std::size_t size() const { return iter.size(); }
  void record(std::size_t t, const DpmpmState& state);
};

/// Sufficient statistics of the conjugate updates: class sizes and, per
/// class, counts of every (variable, level) pair in the completed data.
struct AssignmentCounts {
  std::vector<long> class_sizes;
  // K x (sum d_j), laid out like ThetaTable.
  std::vector<long> level_counts;
  std::size_t stride = 0;

  long at(int k, std::size_t offset_plus_level) const {
    return level_counts[static_cast<std::size_t>(k) * stride + offset_plus_level];
  }
};

AssignmentCounts count_assignments(const DpmpmState& state);
// Adds the contribution of complete records (row-major, p cells each) with
// their class labels.
void add_counts(AssignmentCounts& counts, const ThetaTable& layout, std::span<const Code> records,
                std::span<const int> z);

// pi_k = V_k * prod_{l<k} (1 - V_l). Requires V_K = 1.
std::vector<double> stick_breaking(std::span<const double> v);

/// alpha = 1, V and theta from their priors, z uniform, missing cells drawn
/// from theta given z.
DpmpmState init_state(const CategoricalDataset& data, const HyperParams& hp, Rng& rng);
DpmpmState init_state(const CategoricalDataset& data, const HyperParams& hp, std::uint64_t seed);

/// Log-space class posterior P(z = k | record) ∝ pi_k prod_j theta_k(x_j) over
/// the record's non-missing cells. Tables are built once per sweep.
class ClassPosterior {
public:
  explicit ClassPosterior(const DpmpmState& state);
  int draw(std::span<const Code> record, Rng& rng);
  // Normalized probabilities, for tests and diagnostics.
  std::vector<double> probabilities(std::span<const Code> record);

private:
  void fill_weights(std::span<const Code> record);

  int K_;
  std::vector<std::size_t> offsets_;
  // (offset_j + level) x K, transposed so a record adds contiguous rows.
  std::vector<double> log_theta_;
  std::vector<double> log_pi_;
  std::vector<double> weights_;
};

void sample_z(DpmpmState& state, const CategoricalDataset& data, Rng& rng);
void sample_theta(DpmpmState& state, const AssignmentCounts& counts, const HyperParams& hp, Rng& rng);
void sample_theta(DpmpmState& state, const HyperParams& hp, Rng& rng);
void sample_v_and_pi(DpmpmState& state, std::span<const long> class_sizes, Rng& rng);
void sample_v_and_pi(DpmpmState& state, Rng& rng);
void sample_alpha(DpmpmState& state, const HyperParams& hp, Rng& rng);
void impute_missing_cells(DpmpmState& state, const CategoricalDataset& data, Rng& rng);

// Draws z_i and then the missing cells of record i from theta_{z_i}, record
// by record. Equivalent in law to sample_z followed by impute_missing_cells.
void sample_z_and_impute(DpmpmState& state, const CategoricalDataset& data, Rng& rng);

/// One sweep: (z, missing cells) -> V, pi -> alpha -> theta.
void gibbs_step(DpmpmState& state, const CategoricalDataset& data, const HyperParams& hp, Rng& rng);

// Asserts the state invariants; throws NumericalError with the violated one.
void check_state(const DpmpmState& state, const CategoricalDataset& data);

// ---------------------------------------------------------------------------
// Chain driver

struct ChainSettings {
  std::size_t nrun = 0;
  std::size_t burn = 0;
  std::size_t thin = 1;
  std::size_t m = 1;
  bool trace = true;
  // Progress lines go here when set.
  std::ostream* progress = nullptr;
};

// Iterations t in (burn, nrun] with (t - burn) % thin == 0.
std::vector<std::size_t> kept_iterations(std::size_t nrun, std::size_t burn, std::size_t thin);
// 0-based positions among `candidates` kept candidates at which the m
// output datasets are taken: evenly spaced, the last candidate included.
std::vector<std::size_t> dataset_positions(std::size_t candidates, std::size_t m);
// Throws ConfigError when the settings are inconsistent.
void validate_chain(const ChainSettings& settings);

using SweepFn = std::function<void(DpmpmState&, Rng&, std::size_t iteration)>;
// Called at every kept iteration; `dataset_index` is set when this
// iteration also yields an output dataset.
using KeptFn = std::function<void(const DpmpmState&, std::size_t iteration, std::optional<std::size_t> dataset_index)>;

// Runs nrun sweeps and returns the trace of the kept iterations.
TraceLog run_chain(DpmpmState& state, Rng& rng, const ChainSettings& settings, const SweepFn& sweep,
                   const KeptFn& on_kept);

struct ChainOutput {
  std::vector<CategoricalDataset> datasets;
  TraceLog trace;
};

/// Unrestricted imputation chain: gibbs_step sweeps, completed data taken at
/// the m evenly spaced kept iterations.
ChainOutput run(DpmpmState& state, const CategoricalDataset& data, const HyperParams& hp, Rng& rng,
                const ChainSettings& settings);

// "iter = <t>  kstar = <k> alpha = <a> Nmis = <n>"
void print_progress(std::ostream& out, std::size_t iteration, const DpmpmState& state);

}  // namespace dpmpm
