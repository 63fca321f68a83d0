#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dpmpm/catdata.hpp"
#include "dpmpm/model.hpp"

namespace dpmpm {

/// Records generated inside the disallowed region while drawing from the
/// unrestricted mixture, with the class that generated each one.
struct AugmentedSample {
  // Row-major complete records, p cells each.
  std::vector<Code> records;
  std::vector<int> z;
  std::size_t nmis = 0;
  std::size_t successes = 0;
  bool cap_hit = false;
};

/// Draws complete records from the unrestricted mixture until `n` of them
/// fall outside the pattern set or `nmax` fall inside it. With an empty
/// pattern set nothing is drawn and no randomness is consumed.
AugmentedSample draw_augmented(const DpmpmState& state, const DisallowedPatternSet& mcz, std::size_t n,
                               std::size_t nmax, Rng& rng);

struct TruncationSettings {
  std::size_t nmax = 0;
  // Rejection attempts per record before exact enumeration takes over.
  std::size_t max_attempts = 1000;
};

/// Completions of a record's missing cells that avoid every pattern. The
/// returned rows are full records.
std::vector<std::vector<Code>> allowed_completions(std::span<const Code> record, const DisallowedPatternSet& mcz);

// Throws DataError naming records that are complete and disallowed, or that
// have no allowed completion.
void check_truncation_consistency(const CategoricalDataset& data, const DisallowedPatternSet& mcz);

/// Redraws the missing cells of every record from theta_{z_i} restricted to
/// completions outside the pattern set: rejection first, exact enumeration
/// after `max_attempts` failures.
void impute_missing_truncated(DpmpmState& state, const CategoricalDataset& data, const DisallowedPatternSet& mcz,
                              Rng& rng, std::size_t max_attempts = 1000);

/// Joint draw of (z_i, missing cells of i) from the truncated model given
/// the parameters: z from the observed cells, cells from theta_z, redrawing
/// both until the completed record is allowed. Falls back to enumerating
/// the allowed completions after `max_attempts` failures.
void sample_z_and_impute_truncated(DpmpmState& state, const CategoricalDataset& data,
                                   const DisallowedPatternSet& mcz, Rng& rng, std::size_t max_attempts = 1000);

struct TruncatedStep {
  std::size_t nmis = 0;
  bool cap_hit = false;
};

/// One sweep of the truncated sampler: (z, missing cells) for the observed
/// records, augmented sample, then V, pi, alpha and theta from counts pooled
/// over observed and augmented records.
TruncatedStep gibbs_step_truncated(DpmpmState& state, const CategoricalDataset& data,
                                   const DisallowedPatternSet& mcz, const HyperParams& hp,
                                   const TruncationSettings& settings, Rng& rng);

}  // namespace dpmpm
