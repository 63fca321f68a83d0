#include "dpmpm/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpmpm/errors.hpp"

namespace dpmpm {

namespace {

// Cumulative sums of pi and of every theta pmf, for repeated inverse-CDF draws.
struct MixtureCdf {
  std::vector<double> pi;
  std::vector<double> theta;  // laid out like ThetaTable
  const ThetaTable* layout;

  explicit MixtureCdf(const DpmpmState& state) : layout(&state.theta) {
    pi.resize(state.pi.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) pi[k] = acc += state.pi[k];
    const auto& t = state.theta;
    theta.resize(static_cast<std::size_t>(t.classes()) * t.stride());
    for (int k = 0; k < t.classes(); ++k) {
      for (std::size_t j = 0; j < t.variables(); ++j) {
        auto pmf = t.pmf(k, j);
        double* out = theta.data() + static_cast<std::size_t>(k) * t.stride() + t.offset(j);
        double s = 0.0;
        for (std::size_t l = 0; l < pmf.size(); ++l) out[l] = s += pmf[l];
      }
    }
  }

  std::span<const double> cell(int k, std::size_t j) const {
    return {theta.data() + static_cast<std::size_t>(k) * layout->stride() + layout->offset(j),
            static_cast<std::size_t>(layout->levels(j))};
  }
};

std::vector<std::size_t> missing_columns(std::span<const Code> record) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < record.size(); ++j) {
    if (record[j] == kMissing) cols.push_back(j);
  }
  return cols;
}

// Visits every completion of the missing cells of `record` (in place) in
// mixed-radix order, first missing column fastest.
template <typename Visit>
void for_each_completion(std::vector<Code>& record, const std::vector<std::size_t>& cols, const Schema& schema,
                         Visit&& visit) {
  for (std::size_t c : cols) record[c] = 0;
  for (;;) {
    if (!visit(static_cast<const std::vector<Code>&>(record))) return;
    std::size_t pos = 0;
    while (pos < cols.size()) {
      const std::size_t j = cols[pos];
      if (++record[j] < schema.levels(j)) break;
      record[j] = 0;
      ++pos;
    }
    if (pos == cols.size()) return;
  }
}

std::string record_list(const std::vector<std::size_t>& rows) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(rows.size(), 10);
  for (std::size_t r = 0; r < shown; ++r) {
    if (r) out += ", ";
    out += std::to_string(rows[r]);
  }
  if (rows.size() > shown) out += ", ... (" + std::to_string(rows.size()) + " in total)";
  return out;
}

}  // namespace

AugmentedSample draw_augmented(const DpmpmState& state, const DisallowedPatternSet& mcz, std::size_t n,
                               std::size_t nmax, Rng& rng) {
  AugmentedSample out;
  if (mcz.empty() || n == 0) {
    out.successes = n;
    return out;
  }
  if (nmax == 0) throw ContractViolation("Nmax must be positive when structural zeros are present");
  const MixtureCdf cdf(state);
  const std::size_t p = state.theta.variables();
  std::vector<Code> record(p);
  while (out.successes < n && out.nmis < nmax) {
    const int k = static_cast<int>(rng.categorical_from_cdf(cdf.pi));
    for (std::size_t j = 0; j < p; ++j) record[j] = static_cast<Code>(rng.categorical_from_cdf(cdf.cell(k, j)));
    if (mcz.matches_unchecked(record)) {
      out.records.insert(out.records.end(), record.begin(), record.end());
      out.z.push_back(k);
      ++out.nmis;
    } else {
      ++out.successes;
    }
  }
  out.cap_hit = out.successes < n;
  return out;
}

std::vector<std::vector<Code>> allowed_completions(std::span<const Code> record, const DisallowedPatternSet& mcz) {
  std::vector<Code> work(record.begin(), record.end());
  const auto cols = missing_columns(record);
  std::vector<std::vector<Code>> out;
  for_each_completion(work, cols, mcz.schema(), [&](const std::vector<Code>& full) {
    if (!mcz.matches_unchecked(full)) out.push_back(full);
    return true;
  });
  return out;
}

void check_truncation_consistency(const CategoricalDataset& data, const DisallowedPatternSet& mcz) {
  if (!(data.schema() == mcz.schema())) throw SchemaError("pattern set schema differs from the data schema");
  if (mcz.empty()) return;
  std::vector<std::size_t> bad;
  std::vector<Code> work(data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto record = data.row(i);
    std::copy(record.begin(), record.end(), work.begin());
    const auto cols = missing_columns(record);
    bool found = false;
    for_each_completion(work, cols, data.schema(), [&](const std::vector<Code>& full) {
      found = !mcz.matches_unchecked(full);
      return !found;
    });
    if (!found) bad.push_back(i);
  }
  if (!bad.empty()) {
    throw DataError("records with no allowed completion under the structural zeros (0-based rows): " +
                    record_list(bad));
  }
}

void impute_missing_truncated(DpmpmState& state, const CategoricalDataset& data, const DisallowedPatternSet& mcz,
                              Rng& rng, std::size_t max_attempts) {
  const std::size_t p = data.cols();
  std::vector<Code> work(p);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto record = data.row(i);
    const auto cols = missing_columns(record);
    if (cols.empty()) continue;
    const int k = state.z[i];
    std::copy(record.begin(), record.end(), work.begin());
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
      for (std::size_t j : cols) work[j] = static_cast<Code>(rng.categorical(state.theta.pmf(k, j)));
      accepted = !mcz.matches_unchecked(work);
    }
    if (!accepted) {
      const auto options = allowed_completions(record, mcz);
      if (options.empty()) throw DataError("record " + std::to_string(i) + " has no allowed completion");
      std::vector<double> weights(options.size());
      for (std::size_t c = 0; c < options.size(); ++c) {
        double w = 1.0;
        for (std::size_t j : cols) w *= state.theta.at(k, j, options[c][j]);
        weights[c] = w;
      }
      double total = 0.0;
      for (double w : weights) total += w;
      if (!(total > 0.0)) throw NumericalError("record " + std::to_string(i) + ": allowed completions have zero mass");
      work = options[rng.categorical(weights)];
    }
    for (std::size_t j : cols) state.completed.set_unchecked(i, j, work[j]);
  }
}

void sample_z_and_impute_truncated(DpmpmState& state, const CategoricalDataset& data,
                                   const DisallowedPatternSet& mcz, Rng& rng, std::size_t max_attempts) {
  ClassPosterior posterior(state);
  const std::size_t p = data.cols();
  std::vector<Code> work(p);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto record = data.row(i);
    const auto cols = missing_columns(record);
    if (cols.empty()) {
      state.z[i] = posterior.draw(record, rng);
      continue;
    }
    std::copy(record.begin(), record.end(), work.begin());
    bool accepted = false;
    int k = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
      k = posterior.draw(record, rng);
      for (std::size_t j : cols) work[j] = static_cast<Code>(rng.categorical(state.theta.pmf(k, j)));
      accepted = !mcz.matches_unchecked(work);
    }
    if (!accepted) {
      // P(completion c) ∝ sum_k pi_k prod_j theta_k(c_j); then z given c.
      const auto options = allowed_completions(record, mcz);
      if (options.empty()) throw DataError("record " + std::to_string(i) + " has no allowed completion");
      std::vector<double> weights(options.size(), 0.0);
      for (std::size_t c = 0; c < options.size(); ++c) {
        for (int kk = 0; kk < state.K(); ++kk) {
          double w = state.pi[kk];
          for (std::size_t j = 0; j < p; ++j) w *= state.theta.at(kk, j, options[c][j]);
          weights[c] += w;
        }
      }
      double total = 0.0;
      for (double w : weights) total += w;
      if (!(total > 0.0)) throw NumericalError("record " + std::to_string(i) + ": allowed completions have zero mass");
      work = options[rng.categorical(weights)];
      k = posterior.draw(work, rng);
    }
    state.z[i] = k;
    for (std::size_t j : cols) state.completed.set_unchecked(i, j, work[j]);
  }
}

TruncatedStep gibbs_step_truncated(DpmpmState& state, const CategoricalDataset& data,
                                   const DisallowedPatternSet& mcz, const HyperParams& hp,
                                   const TruncationSettings& settings, Rng& rng) {
  sample_z_and_impute_truncated(state, data, mcz, rng, settings.max_attempts);
  const auto aug = draw_augmented(state, mcz, data.rows(), settings.nmax, rng);
  auto counts = count_assignments(state);
  add_counts(counts, state.theta, aug.records, aug.z);
  sample_v_and_pi(state, counts.class_sizes, rng);
  sample_alpha(state, hp, rng);
  sample_theta(state, counts, hp, rng);
  state.nmis = aug.nmis;
  return {aug.nmis, aug.cap_hit};
}

}  // namespace dpmpm
