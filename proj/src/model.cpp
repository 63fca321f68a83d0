#include "dpmpm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "dpmpm/errors.hpp"

namespace dpmpm {

namespace {

constexpr double kAlphaClamp = 1e-14;

}  // namespace

void HyperParams::validate(const Schema& schema) const {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (!(a_alpha > 0.0) || !(b_alpha > 0.0)) throw ConfigError("aalpha and balpha must be positive");
  if (fixed_alpha && !(*fixed_alpha > 0.0)) throw ConfigError("fixed alpha must be positive");
  if (dirichlet.empty()) return;
  if (dirichlet.size() != schema.size()) throw ConfigError("one Dirichlet vector per variable required");
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (dirichlet[j].size() != static_cast<std::size_t>(schema.levels(j))) {
      throw ConfigError("Dirichlet vector for '" + schema[j].name + "' has the wrong length");
    }
    for (double a : dirichlet[j]) {
      if (!(a > 0.0)) throw ConfigError("Dirichlet entries must be positive");
    }
  }
}

ThetaTable::ThetaTable(int K, const std::vector<int>& level_counts) : K_(K), d_(level_counts) {
  offsets_.reserve(d_.size());
  for (int d : d_) {
    offsets_.push_back(stride_);
    stride_ += static_cast<std::size_t>(d);
  }
  values_.assign(static_cast<std::size_t>(K_) * stride_, 0.0);
}

int DpmpmState::kstar() const {
  std::vector<char> seen(pi.size(), 0);
  int count = 0;
  for (int k : z) {
    if (!seen[k]) {
      seen[k] = 1;
      ++count;
    }
  }
  return count;
}

void TraceLog::record(std::size_t t, const DpmpmState& state) {
  iter.push_back(t);
  kstar.push_back(state.kstar());
  alpha.push_back(state.alpha);
  nmis.push_back(state.nmis);
}

// ---------------------------------------------------------------------------

AssignmentCounts count_assignments(const DpmpmState& state) {
  const auto& theta = state.theta;
  AssignmentCounts counts;
  counts.stride = theta.stride();
  counts.class_sizes.assign(static_cast<std::size_t>(theta.classes()), 0);
  counts.level_counts.assign(static_cast<std::size_t>(theta.classes()) * theta.stride(), 0);
  const auto& data = state.completed;
  const std::size_t p = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const int k = state.z[i];
    ++counts.class_sizes[k];
    long* row = counts.level_counts.data() + static_cast<std::size_t>(k) * counts.stride;
    for (std::size_t j = 0; j < p; ++j) ++row[theta.offset(j) + static_cast<std::size_t>(data.at(i, j))];
  }
  return counts;
}

void add_counts(AssignmentCounts& counts, const ThetaTable& layout, std::span<const Code> records,
                std::span<const int> z) {
  const std::size_t p = layout.variables();
  for (std::size_t r = 0; r < z.size(); ++r) {
    const int k = z[r];
    ++counts.class_sizes[k];
    long* row = counts.level_counts.data() + static_cast<std::size_t>(k) * counts.stride;
    for (std::size_t j = 0; j < p; ++j) ++row[layout.offset(j) + static_cast<std::size_t>(records[r * p + j])];
  }
}

std::vector<double> stick_breaking(std::span<const double> v) {
  if (v.empty() || v.back() != 1.0) throw ContractViolation("stick_breaking needs V_K = 1");
  std::vector<double> pi(v.size());
  double remaining = 1.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] >= 0.0 && v[k] <= 1.0)) throw ContractViolation("stick fractions must lie in [0, 1]");
    pi[k] = v[k] * remaining;
    remaining *= 1.0 - v[k];
  }
  return pi;
}

// ---------------------------------------------------------------------------

namespace {

void draw_theta_prior(ThetaTable& theta, const HyperParams& hp, Rng& rng) {
  std::vector<double> conc;
  for (int k = 0; k < theta.classes(); ++k) {
    for (std::size_t j = 0; j < theta.variables(); ++j) {
      conc.resize(static_cast<std::size_t>(theta.levels(j)));
      for (int l = 0; l < theta.levels(j); ++l) conc[l] = hp.dirichlet_at(j, l);
      rng.dirichlet(conc, theta.pmf(k, j));
    }
  }
}

}  // namespace

DpmpmState init_state(const CategoricalDataset& data, const HyperParams& hp, Rng& rng) {
  if (data.rows() == 0) throw ContractViolation("cannot initialize a sampler on an empty dataset");
  hp.validate(data.schema());
  const int K = hp.K;
  DpmpmState s;
  s.alpha = hp.fixed_alpha.value_or(1.0);
  s.v.assign(static_cast<std::size_t>(K), 1.0);
  for (int k = 0; k + 1 < K; ++k) s.v[k] = rng.beta(1.0, s.alpha);
  s.pi = stick_breaking(s.v);
  s.theta = ThetaTable(K, data.schema().level_counts());
  draw_theta_prior(s.theta, hp, rng);
  s.z.resize(data.rows());
  for (auto& zi : s.z) zi = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(K)));
  s.completed = data;
  impute_missing_cells(s, data, rng);
  return s;
}

DpmpmState init_state(const CategoricalDataset& data, const HyperParams& hp, std::uint64_t seed) {
  Rng rng(seed);
  return init_state(data, hp, rng);
}

// ---------------------------------------------------------------------------

ClassPosterior::ClassPosterior(const DpmpmState& state) : K_(state.K()) {
  const auto& theta = state.theta;
  offsets_.resize(theta.variables());
  for (std::size_t j = 0; j < theta.variables(); ++j) offsets_[j] = theta.offset(j);
  log_theta_.resize(theta.stride() * static_cast<std::size_t>(K_));
  for (int k = 0; k < K_; ++k) {
    for (std::size_t j = 0; j < theta.variables(); ++j) {
      auto pmf = theta.pmf(k, j);
      for (std::size_t l = 0; l < pmf.size(); ++l) {
        log_theta_[(offsets_[j] + l) * static_cast<std::size_t>(K_) + static_cast<std::size_t>(k)] = std::log(pmf[l]);
      }
    }
  }
  log_pi_.resize(static_cast<std::size_t>(K_));
  for (int k = 0; k < K_; ++k) log_pi_[k] = std::log(state.pi[k]);
  weights_.resize(static_cast<std::size_t>(K_));
}

void ClassPosterior::fill_weights(std::span<const Code> record) {
  const std::size_t K = static_cast<std::size_t>(K_);
  double* w = weights_.data();
  std::copy(log_pi_.begin(), log_pi_.end(), w);
  for (std::size_t j = 0; j < record.size(); ++j) {
    const Code x = record[j];
    if (x == kMissing) continue;
    const double* row = log_theta_.data() + (offsets_[j] + static_cast<std::size_t>(x)) * K;
    for (std::size_t k = 0; k < K; ++k) w[k] += row[k];
  }
  const double mx = *std::max_element(w, w + K);
  if (!(mx > -std::numeric_limits<double>::infinity())) {
    throw NumericalError("class probabilities are all zero for a record");
  }
  for (std::size_t k = 0; k < K; ++k) w[k] = std::exp(w[k] - mx);
}

int ClassPosterior::draw(std::span<const Code> record, Rng& rng) {
  fill_weights(record);
  return static_cast<int>(rng.categorical(weights_));
}

std::vector<double> ClassPosterior::probabilities(std::span<const Code> record) {
  fill_weights(record);
  std::vector<double> out = weights_;
  double total = 0.0;
  for (double w : out) total += w;
  for (double& w : out) w /= total;
  return out;
}

void sample_z(DpmpmState& state, const CategoricalDataset& data, Rng& rng) {
  ClassPosterior posterior(state);
  for (std::size_t i = 0; i < data.rows(); ++i) state.z[i] = posterior.draw(data.row(i), rng);
}

void sample_theta(DpmpmState& state, const AssignmentCounts& counts, const HyperParams& hp, Rng& rng) {
  auto& theta = state.theta;
  std::vector<double> conc;
  for (int k = 0; k < theta.classes(); ++k) {
    for (std::size_t j = 0; j < theta.variables(); ++j) {
      const int d = theta.levels(j);
      conc.resize(static_cast<std::size_t>(d));
      for (int l = 0; l < d; ++l) {
        conc[l] = hp.dirichlet_at(j, l) + static_cast<double>(counts.at(k, theta.offset(j) + static_cast<std::size_t>(l)));
      }
      rng.dirichlet(conc, theta.pmf(k, j));
    }
  }
}

void sample_theta(DpmpmState& state, const HyperParams& hp, Rng& rng) {
  sample_theta(state, count_assignments(state), hp, rng);
}

void sample_v_and_pi(DpmpmState& state, std::span<const long> class_sizes, Rng& rng) {
  const std::size_t K = state.v.size();
  double tail = 0.0;
  for (long c : class_sizes) tail += static_cast<double>(c);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    tail -= static_cast<double>(class_sizes[k]);
    state.v[k] = rng.beta(1.0 + static_cast<double>(class_sizes[k]), state.alpha + tail);
  }
  state.v[K - 1] = 1.0;
  state.pi = stick_breaking(state.v);
}

void sample_v_and_pi(DpmpmState& state, Rng& rng) {
  std::vector<long> sizes(state.v.size(), 0);
  for (int k : state.z) ++sizes[k];
  sample_v_and_pi(state, sizes, rng);
}

void sample_alpha(DpmpmState& state, const HyperParams& hp, Rng& rng) {
  if (hp.fixed_alpha) {
    state.alpha = *hp.fixed_alpha;
    return;
  }
  const std::size_t K = state.v.size();
  double rate = hp.b_alpha;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double vk = std::min(state.v[k], 1.0 - kAlphaClamp);
    rate -= std::log1p(-vk);
  }
  const double shape = hp.a_alpha + static_cast<double>(K) - 1.0;
  state.alpha = rng.gamma(shape) / rate;
}

void impute_missing_cells(DpmpmState& state, const CategoricalDataset& data, Rng& rng) {
  const std::size_t p = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      if (!data.is_missing(i, j)) continue;
      auto pmf = state.theta.pmf(state.z[i], j);
      state.completed.set_unchecked(i, j, static_cast<Code>(rng.categorical(pmf)));
    }
  }
}

void sample_z_and_impute(DpmpmState& state, const CategoricalDataset& data, Rng& rng) {
  ClassPosterior posterior(state);
  const std::size_t p = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto record = data.row(i);
    const int k = posterior.draw(record, rng);
    state.z[i] = k;
    for (std::size_t j = 0; j < p; ++j) {
      if (record[j] != kMissing) continue;
      state.completed.set_unchecked(i, j, static_cast<Code>(rng.categorical(state.theta.pmf(k, j))));
    }
  }
}

void gibbs_step(DpmpmState& state, const CategoricalDataset& data, const HyperParams& hp, Rng& rng) {
  sample_z_and_impute(state, data, rng);
  const auto counts = count_assignments(state);
  sample_v_and_pi(state, counts.class_sizes, rng);
  sample_alpha(state, hp, rng);
  sample_theta(state, counts, hp, rng);
  state.nmis = 0;
}

void check_state(const DpmpmState& state, const CategoricalDataset& data) {
  constexpr double tol = 1e-12;
  double total = 0.0;
  for (double w : state.pi) {
    if (!(w >= 0.0)) throw NumericalError("negative mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > tol) throw NumericalError("mixture weights do not sum to 1");
  if (stick_breaking(state.v) != state.pi) throw NumericalError("pi is not the stick-breaking image of V");
  for (int k = 0; k < state.theta.classes(); ++k) {
    for (std::size_t j = 0; j < state.theta.variables(); ++j) {
      double s = 0.0;
      for (double x : state.theta.pmf(k, j)) s += x;
      if (std::abs(s - 1.0) > tol) throw NumericalError("theta pmf does not sum to 1");
    }
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (!data.is_missing(i, j) && data.at(i, j) != state.completed.at(i, j)) {
        throw NumericalError("completed data disagrees with an observed cell at row " + std::to_string(i));
      }
      if (state.completed.at(i, j) == kMissing) throw NumericalError("completed data has a missing cell");
    }
  }
}

// ---------------------------------------------------------------------------
// Chain driver

std::vector<std::size_t> kept_iterations(std::size_t nrun, std::size_t burn, std::size_t thin) {
  std::vector<std::size_t> out;
  if (thin == 0) return out;
  for (std::size_t t = burn + thin; t <= nrun; t += thin) out.push_back(t);
  return out;
}

std::vector<std::size_t> dataset_positions(std::size_t candidates, std::size_t m) {
  std::vector<std::size_t> out;
  out.reserve(m);
  for (std::size_t l = 1; l <= m; ++l) out.push_back(l * candidates / m - 1);
  return out;
}

void validate_chain(const ChainSettings& s) {
  if (s.nrun == 0) throw ConfigError("nrun must be positive");
  if (s.burn >= s.nrun) throw ConfigError("burn must be smaller than nrun");
  if (s.thin == 0) throw ConfigError("thin must be at least 1");
  if (s.m == 0) throw ConfigError("m must be at least 1");
  const std::size_t candidates = (s.nrun - s.burn) / s.thin;
  if (s.m > candidates) {
    throw ConfigError("m = " + std::to_string(s.m) + " exceeds the " + std::to_string(candidates) +
                      " kept iterations available from nrun/burn/thin");
  }
}

void print_progress(std::ostream& out, std::size_t iteration, const DpmpmState& state) {
  out << "iter = " << iteration << "  kstar = " << state.kstar() << " alpha = " << state.alpha
      << " Nmis = " << state.nmis << '\n';
}

TraceLog run_chain(DpmpmState& state, Rng& rng, const ChainSettings& settings, const SweepFn& sweep,
                   const KeptFn& on_kept) {
  validate_chain(settings);
  const auto kept = kept_iterations(settings.nrun, settings.burn, settings.thin);
  const auto positions = dataset_positions(kept.size(), settings.m);
  TraceLog trace;
  if (settings.progress) print_progress(*settings.progress, 0, state);
  std::size_t next_kept = 0;
  std::size_t next_dataset = 0;
  for (std::size_t t = 1; t <= settings.nrun; ++t) {
    sweep(state, rng, t);
    if (settings.progress) print_progress(*settings.progress, t, state);
    if (next_kept < kept.size() && kept[next_kept] == t) {
      if (settings.trace) trace.record(t, state);
      std::optional<std::size_t> dataset;
      if (next_dataset < positions.size() && positions[next_dataset] == next_kept) dataset = next_dataset++;
      if (on_kept) on_kept(state, t, dataset);
      ++next_kept;
    }
  }
  return trace;
}

ChainOutput run(DpmpmState& state, const CategoricalDataset& data, const HyperParams& hp, Rng& rng,
                const ChainSettings& settings) {
  ChainOutput out;
  auto sweep = [&](DpmpmState& s, Rng& r, std::size_t) { gibbs_step(s, data, hp, r); };
  auto keep = [&](const DpmpmState& s, std::size_t, std::optional<std::size_t> dataset) {
    if (dataset) out.datasets.push_back(s.completed);
  };
  out.trace = run_chain(state, rng, settings, sweep, keep);
  return out;
}

}  // namespace dpmpm
