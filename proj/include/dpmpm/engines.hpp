#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpmpm/catdata.hpp"
#include "dpmpm/model.hpp"

namespace dpmpm {

struct EngineSettings {
  std::size_t nrun = 0;
  std::size_t burn = 0;
  std::size_t thin = 1;
  int K = 0;
  double aalpha = 0.25;
  double balpha = 0.25;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  bool silent = true;
  // Progress stream used when silent is false (stdout by default).
  std::ostream* progress = nullptr;
  // Optional Dirichlet concentrations per variable (default all ones).
  std::vector<std::vector<double>> dirichlet;
  std::optional<double> fixed_alpha;
  // Observer for every kept iteration, e.g. for posterior summaries.
  std::function<void(const DpmpmState&, std::size_t iteration)> on_kept;

  HyperParams hyper_params() const;
  ChainSettings chain_settings() const;
};

enum class OutputKind { Imputation, Synthesis };

struct RunOutput {
  OutputKind kind = OutputKind::Imputation;
  std::vector<CategoricalDataset> datasets;
  CategoricalDataset origdata;
  TraceLog trace;
  std::vector<std::string> warnings;
  // Iterations at which the augmented sample hit Nmax.
  std::vector<std::size_t> cap_hits;
  std::vector<std::string> synthesized;
};

/// Multiple imputation with the unrestricted model.
RunOutput impute_nozeros(const CategoricalDataset& data, const EngineSettings& settings);

/// Multiple imputation under structural zeros.
RunOutput impute_zeros(const CategoricalDataset& data, const DisallowedPatternSet& mcz, std::size_t nmax,
                       const EngineSettings& settings);

/// Partially (or, with every column listed, fully) synthetic data from a
/// fully observed dataset.
RunOutput synthesize(const CategoricalDataset& data, const std::vector<std::string>& vars,
                     const EngineSettings& settings);

// Run report: engine, settings, derived dj, warnings, trace length.
nlohmann::json make_report(const RunOutput& output, const EngineSettings& settings);

// Writes <prefix>_imp<k>.csv or <prefix>_syn<k>.csv (k = 1..m),
// <prefix>_trace.csv and <prefix>_report.json.
void write_run_output(const RunOutput& output, const std::filesystem::path& prefix, const nlohmann::json& report,
                      std::string_view missing_token = kDefaultMissingToken);

std::string format_trace_csv(const TraceLog& trace);
// Parses the iter,kstar,alpha,nmis layout written by format_trace_csv.
TraceLog parse_trace_csv(std::string_view text);

// Paths of the dataset files for a prefix, in order.
std::vector<std::filesystem::path> dataset_paths(const std::filesystem::path& prefix, OutputKind kind, std::size_t m);

}  // namespace dpmpm
