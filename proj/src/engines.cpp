#include "dpmpm/engines.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <set>

#include "dpmpm/csv.hpp"
#include "dpmpm/errors.hpp"
#include "dpmpm/truncation.hpp"

namespace dpmpm {

HyperParams EngineSettings::hyper_params() const {
  HyperParams hp;
  hp.K = K;
  hp.a_alpha = aalpha;
  hp.b_alpha = balpha;
  hp.dirichlet = dirichlet;
  hp.fixed_alpha = fixed_alpha;
  return hp;
}

ChainSettings EngineSettings::chain_settings() const {
  ChainSettings cs;
  cs.nrun = nrun;
  cs.burn = burn;
  cs.thin = thin;
  cs.m = m;
  cs.progress = silent ? nullptr : (progress ? progress : &std::cout);
  return cs;
}

namespace {

void add_kstar_alert(RunOutput& out, int K) {
  if (out.trace.kstar.empty()) return;
  const int top = *std::max_element(out.trace.kstar.begin(), out.trace.kstar.end());
  if (top == K) {
    out.warnings.push_back("kstar reached K = " + std::to_string(K) +
                           " at a kept iteration; re-run with a larger K");
  }
}

void validate_common(const CategoricalDataset& data, const EngineSettings& settings) {
  if (data.rows() == 0) throw DataError("input dataset has no records");
  settings.hyper_params().validate(data.schema());
  validate_chain(settings.chain_settings());
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

RunOutput impute_nozeros(const CategoricalDataset& data, const EngineSettings& settings) {
  validate_common(data, settings);
  const auto hp = settings.hyper_params();
  auto chain = settings.chain_settings();

  RunOutput out;
  out.kind = OutputKind::Imputation;
  out.origdata = data;
  if (!data.has_missing()) out.warnings.push_back("input has no missing cells; every imputed dataset equals the input");

  if (chain.progress) *chain.progress << "Initializing...\nRun model without structural zeros.\n";
  Rng rng(settings.seed);
  DpmpmState state = init_state(data, hp, rng);
  auto sweep = [&](DpmpmState& s, Rng& r, std::size_t) { gibbs_step(s, data, hp, r); };
  auto keep = [&](const DpmpmState& s, std::size_t t, std::optional<std::size_t> dataset) {
    if (dataset) out.datasets.push_back(s.completed);
    if (settings.on_kept) settings.on_kept(s, t);
  };
  out.trace = run_chain(state, rng, chain, sweep, keep);
  add_kstar_alert(out, hp.K);
  return out;
}

RunOutput impute_zeros(const CategoricalDataset& data, const DisallowedPatternSet& mcz, std::size_t nmax,
                       const EngineSettings& settings) {
  validate_common(data, settings);
  if (mcz.empty()) throw ConfigError("structural-zeros imputation needs at least one disallowed pattern");
  if (nmax == 0) throw ConfigError("Nmax must be positive");
  check_truncation_consistency(data, mcz);
  const auto hp = settings.hyper_params();
  auto chain = settings.chain_settings();
  const TruncationSettings trunc{nmax, 1000};

  RunOutput out;
  out.kind = OutputKind::Imputation;
  out.origdata = data;
  if (!data.has_missing()) out.warnings.push_back("input has no missing cells; every imputed dataset equals the input");

  if (chain.progress) *chain.progress << "Initializing...\nRun model with structural zeros.\n";
  Rng rng(settings.seed);
  DpmpmState state = init_state(data, hp, rng);
  impute_missing_truncated(state, data, mcz, rng, trunc.max_attempts);

  auto sweep = [&](DpmpmState& s, Rng& r, std::size_t t) {
    const auto step = gibbs_step_truncated(s, data, mcz, hp, trunc, r);
    if (step.cap_hit) {
      out.cap_hits.push_back(t);
      if (!settings.silent) std::cerr << "warning: augmented sample reached Nmax = " << nmax << " at iteration " << t << '\n';
    }
  };
  auto keep = [&](const DpmpmState& s, std::size_t t, std::optional<std::size_t> dataset) {
    if (dataset) out.datasets.push_back(s.completed);
    if (settings.on_kept) settings.on_kept(s, t);
  };
  out.trace = run_chain(state, rng, chain, sweep, keep);

  for (std::size_t l = 0; l < out.datasets.size(); ++l) {
    const auto& ds = out.datasets[l];
    for (std::size_t i = 0; i < ds.rows(); ++i) {
      if (mcz.matches_unchecked(ds.row(i))) {
        throw NumericalError("imputed dataset " + std::to_string(l + 1) + " contains a disallowed record at row " +
                             std::to_string(i));
      }
    }
  }
  if (!out.cap_hits.empty()) {
    out.warnings.push_back("augmented sample reached Nmax = " + std::to_string(nmax) + " in " +
                           std::to_string(out.cap_hits.size()) + " sweeps (first at iteration " +
                           std::to_string(out.cap_hits.front()) + "); re-run with a larger Nmax");
  }
  add_kstar_alert(out, hp.K);
  return out;
}

RunOutput synthesize(const CategoricalDataset& data, const std::vector<std::string>& vars,
                     const EngineSettings& settings) {
  if (data.has_missing()) throw ContractViolation("synthesis needs a fully observed dataset");
  validate_common(data, settings);
  const auto& schema = data.schema();
  std::vector<char> synth(schema.size(), 0);
  for (const auto& name : vars) {
    auto j = schema.find(name);
    if (!j) throw ConfigError("unknown variable '" + name + "' in the synthesis list");
    synth[*j] = 1;
  }
  const auto hp = settings.hyper_params();
  auto chain = settings.chain_settings();

  RunOutput out;
  out.kind = OutputKind::Synthesis;
  out.origdata = data;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (synth[j]) out.synthesized.push_back(schema[j].name);
  }

  if (chain.progress) *chain.progress << "Initializing...\nRun model without structural zeros.\n";
  const Rng root(settings.seed);
  Rng rng = root;
  DpmpmState state = init_state(data, hp, rng);
  const std::size_t p = schema.size();

  auto sweep = [&](DpmpmState& s, Rng& r, std::size_t) { gibbs_step(s, data, hp, r); };
  auto keep = [&](const DpmpmState& s, std::size_t t, std::optional<std::size_t> dataset) {
    if (settings.on_kept) settings.on_kept(s, t);
    if (!dataset) return;
    CategoricalDataset syn = data;
    if (!out.synthesized.empty()) {
      Rng draw = root.split(*dataset + 1);
      ClassPosterior posterior(s);
      std::vector<Code> masked(p);
      for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto record = data.row(i);
        for (std::size_t j = 0; j < p; ++j) masked[j] = synth[j] ? kMissing : record[j];
        const int k = posterior.draw(masked, draw);
        for (std::size_t j = 0; j < p; ++j) {
          if (synth[j]) syn.set_unchecked(i, j, static_cast<Code>(draw.categorical(s.theta.pmf(k, j))));
        }
      }
    }
    out.datasets.push_back(std::move(syn));
  };
  out.trace = run_chain(state, rng, chain, sweep, keep);
  add_kstar_alert(out, hp.K);
  return out;
}

nlohmann::json make_report(const RunOutput& output, const EngineSettings& settings) {
  nlohmann::json report;
  report["engine"] = output.kind == OutputKind::Imputation ? "imputation" : "synthesis";
  report["seed"] = settings.seed;
  report["nrun"] = settings.nrun;
  report["burn"] = settings.burn;
  report["thin"] = settings.thin;
  report["K"] = settings.K;
  report["aalpha"] = settings.aalpha;
  report["balpha"] = settings.balpha;
  report["m"] = settings.m;
  const auto& schema = output.origdata.schema();
  nlohmann::json names = nlohmann::json::array();
  for (const auto& v : schema.variables()) names.push_back(v.name);
  report["variables"] = names;
  report["dj"] = schema.level_counts();
  report["n"] = output.origdata.rows();
  report["missing_cells"] = output.origdata.missing_count();
  if (output.kind == OutputKind::Synthesis) report["synthesized"] = output.synthesized;
  report["trace_length"] = output.trace.size();
  report["warnings"] = output.warnings;
  report["cap_hit_iterations"] = output.cap_hits;
  return report;
}

std::vector<std::filesystem::path> dataset_paths(const std::filesystem::path& prefix, OutputKind kind, std::size_t m) {
  const std::string tag = kind == OutputKind::Imputation ? "_imp" : "_syn";
  std::vector<std::filesystem::path> out;
  for (std::size_t l = 1; l <= m; ++l) out.emplace_back(prefix.string() + tag + std::to_string(l) + ".csv");
  return out;
}

std::string format_trace_csv(const TraceLog& trace) {
  std::string out = "iter,kstar,alpha,nmis\n";
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out += std::to_string(trace.iter[r]) + "," + std::to_string(trace.kstar[r]) + "," + format_double(trace.alpha[r]) +
           "," + std::to_string(trace.nmis[r]) + "\n";
  }
  return out;
}

TraceLog parse_trace_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw FormatError("trace file is empty");
  const csv::Row expected{"iter", "kstar", "alpha", "nmis"};
  if (rows.front() != expected) throw FormatError("trace header must be iter,kstar,alpha,nmis");
  TraceLog trace;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4) throw FormatError("trace row " + std::to_string(r) + " needs 4 fields");
    try {
      trace.iter.push_back(std::stoull(rows[r][0]));
      trace.kstar.push_back(std::stoi(rows[r][1]));
      trace.alpha.push_back(std::stod(rows[r][2]));
      trace.nmis.push_back(std::stoull(rows[r][3]));
    } catch (const std::exception&) {
      throw FormatError("trace row " + std::to_string(r) + " is not numeric");
    }
  }
  return trace;
}

void write_run_output(const RunOutput& output, const std::filesystem::path& prefix, const nlohmann::json& report,
                      std::string_view missing_token) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  const auto paths = dataset_paths(prefix, output.kind, output.datasets.size());
  for (std::size_t l = 0; l < paths.size(); ++l) write_csv(output.datasets[l], paths[l], missing_token);
  csv::write_file(prefix.string() + "_trace.csv", format_trace_csv(output.trace));
  csv::write_file(prefix.string() + "_report.json", report.dump(2) + "\n");
}

}  // namespace dpmpm
