#include "cli.hpp"

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpmpm/catdata.hpp"
#include "dpmpm/csv.hpp"
#include "dpmpm/diagnostics.hpp"
#include "dpmpm/engines.hpp"
#include "dpmpm/errors.hpp"
#include "dpmpm/pooling.hpp"
#include "dpmpm/rng.hpp"

namespace dpmpm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

// Config entries become flags placed ahead of the explicit ones, so the
// explicit flags win under the take-last policy.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path || args.empty()) return args;
  json doc;
  try {
    doc = json::parse(csv::read_file(*path));
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError("config " + *path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config " + *path + " must be a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!text.empty()) text += ",";
        text += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else {
      throw ConfigError("config entry '" + key + "' has an unsupported type");
    }
    extra.push_back(flag);
    extra.push_back(text);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (out.empty()) throw IoError("no files match '" + pattern + "'");
  return out;
}

// Reads CSVs that share a header; levels are the per-column union across
// files unless a schema is given.
std::vector<CategoricalDataset> load_many(const std::vector<std::string>& paths, const std::string& missing,
                                          const Schema* schema) {
  std::vector<std::string> texts;
  for (const auto& p : paths) texts.push_back(csv::read_file(p));
  std::optional<Schema> merged;
  if (!schema) {
    std::vector<std::string> names;
    std::vector<std::set<std::string>> levels;
    for (std::size_t f = 0; f < texts.size(); ++f) {
      const auto ds = parse_csv(texts[f], missing);
      std::vector<std::string> these;
      for (const auto& v : ds.schema().variables()) these.push_back(v.name);
      if (f == 0) {
        names = these;
        levels.resize(names.size());
      } else if (these != names) {
        throw SchemaError("columns of " + paths[f] + " differ from " + paths[0]);
      }
      for (std::size_t j = 0; j < names.size(); ++j) {
        for (const auto& l : ds.schema()[j].levels) levels[j].insert(l);
      }
    }
    std::vector<Variable> vars;
    for (std::size_t j = 0; j < names.size(); ++j) vars.push_back({names[j], {levels[j].begin(), levels[j].end()}});
    merged.emplace(std::move(vars));
    schema = &*merged;
  }
  std::vector<CategoricalDataset> out;
  for (const auto& text : texts) out.push_back(parse_csv(text, missing, schema));
  return out;
}

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return s.substr(0, s.size() - suffix.size());
  }
  return fs::path(s).replace_extension().string();
}

// ---------------------------------------------------------------------------
// impute / synthesize

struct EngineArgs {
  std::string data, mcz, schema, out, missing = std::string(kDefaultMissingToken), vars;
  std::size_t nmax = 0, nrun = 0, burn = 0, thin = 50, m = 0;
  int k = 0, chains = 1;
  double aalpha = 0.25, balpha = 0.25;
  std::uint64_t seed = 0;
  bool silent = false, timing = false;
  CLI::Option *nmax_opt = nullptr, *burn_opt = nullptr, *vars_opt = nullptr;
};

void add_engine_options(CLI::App* sub, EngineArgs& a, bool synthesis) {
  sub->add_option("--data", a.data, "input CSV")->required();
  if (!synthesis) {
    sub->add_option("--mcz", a.mcz, "structural-zero patterns CSV");
    a.nmax_opt = sub->add_option("--nmax", a.nmax, "cap on the augmented sample per sweep");
  } else {
    a.vars_opt = sub->add_option("--vars", a.vars, "comma-separated columns to synthesize (default: all)");
  }
  sub->add_option("--nrun", a.nrun, "total sweeps")->required();
  a.burn_opt = sub->add_option("--burn", a.burn, "burn-in sweeps (default nrun/2)");
  sub->add_option("--thin", a.thin, "thinning interval")->capture_default_str();
  sub->add_option("--k", a.k, "maximum number of latent classes")->required();
  sub->add_option("--aalpha", a.aalpha, "Gamma shape of alpha")->capture_default_str();
  sub->add_option("--balpha", a.balpha, "Gamma rate of alpha")->capture_default_str();
  sub->add_option("--m", a.m, "number of output datasets")->required();
  sub->add_option("--seed", a.seed, "random seed")->capture_default_str();
  sub->add_flag("--silent", a.silent, "suppress progress output");
  sub->add_option("--out", a.out, "output prefix")->required();
  sub->add_option("--schema", a.schema, "schema JSON sidecar fixing the levels");
  sub->add_option("--missing-token", a.missing, "missing-value token")->capture_default_str();
  sub->add_option("--chains", a.chains, "independent chains for diagnostics")->capture_default_str();
  sub->add_flag("--timing", a.timing, "record the run time in the report");
}

json engine_echo(const EngineArgs& a, const EngineSettings& s, bool synthesis, const std::vector<std::string>& vars) {
  json c;
  c["data"] = a.data;
  if (!synthesis && !a.mcz.empty()) {
    c["mcz"] = a.mcz;
    c["nmax"] = a.nmax;
  }
  if (synthesis) c["vars"] = vars;
  c["nrun"] = s.nrun;
  c["burn"] = s.burn;
  c["thin"] = s.thin;
  c["k"] = s.K;
  c["aalpha"] = s.aalpha;
  c["balpha"] = s.balpha;
  c["m"] = s.m;
  c["seed"] = s.seed;
  c["silent"] = a.silent;
  c["out"] = a.out;
  if (!a.schema.empty()) c["schema"] = a.schema;
  c["missing-token"] = a.missing;
  c["chains"] = a.chains;
  c["timing"] = a.timing;
  return c;
}

int cmd_engine(const EngineArgs& a, bool synthesis, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.chains < 1) throw ConfigError("--chains must be at least 1");
  std::optional<Schema> schema;
  if (!a.schema.empty()) schema = load_schema_json(a.schema);
  const auto data = load_csv(a.data, a.missing, schema ? &*schema : nullptr);

  EngineSettings s;
  s.nrun = a.nrun;
  s.burn = a.burn_opt->count() ? a.burn : a.nrun / 2;
  s.thin = a.thin;
  s.K = a.k;
  s.aalpha = a.aalpha;
  s.balpha = a.balpha;
  s.m = a.m;
  s.seed = a.seed;
  s.silent = a.silent;
  s.progress = &out;

  std::vector<std::string> vars;
  std::optional<DisallowedPatternSet> mcz;
  if (synthesis) {
    if (data.has_missing()) throw DataError("synthesis needs a fully observed dataset; " + a.data + " has missing cells");
    if (a.vars_opt->count()) {
      vars = split_list(a.vars);
      if (vars.empty()) throw ConfigError("--vars is empty");
    } else {
      for (const auto& v : data.schema().variables()) vars.push_back(v.name);
    }
    for (const auto& v : vars) {
      if (!data.schema().find(v)) throw ConfigError("unknown variable '" + v + "' in --vars");
    }
  } else if (!a.mcz.empty()) {
    if (!a.nmax_opt->count()) throw ConfigError("--mcz needs --nmax");
    mcz = load_mcz(a.mcz, data.schema(), a.missing);
  } else if (a.nmax_opt->count()) {
    throw ConfigError("--nmax needs --mcz");
  }

  auto run_one = [&](const EngineSettings& settings) {
    if (synthesis) return synthesize(data, vars, settings);
    if (mcz) return impute_zeros(data, *mcz, a.nmax, settings);
    return impute_nozeros(data, settings);
  };

  // Extra chains run silently on their own threads with derived seeds.
  std::vector<TraceLog> extra(static_cast<std::size_t>(a.chains - 1));
  std::vector<std::exception_ptr> failures(extra.size());
  std::vector<std::thread> threads;
  for (std::size_t c = 0; c < extra.size(); ++c) {
    EngineSettings sc = s;
    sc.silent = true;
    sc.progress = nullptr;
    sc.seed = Rng(a.seed).split(c + 2).seed();
    threads.emplace_back([&, sc, c] {
      try {
        extra[c] = run_one(sc).trace;
      } catch (...) {
        failures[c] = std::current_exception();
      }
    });
  }
  std::exception_ptr main_failure;
  RunOutput res;
  try {
    res = run_one(s);
  } catch (...) {
    main_failure = std::current_exception();
  }
  for (auto& t : threads) t.join();
  if (main_failure) std::rethrow_exception(main_failure);
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  auto report = make_report(res, s);
  report["config"] = engine_echo(a, s, synthesis, vars);
  if (mcz) report["nmax"] = a.nmax;
  if (a.chains > 1) report["chains"] = a.chains;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (a.timing) report["runtime_seconds"] = seconds;
  write_run_output(res, a.out, report, a.missing);

  if (a.chains > 1) {
    std::string merged = "chain,iter,kstar,alpha,nmis\n";
    std::vector<const TraceLog*> all{&res.trace};
    for (const auto& t : extra) all.push_back(&t);
    for (std::size_t c = 0; c < all.size(); ++c) {
      const auto body = format_trace_csv(*all[c]);
      std::size_t pos = body.find('\n') + 1;
      while (pos < body.size()) {
        const auto end = body.find('\n', pos);
        merged += std::to_string(c + 1) + "," + body.substr(pos, end - pos) + "\n";
        pos = end + 1;
      }
    }
    csv::write_file(a.out + "_trace_chains.csv", merged);
  }
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  if (a.timing) err << "elapsed: " << seconds << " s\n";
  if (!a.silent) {
    out << "wrote " << res.datasets.size() << (synthesis ? " synthetic" : " imputed") << " datasets with prefix "
        << a.out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// pool

struct PoolArgs {
  std::string inputs, probs, glm, family, method, schema, out, missing = std::string(kDefaultMissingToken);
};

int cmd_pool(const PoolArgs& a, std::ostream& out, std::ostream& err) {
  const auto method = parse_combine_method(a.method);
  if (a.probs.empty() == a.glm.empty()) throw ConfigError("give exactly one of --probs and --glm");
  std::optional<GlmFamily> family;
  std::optional<GlmFormula> formula;
  std::optional<std::vector<VarTuple>> varlist;
  if (!a.glm.empty()) {
    if (a.family == "logistic") family = GlmFamily::Logistic;
    else if (a.family == "multinomial") family = GlmFamily::Multinomial;
    else throw ConfigError("--family must be logistic or multinomial");
    formula = parse_formula(a.glm);
  } else {
    if (!a.family.empty()) throw ConfigError("--family applies to --glm only");
    varlist = parse_varlist(a.probs);
  }
  std::optional<Schema> schema;
  if (!a.schema.empty()) schema = load_schema_json(a.schema);
  const auto paths = expand_glob(a.inputs);
  const auto datasets = load_many(paths, a.missing, schema ? &*schema : nullptr);
  if (datasets.size() < 2) throw ConfigError("pooling needs at least 2 datasets; '" + a.inputs + "' matched 1");

  std::string text, table_csv;
  if (varlist) {
    for (const auto& tuple : *varlist) {
      for (const auto& name : tuple) {
        if (!datasets.front().schema().find(name)) throw ConfigError("unknown variable '" + name + "' in --probs");
      }
    }
    const auto pooled = pool_estimated_probs(compute_probs(datasets, *varlist), method);
    text = format_probs_text(pooled);
    table_csv = format_probs_csv(pooled);
    for (const auto& t : pooled) {
      for (const auto& r : t.rows) {
        if (r.variance_clamped) {
          err << "warning: fully synthetic variance raised to its floor for " << r.label << '\n';
        }
      }
    }
  } else {
    const auto& sch = datasets.front().schema();
    if (!sch.find(formula->response)) throw ConfigError("unknown response '" + formula->response + "'");
    for (const auto& p : formula->predictors) {
      if (!sch.find(p)) throw ConfigError("unknown predictor '" + p + "'");
    }
    std::vector<GlmFit> fits;
    for (std::size_t l = 0; l < datasets.size(); ++l) {
      fits.push_back(fit_glm(datasets[l], *formula, *family));
      for (const auto& w : fits.back().warnings) err << "warning: " << paths[l] << ": " << w << '\n';
    }
    const auto pooled = pool_fitted_glms(fits, method);
    text = format_glm_text(pooled);
    table_csv = format_glm_csv(pooled);
    for (const auto& r : pooled.rows) {
      if (r.variance_clamped) err << "warning: fully synthetic variance raised to its floor for " << r.label << '\n';
    }
  }
  out << text;
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    csv::write_file(a.out + ".csv", table_csv);
    csv::write_file(a.out + ".txt", text);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string trace, compare, obs, inputs, mode = "imp", out, schema, missing = std::string(kDefaultMissingToken);
  std::size_t nrun = 0, burn = 0, thin = 0;
  int k = 0;
  CLI::Option *nrun_opt = nullptr, *burn_opt = nullptr, *thin_opt = nullptr, *k_opt = nullptr;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
  const auto trace = parse_trace_csv(csv::read_file(a.trace));
  std::size_t nrun = a.nrun, burn = a.burn, thin = a.thin;
  // Unspecified chain settings are read off the kept iterations.
  if (!a.thin_opt->count()) {
    if (trace.size() < 2) throw ConfigError("--thin is needed for a trace with fewer than 2 points");
    thin = trace.iter[1] - trace.iter[0];
  }
  if (!a.nrun_opt->count()) {
    if (trace.size() == 0) throw ConfigError("trace is empty");
    nrun = trace.iter.back();
  }
  if (!a.burn_opt->count()) {
    if (trace.size() == 0 || trace.iter.front() < thin) throw ConfigError("cannot infer --burn from the trace");
    burn = trace.iter.front() - thin;
  }
  const std::string prefix = a.out.empty() ? strip_suffix(a.trace, "_trace.csv") : a.out;
  if (fs::path(prefix).has_parent_path()) fs::create_directories(fs::path(prefix).parent_path());

  const auto diag = kstar_mcmc_diag(trace, nrun, burn, thin, a.k_opt->count() ? std::optional<int>(a.k) : std::nullopt);
  csv::write_file(prefix + "_kstar_trace.svg", diag.trace.svg);
  csv::write_file(prefix + "_kstar_trace.csv", diag.trace.csv);
  csv::write_file(prefix + "_kstar_acf.svg", diag.acf.svg);
  csv::write_file(prefix + "_kstar_acf.csv", diag.acf.csv);
  out << "kstar: mean = " << diag.summary.mean << ", min = " << diag.summary.min << ", max = " << diag.summary.max
      << " (" << diag.summary.points << " points)\n";
  for (const auto& w : diag.warnings) err << "warning: " << w << '\n';

  if (!a.compare.empty()) {
    if (a.obs.empty() || a.inputs.empty()) throw ConfigError("--compare needs --obs and --inputs");
    CompareMode mode;
    if (a.mode == "imp") mode = CompareMode::Imputation;
    else if (a.mode == "syn") mode = CompareMode::Synthesis;
    else throw ConfigError("--mode must be imp or syn");
    std::optional<Schema> schema;
    if (!a.schema.empty()) schema = load_schema_json(a.schema);
    std::vector<std::string> paths{a.obs};
    for (auto& p : expand_glob(a.inputs)) paths.push_back(p);
    auto all = load_many(paths, a.missing, schema ? &*schema : nullptr);
    const std::span<const CategoricalDataset> completed(all.data() + 1, all.size() - 1);
    for (const auto& var : split_list(a.compare)) {
      if (!all.front().schema().find(var)) throw ConfigError("unknown variable '" + var + "' in --compare");
      const auto cmp = marginal_compare(all.front(), completed, var, mode);
      csv::write_file(prefix + "_compare_" + var + ".svg", cmp.plot.svg);
      csv::write_file(prefix + "_compare_" + var + ".csv", cmp.plot.csv);
      out << format_comparison_text(cmp);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string truth, mcz, out, complete_out, schema_out, missing = std::string(kDefaultMissingToken);
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double mcar = 0.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (!(a.mcar >= 0.0 && a.mcar <= 1.0)) throw ConfigError("--mcar must lie in [0, 1]");
  const auto tf = load_truth_json(a.truth);
  std::optional<DisallowedPatternSet> mcz;
  if (!a.mcz.empty()) mcz = load_mcz(a.mcz, tf.schema, a.missing);
  const auto complete = generate_from_mixture(tf.truth, a.n, tf.schema, a.seed, mcz ? &*mcz : nullptr);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  if (!a.complete_out.empty()) write_csv(complete, a.complete_out, a.missing);
  if (!a.schema_out.empty()) write_schema_json(tf.schema, a.schema_out);
  // A separate substream keeps the complete records independent of --mcar.
  const auto data = a.mcar > 0.0 ? inject_mcar(complete, a.mcar, Rng(a.seed).split(1).seed()) : complete;
  write_csv(data, a.out, a.missing);
  out << "wrote " << a.n << " records to " << a.out << " (" << data.missing_count() << " missing cells)\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple imputation and synthesis of categorical data with a Dirichlet-process latent class model",
               "dpmpm"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  EngineArgs imp_args, syn_args;
  auto* imp = app.add_subcommand("impute", "multiply impute missing cells");
  add_engine_options(imp, imp_args, false);
  auto* syn = app.add_subcommand("synthesize", "generate partially or fully synthetic datasets");
  add_engine_options(syn, syn_args, true);

  PoolArgs pool_args;
  auto* pool = app.add_subcommand("pool", "pool estimates across completed datasets");
  pool->add_option("--inputs", pool_args.inputs, "glob of completed CSVs")->required();
  pool->add_option("--probs", pool_args.probs, "tables, e.g. \"MAR;SEX;MAR,WKL\"");
  pool->add_option("--glm", pool_args.glm, "formula, e.g. \"SEX~WKL+MAR\"");
  pool->add_option("--family", pool_args.family, "logistic or multinomial");
  pool->add_option("--method", pool_args.method, "imputation, synthesis_full or synthesis_partial")->required();
  pool->add_option("--schema", pool_args.schema, "schema JSON sidecar fixing the levels");
  pool->add_option("--missing-token", pool_args.missing, "missing-value token")->capture_default_str();
  pool->add_option("--out", pool_args.out, "write <out>.csv and <out>.txt");

  DiagnoseArgs diag_args;
  auto* diag = app.add_subcommand("diagnose", "kstar trace diagnostics and marginal comparisons");
  diag->add_option("--trace", diag_args.trace, "trace CSV")->required();
  diag_args.k_opt = diag->add_option("--k", diag_args.k, "K used for the run");
  diag_args.nrun_opt = diag->add_option("--nrun", diag_args.nrun, "total sweeps (default: from the trace)");
  diag_args.burn_opt = diag->add_option("--burn", diag_args.burn, "burn-in (default: from the trace)");
  diag_args.thin_opt = diag->add_option("--thin", diag_args.thin, "thinning (default: from the trace)");
  diag->add_option("--compare", diag_args.compare, "comma-separated variables to compare");
  diag->add_option("--obs", diag_args.obs, "observed data CSV");
  diag->add_option("--inputs", diag_args.inputs, "glob of completed CSVs");
  diag->add_option("--mode", diag_args.mode, "imp or syn")->capture_default_str();
  diag->add_option("--out", diag_args.out, "output prefix (default: from the trace path)");
  diag->add_option("--schema", diag_args.schema, "schema JSON sidecar fixing the levels");
  diag->add_option("--missing-token", diag_args.missing, "missing-value token")->capture_default_str();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "draw a fixture from a known mixture");
  sim->add_option("--truth", sim_args.truth, "truth JSON (schema, weights, components)")->required();
  sim->add_option("--n", sim_args.n, "records")->required();
  sim->add_option("--seed", sim_args.seed, "random seed")->capture_default_str();
  sim->add_option("--mcar", sim_args.mcar, "per-cell missingness rate")->capture_default_str();
  sim->add_option("--mcz", sim_args.mcz, "structural zeros; matching records are redrawn");
  sim->add_option("--out", sim_args.out, "output CSV")->required();
  sim->add_option("--complete-out", sim_args.complete_out, "also write the records before masking");
  sim->add_option("--schema-out", sim_args.schema_out, "also write the schema JSON");
  sim->add_option("--missing-token", sim_args.missing, "missing-value token")->capture_default_str();

  try {
    auto args = expand_config(raw);
    std::vector<const char*> argv{"dpmpm"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    if (imp->parsed()) return cmd_engine(imp_args, false, out, err);
    if (syn->parsed()) return cmd_engine(syn_args, true, out, err);
    if (pool->parsed()) return cmd_pool(pool_args, out, err);
    if (diag->parsed()) return cmd_diagnose(diag_args, out, err);
    if (sim->parsed()) return cmd_simulate(sim_args, out);
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace dpmpm::cli
