#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dpmpm::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dpmpm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string data(const char* name) { return (fs::path(DPMPM_DATA_DIR) / name).string(); }

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

// Simulated fixture with 30% MCAR plus its complete version.
void fixture(const fs::path& dir, int n = 300) {
  const auto r = run({"simulate", "--truth", data("acs2_truth.json"), "--n", std::to_string(n), "--seed", "7",
                      "--mcar", "0.3", "--out", (dir / "obs.csv").string(), "--complete-out",
                      (dir / "full.csv").string(), "--schema-out", (dir / "schema.json").string()});
  REQUIRE(r.code == 0);
}

std::vector<std::string> impute_args(const fs::path& dir, const std::string& prefix) {
  return {"impute", "--data", (dir / "obs.csv").string(), "--nrun", "40", "--burn", "20", "--thin", "5", "--k", "8",
          "--m", "3", "--seed", "11", "--silent", "--out", (dir / prefix).string()};
}

}  // namespace

TEST_CASE("simulate, impute, pool and diagnose") {
  const auto dir = scratch("flow");
  fixture(dir);
  CHECK(slurp(dir / "obs.csv").find("NA") != std::string::npos);
  CHECK(slurp(dir / "full.csv").find("NA") == std::string::npos);

  auto r = run(impute_args(dir, "run"));
  REQUIRE(r.code == 0);
  for (const char* f : {"run_imp1.csv", "run_imp2.csv", "run_imp3.csv", "run_trace.csv", "run_report.json"})
    CHECK(fs::exists(dir / f));
  const auto report = nlohmann::json::parse(slurp(dir / "run_report.json"));
  CHECK(report["trace_length"] == 4);
  CHECK(report["config"]["k"] == 8);

  r = run({"pool", "--inputs", (dir / "run_imp*.csv").string(), "--probs", "MAR;SEX;MAR,WKL", "--method",
           "imputation", "--schema", (dir / "schema.json").string(), "--out", (dir / "probs").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Estimate") != std::string::npos);
  const auto probs = slurp(dir / "probs.csv");
  CHECK(std::count(probs.begin(), probs.end(), '\n') == 1 + 5 + 2 + 15);
  CHECK(slurp(dir / "probs.txt") == r.out);

  r = run({"pool", "--inputs", (dir / "run_imp*.csv").string(), "--glm", "SEX~WKL+MAR", "--family", "logistic",
           "--method", "imputation", "--out", (dir / "glm").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("(Intercept)") != std::string::npos);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 8);

  r = run({"diagnose", "--trace", (dir / "run_trace.csv").string(), "--k", "8", "--compare", "WKL,MAR", "--obs",
           (dir / "obs.csv").string(), "--inputs", (dir / "run_imp*.csv").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"run_kstar_trace.svg", "run_kstar_trace.csv", "run_kstar_acf.svg", "run_kstar_acf.csv",
                        "run_compare_WKL.svg", "run_compare_WKL.csv", "run_compare_MAR.svg"})
    CHECK(fs::exists(dir / f));
}

TEST_CASE("synthesis and structural zeros through the CLI") {
  const auto dir = scratch("syn");
  fixture(dir);
  auto r = run({"synthesize", "--data", (dir / "full.csv").string(), "--vars", "MAR,WKL", "--nrun", "30", "--thin", "5", "--k",
                "6", "--m", "2", "--silent", "--out", (dir / "syn").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "syn_syn2.csv"));

  r = run({"synthesize", "--data", (dir / "obs.csv").string(), "--nrun", "30", "--thin", "5", "--k", "6", "--m", "2", "--silent",
           "--out", (dir / "bad").string()});
  CHECK(r.code == 3);
  r = run({"synthesize", "--data", (dir / "full.csv").string(), "--vars", "BOGUS", "--nrun", "30", "--thin", "5", "--k", "6", "--m",
           "2", "--silent", "--out", (dir / "bad").string()});
  CHECK(r.code == 2);

  r = run({"simulate", "--truth", data("acs1_truth.json"), "--n", "200", "--seed", "3", "--mcar", "0.3", "--mcz",
           data("acs1_mcz.csv"), "--out", (dir / "acs1.csv").string()});
  REQUIRE(r.code == 0);
  auto zargs = std::vector<std::string>{"impute", "--data", (dir / "acs1.csv").string(), "--mcz", data("acs1_mcz.csv"),
                                        "--nmax", "200000", "--nrun", "20", "--thin", "5", "--k", "6", "--m", "2", "--silent",
                                        "--out", (dir / "z").string()};
  r = run(zargs);
  CHECK(r.code == 0);
  zargs.erase(zargs.begin() + 5, zargs.begin() + 7);
  CHECK(run(zargs).code == 2);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  fixture(dir, 60);
  auto args = impute_args(dir, "x");
  args[std::find(args.begin(), args.end(), "--m") - args.begin() + 1] = "5";
  CHECK(run(args).code == 2);

  CHECK(run({"simulate", "--truth", data("acs2_truth.json"), "--n", "10", "--mcar", "1.5", "--out",
             (dir / "s.csv").string()})
            .code == 2);
  CHECK(run({"pool", "--inputs", (dir / "obs.csv").string(), "--probs", "MAR", "--method", "bogus"}).code == 2);
  CHECK(run({"impute", "--data", (dir / "obs.csv").string()}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"impute", "--data", (dir / "missing.csv").string(), "--nrun", "10", "--k", "3", "--m", "1", "--out",
             (dir / "y").string()})
            .code == 3);

  std::ofstream(dir / "odd.csv") << "MAR,SEX,WKL\nMarried,Unknown,1-5 years ago\n";
  CHECK(run({"pool", "--inputs", (dir / "odd.csv").string(), "--probs", "SEX", "--method", "imputation",
             "--schema", (dir / "schema.json").string()})
            .code == 3);

  auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"impute", "--help"}).code == 0);
}

TEST_CASE("config file with explicit overrides") {
  const auto dir = scratch("config");
  fixture(dir, 80);
  nlohmann::json cfg{{"data", (dir / "obs.csv").string()}, {"nrun", 30}, {"thin", 5}, {"k", 5}, {"m", 2}, {"seed", 4},
                     {"silent", true}, {"out", (dir / "c").string()}};
  std::ofstream(dir / "run.json") << cfg.dump();
  auto r = run({"impute", "--config", (dir / "run.json").string(), "--k", "7"});
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "c_report.json"));
  CHECK(report["K"] == 7);
  CHECK(report["seed"] == 4);
  CHECK(report["nrun"] == 30);
  CHECK(report["burn"] == 15);
  CHECK(report["config"]["k"] == 7);
  CHECK(report["config"]["m"] == 2);

  std::ofstream(dir / "broken.json") << "{";
  CHECK(run({"impute", "--config", (dir / "broken.json").string()}).code == 2);
}

TEST_CASE("reruns are byte identical") {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  for (const auto& dir : {a, b}) {
    fixture(dir);
    REQUIRE(run(impute_args(dir, "run")).code == 0);
    REQUIRE(run({"diagnose", "--trace", (dir / "run_trace.csv").string(), "--k", "8"}).code == 0);
  }
  const auto ta = tree(a), tb = tree(b);
  REQUIRE(ta.size() == tb.size());
  for (const auto& [name, bytes] : ta) {
    INFO(name);
    if (name == "run_report.json") {
      // Paths differ between the two directories; compare everything else.
      auto ja = nlohmann::json::parse(bytes), jb = nlohmann::json::parse(tb.at(name));
      ja.erase("config");
      jb.erase("config");
      CHECK(ja == jb);
    } else {
      CHECK(bytes == tb.at(name));
    }
  }
}
