#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "dpmpm/errors.hpp"
#include "dpmpm/pooling.hpp"
#include "oracle.hpp"

using namespace dpmpm;

namespace {

Schema bin(const std::string& name, const std::string& a, const std::string& b) {
  return Schema(std::vector<Variable>{{name, {a, b}}});
}

// Builds a dataset of one response column and optional predictor columns
// from repeated (codes, count) blocks.
CategoricalDataset blocks(const Schema& schema, const std::vector<std::pair<std::vector<Code>, int>>& spec) {
  std::vector<Code> cells;
  std::size_t n = 0;
  for (const auto& [codes, count] : spec) {
    for (int r = 0; r < count; ++r) cells.insert(cells.end(), codes.begin(), codes.end());
    n += static_cast<std::size_t>(count);
  }
  return CategoricalDataset(schema, n, std::move(cells));
}

}  // namespace

TEST_CASE("combining rules on the three-dataset hand example") {
  const std::vector<double> q{1, 2, 3}, u{0.5, 0.5, 0.5};
  const auto imp = combine(q, u, CombineMethod::Imputation);
  CHECK(imp.estimate == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(imp.between == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(imp.within == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(imp.total_variance == doctest::Approx(11.0 / 6.0).epsilon(1e-14));
  CHECK(imp.df == doctest::Approx(3.78125).epsilon(1e-14));
  CHECK(imp.std_error == doctest::Approx(std::sqrt(11.0 / 6.0)).epsilon(1e-14));
  CHECK(imp.statistic == doctest::Approx(2.0 / std::sqrt(11.0 / 6.0)).epsilon(1e-14));

  const auto part = combine(q, u, CombineMethod::SynthesisPartial);
  CHECK(part.total_variance == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(part.df == doctest::Approx(12.5).epsilon(1e-14));

  const auto fully = combine(q, u, CombineMethod::SynthesisFull);
  CHECK(fully.total_variance == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(fully.df == doctest::Approx(0.78125).epsilon(1e-14));
  CHECK_FALSE(fully.variance_clamped);

  const double t = student_t_quantile(0.975, 3.78125);
  CHECK(imp.ci_lower == doctest::Approx(2.0 - t * imp.std_error).epsilon(1e-14));
  CHECK(imp.ci_upper == doctest::Approx(2.0 + t * imp.std_error).epsilon(1e-14));
}

TEST_CASE("degenerate between and within variances") {
  const std::vector<double> same{0.4, 0.4, 0.4, 0.4}, u{0.01, 0.01, 0.01, 0.01};
  for (auto method : {CombineMethod::Imputation, CombineMethod::SynthesisPartial}) {
    const auto r = combine(same, u, method);
    CHECK(r.total_variance == doctest::Approx(0.01));
    CHECK(r.df == kDfCap);
    CHECK(r.std_error == doctest::Approx(0.1));
  }
  const std::vector<double> q{1, 2, 3, 4}, zero{0, 0, 0, 0};
  const auto r = combine(q, zero, CombineMethod::Imputation);
  CHECK(r.total_variance == doctest::Approx(1.25 * 5.0 / 3.0));
  CHECK(r.df == doctest::Approx(3.0));

  const auto clamped = combine(std::vector<double>{1, 1.01, 0.99}, std::vector<double>{1, 1, 1}, CombineMethod::SynthesisFull);
  CHECK(clamped.variance_clamped);
  CHECK(clamped.total_variance == doctest::Approx(1.0 / 3.0));

  const auto flat = combine(std::vector<double>{0, 0}, std::vector<double>{0, 0}, CombineMethod::Imputation);
  CHECK(std::isnan(flat.statistic));

  CHECK_THROWS_AS(combine(std::vector<double>{1}, std::vector<double>{1}, CombineMethod::Imputation), ConfigError);
  CHECK_THROWS_AS(combine(std::vector<double>{1, 2}, std::vector<double>{1}, CombineMethod::Imputation), ContractViolation);
  CHECK_THROWS_AS(parse_combine_method("bogus"), ConfigError);
  CHECK(parse_combine_method("synthesis_partial") == CombineMethod::SynthesisPartial);
  CHECK(to_string(CombineMethod::SynthesisFull) == "synthesis_full");
}

TEST_CASE("combine matches the long double reference on random vectors") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 2 + rep % 9;
    std::vector<double> q(m), u(m);
    for (std::size_t l = 0; l < m; ++l) {
      q[l] = unif(gen) * 4 - 2;
      u[l] = unif(gen) * 0.5;
    }
    for (int method = 0; method < 3; ++method) {
      const auto ref = oracle::combine_reference(q, u, method);
      const auto got = combine(q, u, static_cast<CombineMethod>(method));
      REQUIRE(std::abs(got.total_variance - static_cast<double>(ref.T)) <= 1e-12 * std::max(1.0, static_cast<double>(ref.T)));
      REQUIRE(std::abs(got.df - static_cast<double>(ref.df)) <= 1e-12 * std::max(1.0, static_cast<double>(ref.df)));
    }
  }
}

TEST_CASE("t quantiles") {
  CHECK(student_t_quantile(0.975, kDfCap) == doctest::Approx(1.959964).epsilon(1e-6));
  const std::vector<std::pair<double, double>> table{
      {1, 12.7062}, {2, 4.302653}, {5, 2.570582}, {10, 2.228139}, {30, 2.042272}};
  for (auto [df, t] : table) CHECK(student_t_quantile(0.975, df) == doctest::Approx(t).epsilon(1e-5));
  CHECK(student_t_quantile(0.025, 7.5) == doctest::Approx(-student_t_quantile(0.975, 7.5)));
}

TEST_CASE("cell probabilities") {
  const auto schema = bin("B", "no", "yes");
  const CategoricalDataset d(schema, 4, {0, 0, 1, 0});
  const std::vector<CategoricalDataset> ds{d};
  const auto tables = compute_probs(ds, {{"B"}});
  REQUIRE(tables.size() == 1);
  REQUIRE(tables[0].cells.size() == 2);
  CHECK(tables[0].cells[0].levels == std::vector<std::string>{"no"});
  CHECK(tables[0].cells[0].estimates[0].q == 0.75);
  CHECK(tables[0].cells[0].estimates[0].u == 0.046875);
  CHECK(tables[0].cells[1].estimates[0].q == 0.25);
  CHECK(tables[0].cells[1].estimates[0].u == 0.046875);
  CHECK_THROWS_AS(compute_probs(ds, {{"BOGUS"}}), SchemaError);

  const auto tf = load_truth_json(std::filesystem::path(DPMPM_DATA_DIR) / "acs2_truth.json");
  std::vector<CategoricalDataset> many;
  for (std::uint64_t s = 1; s <= 3; ++s) many.push_back(generate_from_mixture(tf.truth, 200, tf.schema, s));
  const auto acs = compute_probs(many, parse_varlist("MAR;SEX;MAR,WKL"));
  REQUIRE(acs.size() == 3);
  CHECK(acs[0].cells.size() == 5);
  CHECK(acs[1].cells.size() == 2);
  CHECK(acs[2].cells.size() == 15);
  CHECK(acs[2].cells[1].levels == std::vector<std::string>{"Divorced", "Over 5 years ago or never worked"});
  for (const auto& table : acs) {
    for (std::size_t l = 0; l < many.size(); ++l) {
      double total = 0;
      for (const auto& cell : table.cells) total += cell.estimates[l].q;
      CHECK(total == doctest::Approx(1.0));
    }
  }

  // A level nobody takes still gets a row.
  const Schema three(std::vector<Variable>{{"C", {"a", "b", "c"}}});
  const std::vector<CategoricalDataset> sparse{CategoricalDataset(three, 3, {0, 1, 0})};
  const auto t3 = compute_probs(sparse, {{"C"}});
  REQUIRE(t3[0].cells.size() == 3);
  CHECK(t3[0].cells[2].estimates[0].q == 0.0);
  CHECK(t3[0].cells[2].estimates[0].u == 0.0);
}

TEST_CASE("pooled probability tables") {
  const auto tf = load_truth_json(std::filesystem::path(DPMPM_DATA_DIR) / "acs2_truth.json");
  const auto one = generate_from_mixture(tf.truth, 300, tf.schema, 4);
  const std::vector<CategoricalDataset> same{one, one, one};
  const auto pooled = pool_estimated_probs(compute_probs(same, {{"MAR"}}), CombineMethod::Imputation);
  REQUIRE(pooled[0].rows.size() == 5);
  CHECK(pooled[0].levels[0] == std::vector<std::string>{"Divorced"});
  CHECK(pooled[0].levels[4] == std::vector<std::string>{"Widowed"});
  const auto single = compute_probs(std::vector<CategoricalDataset>{one}, {{"MAR"}});
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(pooled[0].rows[r].std_error == doctest::Approx(std::sqrt(single[0].cells[r].estimates[0].u)).epsilon(1e-14));
    CHECK(pooled[0].rows[r].df == kDfCap);
  }

  std::vector<CategoricalDataset> many;
  for (std::uint64_t s = 1; s <= 4; ++s) many.push_back(generate_from_mixture(tf.truth, 200, tf.schema, s));
  const auto a = pool_estimated_probs(compute_probs(many, {{"MAR", "WKL"}}), CombineMethod::SynthesisPartial);
  std::reverse(many.begin(), many.end());
  std::swap(many[0], many[2]);
  const auto b = pool_estimated_probs(compute_probs(many, {{"MAR", "WKL"}}), CombineMethod::SynthesisPartial);
  for (std::size_t r = 0; r < a[0].rows.size(); ++r) {
    CHECK(a[0].rows[r].estimate == doctest::Approx(b[0].rows[r].estimate).epsilon(1e-15));
    CHECK(a[0].rows[r].std_error == doctest::Approx(b[0].rows[r].std_error).epsilon(1e-12));
  }

  const auto text = format_probs_text(pooled);
  CHECK(text.find("Estimate Std.Error") != std::string::npos);
  CHECK(text.find("Never married or age<15") != std::string::npos);
  const auto csv = format_probs_csv(pooled);
  CHECK(csv.rfind("Variables,Levels,Estimate,Std.Error,Df,Statistic,CI_Lower,CI_Upper\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("varlist and formula parsing") {
  CHECK(parse_varlist("MAR;SEX;MAR,WKL") == std::vector<VarTuple>{{"MAR"}, {"SEX"}, {"MAR", "WKL"}});
  CHECK(parse_varlist(" MAR , WKL ") == std::vector<VarTuple>{{"MAR", "WKL"}});
  const auto f = parse_formula("SEX ~ WKL + MAR");
  CHECK(f.response == "SEX");
  CHECK(f.predictors == std::vector<std::string>{"WKL", "MAR"});
  CHECK(parse_formula("MAR~1").predictors.empty());
  CHECK_THROWS_AS(parse_formula("SEX"), ConfigError);
  CHECK_THROWS_AS(parse_formula("SEX~A++B"), ConfigError);
}

TEST_CASE("logistic regression closed forms") {
  const auto schema = bin("Y", "n", "y");
  const auto fit = fit_logistic(blocks(schema, {{{1}, 30}, {{0}, 70}}), "Y", {});
  REQUIRE(fit.coefficients.size() == 1);
  CHECK(fit.converged);
  CHECK(fit.coefficients[0].label == "(Intercept)");
  CHECK(fit.coefficients[0].q == doctest::Approx(std::log(30.0 / 70.0)).epsilon(1e-10));
  CHECK(fit.coefficients[0].u == doctest::Approx(1.0 / 30 + 1.0 / 70).epsilon(1e-8));

  const auto half = fit_logistic(blocks(schema, {{{1}, 25}, {{0}, 25}}), "Y", {});
  CHECK(std::abs(half.coefficients[0].q) < 1e-12);

  // 2x2 table: X=0 has a successes, b failures; X=1 has c, d.
  const Schema two(std::vector<Variable>{{"Y", {"n", "y"}}, {"X", {"p", "q"}}});
  const int a = 12, b = 20, c = 31, d = 9;
  const auto odds = fit_logistic(blocks(two, {{{1, 0}, a}, {{0, 0}, b}, {{1, 1}, c}, {{0, 1}, d}}), "Y", {"X"});
  REQUIRE(odds.coefficients.size() == 2);
  CHECK(odds.coefficients[1].label == "Xq");
  CHECK(odds.coefficients[0].q == doctest::Approx(std::log(double(a) / b)).epsilon(1e-10));
  CHECK(odds.coefficients[1].q == doctest::Approx(std::log(double(b) * c / (double(a) * d))).epsilon(1e-10));
  CHECK(odds.coefficients[1].u == doctest::Approx(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).epsilon(1e-8));

  const Schema tri(std::vector<Variable>{{"Y", {"a", "b", "c"}}});
  CHECK_THROWS_AS(fit_logistic(blocks(tri, {{{0}, 3}, {{1}, 3}}), "Y", {}), ConfigError);
  CHECK_THROWS_AS(fit_logistic(blocks(two, {{{0, 0}, 3}, {{1, 0}, 3}}), "Y", {"X"}), DataError);
  CHECK_THROWS_AS(fit_logistic(blocks(two, {{{0, 0}, 3}, {{1, 1}, 3}}), "Y", {"Y"}), ConfigError);
}

TEST_CASE("separation is reported") {
  const Schema two(std::vector<Variable>{{"Y", {"n", "y"}}, {"X", {"p", "q"}}});
  const auto fit = fit_logistic(blocks(two, {{{0, 0}, 10}, {{1, 0}, 5}, {{1, 1}, 10}}), "Y", {"X"});
  CHECK(fit.separation);
  REQUIRE_FALSE(fit.warnings.empty());
  CHECK(fit.warnings[0].find("separated") != std::string::npos);
  CHECK(std::isfinite(fit.coefficients[1].q));
}

TEST_CASE("multinomial regression") {
  const Schema tri(std::vector<Variable>{{"Y", {"a", "b", "c"}}});
  const auto fit = fit_multinomial(blocks(tri, {{{0}, 20}, {{1}, 50}, {{2}, 30}}), "Y", {});
  REQUIRE(fit.coefficients.size() == 2);
  CHECK(fit.coefficients[0].label == "b (Intercept)");
  CHECK(fit.coefficients[1].label == "c (Intercept)");
  CHECK(fit.coefficients[0].q == doctest::Approx(std::log(50.0 / 20.0)).epsilon(1e-10));
  CHECK(fit.coefficients[1].q == doctest::Approx(std::log(30.0 / 20.0)).epsilon(1e-10));
  CHECK(fit.coefficients[0].u == doctest::Approx(1.0 / 20 + 1.0 / 50).epsilon(1e-8));

  const Schema two(std::vector<Variable>{{"Y", {"n", "y"}}, {"X", {"p", "q"}}});
  const auto data = blocks(two, {{{1, 0}, 12}, {{0, 0}, 20}, {{1, 1}, 31}, {{0, 1}, 9}});
  const auto lg = fit_logistic(data, "Y", {"X"});
  const auto mn = fit_multinomial(data, "Y", {"X"});
  REQUIRE(mn.coefficients.size() == lg.coefficients.size());
  for (std::size_t c = 0; c < lg.coefficients.size(); ++c) {
    CHECK(std::abs(mn.coefficients[c].q - lg.coefficients[c].q) < 1e-8);
    CHECK(std::abs(mn.coefficients[c].u - lg.coefficients[c].u) < 1e-8);
  }
  CHECK(mn.coefficients[1].label == "y Xq");
}

TEST_CASE("multinomial fit is a stationary point") {
  const auto tf = load_truth_json(std::filesystem::path(DPMPM_DATA_DIR) / "acs2_truth.json");
  const auto data = generate_from_mixture(tf.truth, 600, tf.schema, 9);
  const auto fit = fit_multinomial(data, "MAR", {"SEX"});
  CHECK(fit.converged);
  CHECK(fit.max_abs_score < 1e-8);
  REQUIRE(fit.coefficients.size() == 8);
  CHECK(fit.coefficients[0].label == "Married (Intercept)");
  CHECK(fit.coefficients[1].label == "Married SEXMale");

  // With a single binary predictor the model is saturated, so each
  // coefficient is a closed-form log odds from the cell counts.
  const auto mar = tf.schema.index_of("MAR"), sex = tf.schema.index_of("SEX");
  double count[5][2] = {};
  for (std::size_t i = 0; i < data.rows(); ++i) count[data.at(i, mar)][data.at(i, sex)] += 1;
  for (int c = 1; c < 5; ++c) {
    const auto& icpt = fit.coefficients[static_cast<std::size_t>(2 * (c - 1))];
    const auto& slope = fit.coefficients[static_cast<std::size_t>(2 * (c - 1) + 1)];
    CHECK(icpt.q == doctest::Approx(std::log(count[c][0] / count[0][0])).epsilon(1e-8));
    CHECK(slope.q == doctest::Approx(std::log(count[c][1] * count[0][0] / (count[c][0] * count[0][1]))).epsilon(1e-8));
  }
}

TEST_CASE("pooled GLM tables") {
  const auto tf = load_truth_json(std::filesystem::path(DPMPM_DATA_DIR) / "acs2_truth.json");
  const auto data = generate_from_mixture(tf.truth, 500, tf.schema, 2);
  const auto f = parse_formula("SEX~WKL+MAR");
  const auto fit = fit_glm(data, f, GlmFamily::Logistic);
  REQUIRE(fit.coefficients.size() == 7);
  CHECK(fit.coefficients[1].label == "WKLOver 5 years ago or never worked");
  CHECK(fit.coefficients[3].label == "MARMarried");

  const auto pooled = pool_fitted_glms({fit, fit, fit}, CombineMethod::Imputation);
  REQUIRE(pooled.rows.size() == 7);
  for (std::size_t c = 0; c < 7; ++c) {
    CHECK(pooled.rows[c].estimate == doctest::Approx(fit.coefficients[c].q).epsilon(1e-14));
    CHECK(pooled.rows[c].std_error == doctest::Approx(std::sqrt(fit.coefficients[c].u)).epsilon(1e-14));
  }
  const auto text = format_glm_text(pooled);
  CHECK(text.find("(Intercept)") != std::string::npos);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", fit.coefficients[0].q);
  CHECK(text.find(buf) != std::string::npos);
  CHECK(format_glm_csv(pooled).rfind("Parameter,Estimate,", 0) == 0);

  const auto other = fit_glm(data, parse_formula("SEX~WKL"), GlmFamily::Logistic);
  CHECK_THROWS_AS(pool_fitted_glms({fit, other}, CombineMethod::Imputation), DataError);

  const auto mn = fit_glm(data, parse_formula("MAR~SEX"), GlmFamily::Multinomial);
  const auto mpooled = pool_fitted_glms({mn, mn}, CombineMethod::Imputation);
  CHECK(mpooled.response_levels[0] == "Married");
  CHECK(format_glm_csv(mpooled).rfind("Levels,Parameter,Estimate,", 0) == 0);
}
