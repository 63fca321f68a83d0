#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "dpmpm/errors.hpp"
#include "dpmpm/pooling.hpp"

namespace dpmpm {

namespace {

struct Design {
  Eigen::MatrixXd X;
  std::vector<int> y;  // response codes
  std::vector<std::string> terms;
};

// Intercept plus treatment-coded dummies; rows with a missing cell in any
// model variable are dropped.
Design build_design(const CategoricalDataset& data, const std::string& response,
                    const std::vector<std::string>& predictors) {
  const Schema& schema = data.schema();
  const std::size_t ry = schema.index_of(response);
  std::vector<std::size_t> cols;
  for (const auto& name : predictors) {
    const std::size_t j = schema.index_of(name);
    if (j == ry) throw ConfigError("response '" + response + "' also appears as a predictor");
    if (std::find(cols.begin(), cols.end(), j) != cols.end()) throw ConfigError("predictor '" + name + "' repeated");
    cols.push_back(j);
  }
  Design d;
  d.terms.push_back("(Intercept)");
  for (std::size_t j : cols) {
    for (int l = 1; l < schema.levels(j); ++l) d.terms.push_back(schema[j].name + schema.label(j, l));
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    bool complete = data.at(i, ry) != kMissing;
    for (std::size_t j : cols) complete = complete && data.at(i, j) != kMissing;
    if (complete) keep.push_back(i);
  }
  if (keep.empty()) throw DataError("no complete records for the model");
  d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(d.terms.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto i = keep[r];
    const auto row = static_cast<Eigen::Index>(r);
    d.X(row, 0) = 1.0;
    Eigen::Index col = 1;
    for (std::size_t j : cols) {
      const Code x = data.at(i, j);
      if (x > 0) d.X(row, col + x - 1) = 1.0;
      col += schema.levels(j) - 1;
    }
    d.y.push_back(data.at(i, ry));
  }
  for (Eigen::Index c = 1; c < d.X.cols(); ++c) {
    if (d.X.col(c).sum() == 0.0) {
      throw DataError("term '" + d.terms[static_cast<std::size_t>(c)] + "' has no records; the model is not identified");
    }
  }
  return d;
}

// Returns the inverse of a symmetric positive definite matrix.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& info) {
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) throw NumericalError("information matrix is singular");
  return llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Newton iteration with step-halving shared by both families. `eval` fills
// the log-likelihood, score and information at beta.
template <typename Eval>
void newton(Eigen::VectorXd& beta, Eval&& eval, GlmFit& fit) {
  Eigen::VectorXd score(beta.size());
  Eigen::MatrixXd info(beta.size(), beta.size());
  double ll = eval(beta, score, info);
  for (fit.iterations = 0; fit.iterations < kMaxGlmIterations; ++fit.iterations) {
    if (beta.cwiseAbs().maxCoeff() > kSeparationBound) {
      fit.separation = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw NumericalError("information matrix is singular");
    const Eigen::VectorXd step = ldlt.solve(score);
    // Under separation the score vanishes while the steps stay near one, so
    // a small score alone is not convergence.
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    if (fit.max_abs_score < kScoreTolerance && step.cwiseAbs().maxCoeff() < kStepTolerance) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd next = beta + step;
    Eigen::VectorXd next_score(beta.size());
    Eigen::MatrixXd next_info(beta.size(), beta.size());
    double next_ll = eval(next, next_score, next_info);
    double scale = 1.0;
    for (int h = 0; h < 30 && !(next_ll >= ll - 1e-12 * std::abs(ll)); ++h) {
      scale /= 2.0;
      next = beta + scale * step;
      next_ll = eval(next, next_score, next_info);
    }
    beta = next;
    score = next_score;
    info = next_info;
    ll = next_ll;
  }
  fit.max_abs_score = score.cwiseAbs().maxCoeff();
  if (beta.cwiseAbs().maxCoeff() > kSeparationBound) fit.separation = true;
  if (fit.separation) {
    fit.warnings.push_back("coefficients exceed " + std::to_string(static_cast<int>(kSeparationBound)) +
                           " in magnitude; the data may be separated");
  } else if (!fit.converged) {
    fit.warnings.push_back("Newton iterations did not converge");
  }
  const Eigen::MatrixXd cov = spd_inverse(info);
  fit.coefficients.clear();
  for (Eigen::Index c = 0; c < beta.size(); ++c) fit.coefficients.push_back({"", beta(c), cov(c, c)});
}

}  // namespace

GlmFormula parse_formula(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  const auto tilde = s.find('~');
  if (tilde == std::string::npos || tilde == 0 || s.find('~', tilde + 1) != std::string::npos) {
    throw ConfigError("formula must look like 'Y~X1+X2': " + std::string(text));
  }
  GlmFormula f;
  f.response = s.substr(0, tilde);
  const std::string rhs = s.substr(tilde + 1);
  if (rhs.empty() || rhs == "1") return f;
  std::size_t start = 0;
  while (start <= rhs.size()) {
    const auto end = std::min(rhs.find('+', start), rhs.size());
    const auto term = rhs.substr(start, end - start);
    if (term.empty()) throw ConfigError("empty term in formula: " + std::string(text));
    f.predictors.push_back(term);
    start = end + 1;
  }
  return f;
}

GlmFit fit_logistic(const CategoricalDataset& data, const std::string& response,
                    const std::vector<std::string>& predictors) {
  const auto ry = data.schema().index_of(response);
  if (data.schema().levels(ry) != 2) {
    throw ConfigError("logistic regression needs a binary response; '" + response + "' has " +
                      std::to_string(data.schema().levels(ry)) + " levels");
  }
  const Design d = build_design(data, response, predictors);
  const Eigen::Index n = d.X.rows();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = d.y[static_cast<std::size_t>(i)];

  auto eval = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& score, Eigen::MatrixXd& info) {
    const Eigen::VectorXd eta = d.X * beta;
    Eigen::VectorXd p(n), w(n);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = p(i) * (1.0 - p(i));
      ll += y(i) * eta(i) - log1pexp(eta(i));
    }
    score = d.X.transpose() * (y - p);
    info = d.X.transpose() * w.asDiagonal() * d.X;
    return ll;
  };

  GlmFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.X.cols());
  newton(beta, eval, fit);
  fit.terms = d.terms;
  for (std::size_t c = 0; c < fit.coefficients.size(); ++c) fit.coefficients[c].label = d.terms[c];
  return fit;
}

GlmFit fit_multinomial(const CategoricalDataset& data, const std::string& response,
                       const std::vector<std::string>& predictors) {
  const Schema& schema = data.schema();
  const auto ry = schema.index_of(response);
  const int levels = schema.levels(ry);
  const Design d = build_design(data, response, predictors);
  const Eigen::Index n = d.X.rows();
  const Eigen::Index P = d.X.cols();
  const Eigen::Index C = levels - 1;

  // beta is laid out level-major: entry c*P + a is term a of level c+1.
  auto eval = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& score, Eigen::MatrixXd& info) {
    const Eigen::Map<const Eigen::MatrixXd> B(beta.data(), P, C);
    const Eigen::MatrixXd eta = d.X * B;  // n x C
    Eigen::MatrixXd prob(n, C);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double top = std::max(0.0, eta.row(i).maxCoeff());
      double denom = std::exp(-top);
      for (Eigen::Index c = 0; c < C; ++c) denom += std::exp(eta(i, c) - top);
      for (Eigen::Index c = 0; c < C; ++c) prob(i, c) = std::exp(eta(i, c) - top) / denom;
      const int yi = d.y[static_cast<std::size_t>(i)];
      ll += (yi > 0 ? eta(i, yi - 1) : 0.0) - top - std::log(denom);
    }
    Eigen::MatrixXd resid = -prob;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int yi = d.y[static_cast<std::size_t>(i)];
      if (yi > 0) resid(i, yi - 1) += 1.0;
    }
    const Eigen::MatrixXd G = d.X.transpose() * resid;  // P x C
    score = Eigen::Map<const Eigen::VectorXd>(G.data(), P * C);
    info.setZero(P * C, P * C);
    for (Eigen::Index c = 0; c < C; ++c) {
      for (Eigen::Index c2 = c; c2 < C; ++c2) {
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = prob(i, c) * ((c == c2 ? 1.0 : 0.0) - prob(i, c2));
        const Eigen::MatrixXd blk = d.X.transpose() * w.asDiagonal() * d.X;
        info.block(c * P, c2 * P, P, P) = blk;
        if (c2 != c) info.block(c2 * P, c * P, P, P) = blk.transpose();
      }
    }
    return ll;
  };

  GlmFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(P * C);
  newton(beta, eval, fit);
  for (Eigen::Index c = 0; c < C; ++c) {
    const std::string& level = schema.label(ry, static_cast<Code>(c + 1));
    for (Eigen::Index a = 0; a < P; ++a) {
      const auto idx = static_cast<std::size_t>(c * P + a);
      fit.response_levels.push_back(level);
      fit.terms.push_back(d.terms[static_cast<std::size_t>(a)]);
      fit.coefficients[idx].label = level + " " + d.terms[static_cast<std::size_t>(a)];
    }
  }
  return fit;
}

GlmFit fit_glm(const CategoricalDataset& data, const GlmFormula& formula, GlmFamily family) {
  return family == GlmFamily::Logistic ? fit_logistic(data, formula.response, formula.predictors)
                                       : fit_multinomial(data, formula.response, formula.predictors);
}

PooledGlmTable pool_fitted_glms(const std::vector<GlmFit>& fits, CombineMethod method) {
  if (fits.empty()) throw ConfigError("no fitted models to pool");
  const auto& first = fits.front();
  for (const auto& f : fits) {
    bool same = f.coefficients.size() == first.coefficients.size();
    for (std::size_t c = 0; same && c < f.coefficients.size(); ++c) same = f.coefficients[c].label == first.coefficients[c].label;
    if (!same) throw DataError("fitted models do not share the same coefficients");
  }
  PooledGlmTable table;
  table.response_levels = first.response_levels;
  table.terms = first.terms;
  for (std::size_t c = 0; c < first.coefficients.size(); ++c) {
    std::vector<PerDatasetEstimate> per;
    for (const auto& f : fits) per.push_back(f.coefficients[c]);
    table.rows.push_back(combine(per, method));
  }
  return table;
}

}  // namespace dpmpm
