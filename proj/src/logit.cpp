#include "mqmspan/logit.hpp"

#include <cmath>
#include <set>

#include "mqmspan/errors.hpp"

namespace mqmspan::impact {

namespace {

int value_of(const RegressionRow& r, Regressor reg) {
  switch (reg) {
    case Regressor::t: return r.t;
    case Regressor::s: return r.s;
    case Regressor::y_en: return r.y_en;
  }
  return 0;
}

const std::string& factor_value(const RegressionRow& r, const std::string& factor) {
  if (factor == "language") return r.language;
  if (factor == "dataset") return r.dataset;
  return r.eval_model;
}

}  // namespace

std::string_view to_string(Regressor r) noexcept {
  switch (r) {
    case Regressor::t: return "T";
    case Regressor::s: return "S";
    case Regressor::y_en: return "y_en";
  }
  return "T";
}

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Design Design::build(const std::vector<RegressionRow>& rows, const FitOptions& options) {
  Design d;
  d.terms_.push_back({Term::Kind::intercept, Regressor::t, {}, {}, "intercept"});
  for (auto r : options.regressors)
    d.terms_.push_back({Term::Kind::regressor, r, {}, {}, std::string(to_string(r))});
  if (options.fixed_effects) {
    for (const std::string factor : {"language", "dataset", "eval_model"}) {
      std::set<std::string> levels;
      for (const auto& row : rows) levels.insert(factor_value(row, factor));
      if (levels.size() < 2) continue;
      for (auto it = std::next(levels.begin()); it != levels.end(); ++it)
        d.terms_.push_back({Term::Kind::dummy, Regressor::t, factor, *it, factor + "=" + *it});
    }
  }
  return d;
}

std::optional<std::size_t> Design::index_of(Regressor r) const noexcept {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].kind == Term::Kind::regressor && terms_[i].regressor == r) return i;
  return std::nullopt;
}

std::optional<std::size_t> Design::index_of(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].name == name) return i;
  return std::nullopt;
}

Eigen::VectorXd Design::row(const RegressionRow& r, std::optional<Regressor> override_regressor,
                            int override_value) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& term = terms_[i];
    double v = 0.0;
    switch (term.kind) {
      case Term::Kind::intercept: v = 1.0; break;
      case Term::Kind::regressor:
        v = (override_regressor && *override_regressor == term.regressor) ? override_value
                                                                           : value_of(r, term.regressor);
        break;
      case Term::Kind::dummy: v = factor_value(r, term.factor) == term.level ? 1.0 : 0.0; break;
    }
    x[static_cast<Eigen::Index>(i)] = v;
  }
  return x;
}

Eigen::MatrixXd Design::matrix(const std::vector<RegressionRow>& rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = row(rows[i]).transpose();
  return x;
}

std::optional<double> FitResult::coefficient(std::string_view term) const {
  const auto i = design.index_of(term);
  if (!i) return std::nullopt;
  return coefficients[static_cast<Eigen::Index>(*i)];
}

std::optional<double> FitResult::coefficient(Regressor r) const {
  const auto i = design.index_of(r);
  if (!i) return std::nullopt;
  return coefficients[static_cast<Eigen::Index>(*i)];
}

double FitResult::linear_predictor(const RegressionRow& row, std::optional<Regressor> override_regressor,
                                   int override_value) const {
  return design.row(row, override_regressor, override_value).dot(coefficients);
}

FitResult fit(const std::vector<RegressionRow>& rows, const FitOptions& options) {
  if (rows.empty()) throw ValidationError("cannot fit a logistic regression on zero rows");
  FitResult out;
  out.options = options;
  out.design = Design::build(rows, options);
  out.n_rows = rows.size();

  const Eigen::MatrixXd x = out.design.matrix(rows);
  Eigen::VectorXd y(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = rows[i].y;

  const auto p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const Eigen::MatrixXd ridge = options.ridge * Eigen::MatrixXd::Identity(p, p);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = sigmoid(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    // Newton step on the log-likelihood; equivalent to one IRLS weighted least-squares solve.
    const Eigen::MatrixXd hessian = x.transpose() * w.asDiagonal() * x + ridge;
    const Eigen::VectorXd gradient = x.transpose() * (y - mu);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = ldlt.solve(gradient);
    if (!step.allFinite()) break;
    beta += step;
    if (beta.cwiseAbs().maxCoeff() > options.separation_bound) {
      out.separated = true;
      break;
    }
    if (step.cwiseAbs().maxCoeff() < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.coefficients = beta;
  return out;
}

double ame(const FitResult& fit, const std::vector<RegressionRow>& rows, Regressor regressor) {
  if (!fit.design.index_of(regressor))
    throw ParameterError("regressor " + std::string(to_string(regressor)) + " is not part of the fit");
  if (!fit.converged) throw PreconditionError("AME requested from a non-converged fit");
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : rows)
    sum += sigmoid(fit.linear_predictor(row, regressor, 1)) - sigmoid(fit.linear_predictor(row, regressor, 0));
  return 100.0 * sum / static_cast<double>(rows.size());
}

}  // namespace mqmspan::impact
