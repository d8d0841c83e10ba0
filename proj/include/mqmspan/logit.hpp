#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mqmspan::impact {

/// One (item, language, eval model) observation.
struct RegressionRow {
  std::string item_id;
  std::string language;
  std::string dataset;
  std::string eval_model;
  int y = 0;     // translated correctness
  int y_en = 0;  // English correctness of the same item and model
  int t = 0;     // >= 1 annotated target-side error
  int s = 0;     // >= 1 source-side issue on the item
};

enum class Regressor { t, s, y_en };
std::string_view to_string(Regressor r) noexcept;

struct FitOptions {
  std::vector<Regressor> regressors{Regressor::t, Regressor::s, Regressor::y_en};
  bool fixed_effects = true;  // language, dataset, eval_model dummies
  double ridge = 1e-8;        // added to the Hessian diagonal for conditioning only
  double tolerance = 1e-8;    // max |coefficient change|
  int max_iterations = 100;
  double separation_bound = 15.0;
};

/// Column layout: intercept, regressors in option order, then one dummy per non-reference
/// level of language, dataset and eval_model (levels sorted; the first is the reference).
class Design {
 public:
  struct Term {
    enum class Kind { intercept, regressor, dummy } kind = Kind::intercept;
    Regressor regressor = Regressor::t;
    std::string factor;
    std::string level;
    std::string name;
  };

  static Design build(const std::vector<RegressionRow>& rows, const FitOptions& options);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  std::optional<std::size_t> index_of(Regressor r) const noexcept;
  std::optional<std::size_t> index_of(std::string_view name) const noexcept;

  /// Design row; `override_value` replaces the named regressor's observed value.
  Eigen::VectorXd row(const RegressionRow& r, std::optional<Regressor> override_regressor = {},
                      int override_value = 0) const;
  Eigen::MatrixXd matrix(const std::vector<RegressionRow>& rows) const;

 private:
  std::vector<Term> terms_;
};

struct FitResult {
  Design design;
  FitOptions options;
  Eigen::VectorXd coefficients;
  bool converged = false;
  bool separated = false;  // some |coefficient| exceeded the separation bound
  int iterations = 0;
  std::size_t n_rows = 0;

  const std::vector<Design::Term>& terms() const noexcept { return design.terms(); }
  std::optional<double> coefficient(std::string_view term) const;
  std::optional<double> coefficient(Regressor r) const;
  double linear_predictor(const RegressionRow& row, std::optional<Regressor> override_regressor = {},
                          int override_value = 0) const;
};

double sigmoid(double x) noexcept;

/// Maximum-likelihood logistic regression by iteratively reweighted least squares.
/// Throws ValidationError on an empty row set.
FitResult fit(const std::vector<RegressionRow>& rows, const FitOptions& options);

/// Average marginal effect of a binary regressor in probability points:
/// 100 * mean_rows [sigma(x b | r=1) - sigma(x b | r=0)].
/// Throws ParameterError when the regressor is not in the fit, PreconditionError when the
/// fit did not converge.
double ame(const FitResult& fit, const std::vector<RegressionRow>& rows, Regressor regressor);

}  // namespace mqmspan::impact
