#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mqmspan/logit.hpp"
#include "mqmspan/model.hpp"

namespace mqmspan::impact {

struct DropCounts {
  std::size_t excluded_dataset = 0;
  std::size_t missing_english = 0;
  std::size_t missing_segment = 0;
  std::size_t missing_annotation = 0;
};

struct Assembled {
  std::vector<RegressionRow> rows;
  DropCounts dropped;
};

/// One row per translated correctness record of an allowed dataset. y_en comes from the
/// English record of the same item and model, T from the annotator's target spans on the
/// matching segment (same dataset, item and language), S from any source anomaly on a
/// segment of the item. Rows lacking a component are dropped and counted.
/// `datasets` empty means all datasets. Throws ValidationError on duplicate records.
Assembled assemble(const std::vector<CorrectnessRecord>& correctness,
                   const std::vector<Segment>& corpus,
                   const std::vector<AnnotationSet>& annotations,
                   const std::vector<SourceAnomaly>& anomalies,
                   const std::set<std::string>& datasets = {});

/// A: all rows, regressors T, S, y_en. B: rows with y_en = 1, regressors T, S.
/// include_s = false gives the A¬S / B¬S ablations.
struct ModelSpec {
  enum class Kind { a, b } kind = Kind::a;
  bool include_s = true;

  std::string name() const;
};

/// Rows the spec is fitted on. Throws ValidationError("empty Spec B subset") when B has none.
std::vector<RegressionRow> spec_rows(const std::vector<RegressionRow>& rows, const ModelSpec& spec);
FitOptions spec_options(const ModelSpec& spec);
FitResult fit(const std::vector<RegressionRow>& rows, const ModelSpec& spec);

inline constexpr std::size_t kDefaultReplicates = 2500;

struct Ci {
  double lower = 0.0;
  double upper = 0.0;
};

struct Estimate {
  double point = 0.0;
  Ci ci;
};

struct AmeReport {
  ModelSpec spec;
  std::size_t n_rows = 0;
  std::size_t n_items = 0;
  Estimate ame_t;
  std::optional<Estimate> ame_s;
  Estimate coef_t;  // log-odds
  std::optional<Estimate> coef_s;
  std::size_t boot_success = 0;
  std::size_t boot_fail = 0;
  std::uint64_t seed = 0;
};

/// Item-level block bootstrap: each replicate draws items with replacement, keeps every
/// row of each drawn item, refits the spec and recomputes AMEs and coefficients.
/// Non-converged replicates are counted in boot_fail and excluded from the percentile CIs.
/// Throws ParameterError when replicates == 0 and ValidationError when the point fit or
/// every replicate fails.
AmeReport block_bootstrap(const std::vector<RegressionRow>& rows, const ModelSpec& spec,
                          std::size_t replicates, std::uint64_t seed, unsigned jobs = 1);

/// Share of rows with T = 1 times |AME(T)|, in probability points.
double overall_loss(double share_t, double ame_t_pp) noexcept;
double overall_loss(const std::vector<RegressionRow>& rows, double ame_t_pp) noexcept;

struct ModelAccuracy {
  std::string eval_model;
  double observed = 0.0;        // mean observed y
  double predicted = 0.0;       // mean fitted probability at observed T
  double counterfactual = 0.0;  // mean fitted probability with T = 0
  double uplift_pp = 0.0;       // 100 * (counterfactual - predicted)
};

/// Per-model accuracies under the fit, sorted by model name.
std::vector<ModelAccuracy> model_accuracies(const std::vector<RegressionRow>& rows, const FitResult& fit);

struct RankingReport {
  std::vector<ModelAccuracy> models;
  std::vector<Ci> uplift_ci;  // parallel to models
  std::optional<Estimate> spearman;
  std::optional<Estimate> kendall;
  bool correlations_available = false;
  std::vector<std::string> warnings;
  std::size_t boot_success = 0;
  std::size_t boot_fail = 0;
  std::uint64_t seed = 0;
};

/// Observed ranking (mean y) against the counterfactual ranking (mean predicted accuracy
/// with T forced to 0) per evaluation model, with block-bootstrap CIs refitting the same
/// design as `fit_a`. With fewer than two models only uplifts are reported.
RankingReport counterfactual_ranking(const std::vector<RegressionRow>& rows, const FitResult& fit_a,
                                     std::size_t replicates, std::uint64_t seed, unsigned jobs = 1);

}  // namespace mqmspan::impact
