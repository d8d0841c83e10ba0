#include "mqmspan/impact.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mqmspan/errors.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/resample.hpp"
#include "mqmspan/stats.hpp"

namespace mqmspan::impact {

namespace {

using ItemKey = std::pair<std::string, std::string>;  // (dataset, item_id)

struct Blocks {
  std::vector<std::vector<std::size_t>> rows_of;  // row indices per item, items sorted
};

Blocks blocks_of(const std::vector<RegressionRow>& rows) {
  std::map<ItemKey, std::vector<std::size_t>> grouped;
  for (std::size_t i = 0; i < rows.size(); ++i) grouped[{rows[i].dataset, rows[i].item_id}].push_back(i);
  Blocks b;
  b.rows_of.reserve(grouped.size());
  for (auto& [key, idx] : grouped) b.rows_of.push_back(std::move(idx));
  return b;
}

std::vector<RegressionRow> resample(const std::vector<RegressionRow>& rows, const Blocks& blocks,
                                    std::uint64_t seed, std::size_t replicate) {
  std::mt19937_64 rng(replicate_seed(seed, replicate));
  std::vector<RegressionRow> out;
  out.reserve(rows.size());
  for (std::size_t k = 0; k < blocks.rows_of.size(); ++k) {
    const auto& block = blocks.rows_of[uniform_index(rng, blocks.rows_of.size())];
    for (auto i : block) out.push_back(rows[i]);
  }
  return out;
}

Ci ci_of(const std::vector<double>& values) {
  const auto ci = stats::percentile_ci(values);
  return {ci.lower, ci.upper};
}

}  // namespace

Assembled assemble(const std::vector<CorrectnessRecord>& correctness,
                   const std::vector<Segment>& corpus,
                   const std::vector<AnnotationSet>& annotations,
                   const std::vector<SourceAnomaly>& anomalies,
                   const std::set<std::string>& datasets) {
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  std::map<std::tuple<std::string, std::string, std::string>, bool> english;  // (dataset, item, model)
  for (const auto& r : correctness) {
    if (!seen.emplace(r.item_id, r.language, r.dataset, r.eval_model).second)
      throw ValidationError("duplicate correctness record for item '" + r.item_id + "' (" + r.language +
                            ", " + r.dataset + ", " + r.eval_model + ")");
    if (is_english(r.language)) english[{r.dataset, r.item_id, r.eval_model}] = r.correct;
  }

  const auto index = index_segments(corpus);
  require_known_segments(annotations, index);
  std::map<std::tuple<std::string, std::string, std::string>, const Segment*> segment_of;
  for (const auto& s : corpus) segment_of[{s.dataset, s.item_id, s.language}] = &s;

  std::map<std::string, const AnnotationSet*> annotation_of;
  for (const auto& a : annotations)
    if (!annotation_of.emplace(a.segment_id, &a).second)
      throw ValidationError("more than one annotation record for segment '" + a.segment_id + "'");

  std::set<ItemKey> source_issue;
  for (const auto& a : anomalies) {
    const auto it = index.find(a.segment_id);
    if (it == index.end()) throw ValidationError("anomaly references unknown segment_id '" + a.segment_id + "'");
    source_issue.insert({it->second->dataset, it->second->item_id});
  }

  Assembled out;
  for (const auto& r : correctness) {
    if (is_english(r.language)) continue;
    if (!datasets.empty() && !datasets.contains(r.dataset)) {
      ++out.dropped.excluded_dataset;
      continue;
    }
    const auto en = english.find({r.dataset, r.item_id, r.eval_model});
    if (en == english.end()) {
      ++out.dropped.missing_english;
      continue;
    }
    const auto seg = segment_of.find({r.dataset, r.item_id, r.language});
    if (seg == segment_of.end()) {
      ++out.dropped.missing_segment;
      continue;
    }
    const auto ann = annotation_of.find(seg->second->segment_id);
    if (ann == annotation_of.end()) {
      ++out.dropped.missing_annotation;
      continue;
    }
    const bool t = std::any_of(ann->second->spans.begin(), ann->second->spans.end(),
                               [](const ErrorSpan& s) { return s.side == Side::target; });
    out.rows.push_back({r.item_id, r.language, r.dataset, r.eval_model, r.correct ? 1 : 0,
                        en->second ? 1 : 0, t ? 1 : 0,
                        source_issue.contains({r.dataset, r.item_id}) ? 1 : 0});
  }
  return out;
}

std::string ModelSpec::name() const {
  std::string n = kind == Kind::a ? "A" : "B";
  if (!include_s) n += "¬S";
  return n;
}

std::vector<RegressionRow> spec_rows(const std::vector<RegressionRow>& rows, const ModelSpec& spec) {
  if (spec.kind == ModelSpec::Kind::a) return rows;
  std::vector<RegressionRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const RegressionRow& r) { return r.y_en == 1; });
  if (out.empty()) throw ValidationError("empty Spec B subset");
  return out;
}

FitOptions spec_options(const ModelSpec& spec) {
  FitOptions o;
  o.regressors = {Regressor::t};
  if (spec.include_s) o.regressors.push_back(Regressor::s);
  if (spec.kind == ModelSpec::Kind::a) o.regressors.push_back(Regressor::y_en);
  return o;
}

FitResult fit(const std::vector<RegressionRow>& rows, const ModelSpec& spec) {
  return impact::fit(spec_rows(rows, spec), spec_options(spec));
}

AmeReport block_bootstrap(const std::vector<RegressionRow>& rows, const ModelSpec& spec,
                          std::size_t replicates, std::uint64_t seed, unsigned jobs) {
  if (replicates == 0) throw ParameterError("block_bootstrap: replicate count must be at least 1");
  const auto subset = spec_rows(rows, spec);
  const auto options = spec_options(spec);
  const auto point = impact::fit(subset, options);
  if (!point.converged)
    throw ValidationError("Spec " + spec.name() + " point fit did not converge" +
                          (point.separated ? " (quasi-separation)" : ""));

  AmeReport report;
  report.spec = spec;
  report.seed = seed;
  report.n_rows = subset.size();
  report.ame_t.point = ame(point, subset, Regressor::t);
  report.coef_t.point = *point.coefficient(Regressor::t);
  if (spec.include_s) {
    report.ame_s = Estimate{ame(point, subset, Regressor::s), {}};
    report.coef_s = Estimate{*point.coefficient(Regressor::s), {}};
  }

  const auto blocks = blocks_of(rows);
  report.n_items = blocks_of(subset).rows_of.size();

  struct Draw {
    bool ok = false;
    double ame_t = 0, ame_s = 0, coef_t = 0, coef_s = 0;
  };
  std::vector<Draw> draws(replicates);
  parallel_for(replicates, jobs, [&](std::size_t b) {
    const auto sample = resample(rows, blocks, seed, b);
    std::vector<RegressionRow> sub;
    if (spec.kind == ModelSpec::Kind::a) {
      sub = sample;
    } else {
      std::copy_if(sample.begin(), sample.end(), std::back_inserter(sub),
                   [](const RegressionRow& r) { return r.y_en == 1; });
    }
    if (sub.empty()) return;
    const auto f = impact::fit(sub, options);
    if (!f.converged) return;
    Draw d;
    d.ok = true;
    d.ame_t = ame(f, sub, Regressor::t);
    d.coef_t = *f.coefficient(Regressor::t);
    if (spec.include_s) {
      d.ame_s = ame(f, sub, Regressor::s);
      d.coef_s = *f.coefficient(Regressor::s);
    }
    draws[b] = d;
  });

  std::vector<double> at, as, ct, cs;
  for (const auto& d : draws) {
    if (!d.ok) {
      ++report.boot_fail;
      continue;
    }
    ++report.boot_success;
    at.push_back(d.ame_t);
    ct.push_back(d.coef_t);
    as.push_back(d.ame_s);
    cs.push_back(d.coef_s);
  }
  if (report.boot_success == 0) throw ValidationError("every bootstrap replicate failed to converge");
  report.ame_t.ci = ci_of(at);
  report.coef_t.ci = ci_of(ct);
  if (spec.include_s) {
    report.ame_s->ci = ci_of(as);
    report.coef_s->ci = ci_of(cs);
  }
  return report;
}

double overall_loss(double share_t, double ame_t_pp) noexcept { return share_t * std::abs(ame_t_pp); }

double overall_loss(const std::vector<RegressionRow>& rows, double ame_t_pp) noexcept {
  if (rows.empty()) return 0.0;
  const auto exposed = std::count_if(rows.begin(), rows.end(), [](const RegressionRow& r) { return r.t == 1; });
  return overall_loss(static_cast<double>(exposed) / static_cast<double>(rows.size()), ame_t_pp);
}

std::vector<ModelAccuracy> model_accuracies(const std::vector<RegressionRow>& rows, const FitResult& fit) {
  struct Sum {
    double y = 0, pred = 0, cf = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Sum> sums;
  const bool has_t = fit.design.index_of(Regressor::t).has_value();
  for (const auto& r : rows) {
    auto& s = sums[r.eval_model];
    s.y += r.y;
    s.pred += sigmoid(fit.linear_predictor(r));
    s.cf += sigmoid(has_t ? fit.linear_predictor(r, Regressor::t, 0) : fit.linear_predictor(r));
    ++s.n;
  }
  std::vector<ModelAccuracy> out;
  for (const auto& [model, s] : sums) {
    const double n = static_cast<double>(s.n);
    ModelAccuracy m{model, s.y / n, s.pred / n, s.cf / n, 0.0};
    m.uplift_pp = 100.0 * (m.counterfactual - m.predicted);
    out.push_back(m);
  }
  return out;
}

namespace {

struct RankPoint {
  std::vector<ModelAccuracy> models;
  std::optional<double> rho;
  std::optional<double> tau;
};

RankPoint rank_point(const std::vector<RegressionRow>& rows, const FitResult& fit) {
  RankPoint p;
  p.models = model_accuracies(rows, fit);
  std::vector<double> observed, counterfactual;
  for (const auto& m : p.models) {
    observed.push_back(m.observed);
    counterfactual.push_back(m.counterfactual);
  }
  p.rho = stats::spearman(observed, counterfactual);
  p.tau = stats::kendall_tau_b(observed, counterfactual);
  return p;
}

}  // namespace

RankingReport counterfactual_ranking(const std::vector<RegressionRow>& rows, const FitResult& fit_a,
                                     std::size_t replicates, std::uint64_t seed, unsigned jobs) {
  if (replicates == 0) throw ParameterError("counterfactual_ranking: replicate count must be at least 1");
  if (!fit_a.converged) throw PreconditionError("counterfactual ranking needs a converged Spec A fit");
  RankingReport report;
  report.seed = seed;
  const auto point = rank_point(rows, fit_a);
  report.models = point.models;
  report.correlations_available = report.models.size() >= 2;
  if (!report.correlations_available)
    report.warnings.push_back("fewer than two evaluation models; rank correlations not computed");

  const auto blocks = blocks_of(rows);
  std::vector<std::optional<RankPoint>> draws(replicates);
  parallel_for(replicates, jobs, [&](std::size_t b) {
    const auto sample = resample(rows, blocks, seed, b);
    const auto f = impact::fit(sample, fit_a.options);
    if (!f.converged) return;
    draws[b] = rank_point(sample, f);
  });

  std::vector<std::vector<double>> uplifts(report.models.size());
  std::vector<double> rhos, taus;
  for (const auto& d : draws) {
    if (!d || d->models.size() != report.models.size() ||
        !std::equal(d->models.begin(), d->models.end(), report.models.begin(),
                    [](const ModelAccuracy& a, const ModelAccuracy& b) { return a.eval_model == b.eval_model; })) {
      ++report.boot_fail;
      continue;
    }
    ++report.boot_success;
    for (std::size_t m = 0; m < d->models.size(); ++m) uplifts[m].push_back(d->models[m].uplift_pp);
    if (d->rho) rhos.push_back(*d->rho);
    if (d->tau) taus.push_back(*d->tau);
  }
  if (report.boot_success == 0) throw ValidationError("every bootstrap replicate failed to converge");
  for (const auto& u : uplifts) report.uplift_ci.push_back(ci_of(u));
  if (report.correlations_available) {
    if (point.rho) report.spearman = Estimate{*point.rho, ci_of(rhos)};
    if (point.tau) report.kendall = Estimate{*point.tau, ci_of(taus)};
    if (!point.rho || !point.tau)
      report.warnings.push_back("observed or counterfactual accuracies show no variation across models");
  }
  return report;
}

}  // namespace mqmspan::impact
