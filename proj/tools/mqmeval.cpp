#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "mqmspan/char_metrics.hpp"
#include "mqmspan/errors.hpp"
#include "mqmspan/impact.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/refspan.hpp"
#include "mqmspan/reliability.hpp"
#include "mqmspan/resample.hpp"
#include "mqmspan/span_match.hpp"

#ifndef MQMSPAN_VERSION
#define MQMSPAN_VERSION "0.0.0"
#endif

using nlohmann::json;
using namespace mqmspan;
namespace fs = std::filesystem;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

struct Options {
  std::string segments;
  std::string gold;
  std::string pred;
  std::string anomalies;
  std::string correctness;
  std::string aces;
  double oc_threshold = 0.8;
  double sim_threshold = 0.6;
  bool sweep = false;
  std::size_t k = refspan::kDefaultSlack;
  std::size_t cap = refspan::kDefaultCap;
  std::string spec = "A";
  bool omit_s = false;
  std::size_t boot = impact::kDefaultReplicates;
  std::uint64_t seed = kDefaultSeed;
  std::string datasets;
  std::string out = ".";
  unsigned jobs = 1;
};

// Report precision: scores and CIs 3 decimals, percentage points 2, coefficients 4.
double round_to(double x, int decimals) {
  if (!std::isfinite(x)) return x;
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(x * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}
double score(double x) { return round_to(x, 3); }
double pp(double x) { return round_to(x, 2); }
double coef(double x) { return round_to(x, 4); }

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "NA";
  return v.dump();
}

class Report {
 public:
  Report(std::string command, const Options& o) : command_(std::move(command)), opt_(o) {}

  void input(const std::string& role, const std::string& path) {
    inputs_[role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  json& results() { return results_; }
  void warn(const std::string& w) { warnings_.push_back(w); }
  void warn_all(const std::vector<std::string>& ws) {
    for (const auto& w : ws) warn(w);
  }
  Table& table(std::string name, std::vector<std::string> columns) {
    tables_.push_back({std::move(name), std::move(columns), {}});
    return tables_.back();
  }

  void write() const {
    std::error_code ec;
    fs::create_directories(opt_.out, ec);
    if (ec) throw IoError("cannot create output directory " + opt_.out + ": " + ec.message());

    json doc;
    doc["tool"] = "mqmeval";
    doc["version"] = MQMSPAN_VERSION;
    doc["command"] = command_;
    doc["seed"] = opt_.seed;
    doc["config"] = config();
    doc["inputs"] = inputs_;
    doc["results"] = results_;
    doc["warnings"] = warnings_;
    json tables = json::object();
    for (const auto& t : tables_) {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = r[i];
        rows.push_back(std::move(obj));
      }
      tables[t.name] = std::move(rows);
    }
    doc["tables"] = std::move(tables);
    emit(fs::path(opt_.out) / (command_ + ".json"), doc.dump(2) + "\n");

    for (const auto& t : tables_) {
      std::ostringstream tsv;
      for (std::size_t i = 0; i < t.columns.size(); ++i) tsv << (i ? "\t" : "") << t.columns[i];
      tsv << "\n";
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) tsv << (i ? "\t" : "") << cell(r[i]);
        tsv << "\n";
      }
      emit(fs::path(opt_.out) / (command_ + "." + t.name + ".tsv"), tsv.str());
    }

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    json meta{{"command", command_}, {"created_utc", stamp.str()}, {"jobs", opt_.jobs},
              {"out", opt_.out}, {"version", MQMSPAN_VERSION}};
    emit(fs::path(opt_.out) / (command_ + ".meta.json"), meta.dump(2) + "\n");
  }

 private:
  json config() const {
    return {{"segments", opt_.segments},
            {"gold", opt_.gold},
            {"pred", opt_.pred},
            {"anomalies", opt_.anomalies},
            {"correctness", opt_.correctness},
            {"aces", opt_.aces},
            {"oc_threshold", opt_.oc_threshold},
            {"sim_threshold", opt_.sim_threshold},
            {"sweep", opt_.sweep},
            {"k", opt_.k},
            {"cap", opt_.cap},
            {"spec", opt_.spec},
            {"omit_s", opt_.omit_s},
            {"boot", opt_.boot},
            {"seed", opt_.seed},
            {"datasets", opt_.datasets}};
  }

  static void emit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("cannot write " + path.string());
  }

  std::string command_;
  const Options& opt_;
  json inputs_ = json::object();
  json results_ = json::object();
  std::vector<std::string> warnings_;
  std::deque<Table> tables_;
};

template <class T>
std::vector<T> load(Report& report, const std::string& role, const std::string& path,
                    Loaded<T> (*loader)(const std::string&)) {
  auto loaded = loader(path);
  report.input(role, path);
  report.warn_all(loaded.warnings);
  return std::move(loaded.records);
}

json prf_json(const Prf& p) {
  return {{"precision", score(p.precision)}, {"recall", score(p.recall)}, {"f1", score(p.f1)}};
}

json counts_json(const Counts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

void add_match_rows(Table& t, const std::string& criterion, double threshold, const MatchReport& r) {
  for (const auto& [lang, s] : r.per_language)
    t.add({criterion, threshold, lang, s.counts.tp, s.counts.fp, s.counts.fn, score(s.prf.precision),
           score(s.prf.recall), score(s.prf.f1)});
  t.add({criterion, threshold, "pooled", r.counts.tp, r.counts.fp, r.counts.fn, score(r.pooled.precision),
         score(r.pooled.recall), score(r.pooled.f1)});
  t.add({criterion, threshold, "mean", nullptr, nullptr, nullptr, score(r.mean.precision),
         score(r.mean.recall), score(r.mean.f1)});
}

json match_json(const MatchReport& r) {
  json per = json::object();
  for (const auto& [lang, s] : r.per_language) per[lang] = {{"counts", counts_json(s.counts)}, {"prf", prf_json(s.prf)}};
  return {{"counts", counts_json(r.counts)},
          {"pooled", prf_json(r.pooled)},
          {"mean", prf_json(r.mean)},
          {"f1_range", {score(r.f1_min), score(r.f1_max)}},
          {"recall_range", {score(r.recall_min), score(r.recall_max)}},
          {"per_language", per}};
}

void cmd_agree(const Options& o) {
  Report rep("agree", o);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  const auto gold = load(rep, "gold", o.gold, &load_annotations);
  const auto pred = load(rep, "pred", o.pred, &load_annotations);
  auto& langs = rep.table("per_language",
                          {"criterion", "threshold", "language", "tp", "fp", "fn", "precision", "recall", "f1"});
  for (const auto& cfg : {MatchConfig::oc(o.oc_threshold), MatchConfig::sim(o.sim_threshold)}) {
    const auto r = compare(corpus, gold, pred, cfg);
    const std::string name(to_string(cfg.criterion));
    rep.results()[name] = match_json(r);
    rep.results()[name]["threshold"] = cfg.threshold;
    add_match_rows(langs, name, cfg.threshold, r);
    rep.warn_all(r.warnings);
  }
  if (o.sweep) {
    auto& sweep = rep.table("sweep", {"criterion", "threshold", "tp", "fp", "fn", "precision", "recall", "f1",
                                      "mean_f1"});
    json sj = json::object();
    for (const auto c : {Criterion::oc, Criterion::sim}) {
      const auto s = threshold_sweep(corpus, gold, pred, c);
      const std::string name(to_string(c));
      json points = json::array();
      for (const auto& p : s.points) {
        points.push_back({{"threshold", p.threshold}, {"counts", counts_json(p.counts)},
                          {"pooled", prf_json(p.pooled)}, {"mean", prf_json(p.mean)}});
        sweep.add({name, p.threshold, p.counts.tp, p.counts.fp, p.counts.fn, score(p.pooled.precision),
                   score(p.pooled.recall), score(p.pooled.f1), score(p.mean.f1)});
      }
      sj[name] = {{"points", points}, {"f1_range", {score(s.f1_min), score(s.f1_max)}}};
    }
    rep.results()["sweep"] = sj;
  }
  rep.write();
}

std::vector<std::string> annotated_segments(const std::vector<Segment>& corpus,
                                            const std::vector<AnnotationSet>& a,
                                            const std::vector<AnnotationSet>& b) {
  std::set<std::string> ids;
  for (const auto& s : a) ids.insert(s.segment_id);
  for (const auto& s : b) ids.insert(s.segment_id);
  std::vector<std::string> out;
  for (const auto& s : corpus)
    if (ids.contains(s.segment_id)) out.push_back(s.segment_id);
  return out;
}

void cmd_char(const Options& o) {
  Report rep("char", o);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  const auto gold = load(rep, "gold", o.gold, &load_annotations);
  const auto pred = load(rep, "pred", o.pred, &load_annotations);
  const auto index = index_segments(corpus);
  require_known_segments(gold, index);
  require_known_segments(pred, index);
  const auto ids = annotated_segments(corpus, gold, pred);
  const auto g = build_masks(corpus, gold, ids);
  const auto p = build_masks(corpus, pred, ids);
  if (g.excluded_spans + p.excluded_spans > 0)
    rep.warn(std::to_string(g.excluded_spans + p.excluded_spans) +
             " target spans without valid offsets excluded from masks");
  auto& t = rep.table("metrics", {"metric", "value", "ci_lower", "ci_upper", "replicates"});
  const std::vector<std::pair<std::string, CharMetric>> metrics{
      {"char_f1", CharMetric::f1}, {"char_f1w", CharMetric::f1w}, {"any_error_f1", CharMetric::any_error_f1}};
  for (const auto& [name, m] : metrics) {
    const auto ci = char_ci(g.masks, p.masks, m, o.boot, o.seed, o.jobs);
    rep.results()[name] = {{"value", score(ci.point)}, {"ci95", {score(ci.lower), score(ci.upper)}}};
    t.add({name, score(ci.point), score(ci.lower), score(ci.upper), ci.replicates});
  }
  rep.results()["segments"] = ids.size();
  rep.results()["replicates"] = o.boot;
  rep.write();
}

std::vector<AnnotationSet> concat(std::vector<AnnotationSet> a, const std::vector<AnnotationSet>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

json alpha_json(const Alpha& a) {
  return {{"alpha", a.defined ? json(score(a.value)) : json(nullptr)},
          {"defined", a.defined},
          {"observed_disagreement", round_to(a.observed_disagreement, 6)},
          {"expected_disagreement", round_to(a.expected_disagreement, 6)},
          {"pairable_values", a.pairable_values}};
}

void cmd_reliability(const Options& o) {
  Report rep("reliability", o);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  std::vector<AnnotationSet> all;
  if (!o.gold.empty()) all = load(rep, "gold", o.gold, &load_annotations);
  if (!o.pred.empty()) all = concat(std::move(all), load(rep, "pred", o.pred, &load_annotations));
  const auto grid = build_grid(corpus, by_annotator(all));
  const auto nominal = alpha_nominal(grid);
  const auto unitized = alpha_unitized(grid);
  json per = json::object();
  auto& t = rep.table("alpha", {"scope", "level", "alpha", "defined"});
  auto alpha_cell = [](const Alpha& a) { return a.defined ? json(score(a.value)) : json(nullptr); };
  t.add({"segment", "all", alpha_cell(nominal), nominal.defined});
  t.add({"character", "all", alpha_cell(unitized.global), unitized.global.defined});
  for (const auto& [lang, a] : unitized.per_language) {
    per[lang] = alpha_json(a);
    t.add({"character", lang, alpha_cell(a), a.defined});
  }
  rep.results()["raters"] = grid.raters;
  rep.results()["segments"] = grid.segments.size();
  rep.results()["segment_level"] = alpha_json(nominal);
  rep.results()["character_level"] = {{"global", alpha_json(unitized.global)},
                                      {"per_language", per},
                                      {"range", {score(unitized.min), score(unitized.max)}}};
  rep.write();
}

void cmd_overlap(const Options& o) {
  Report rep("overlap", o);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  const auto ann = load(rep, "pred", o.pred, &load_annotations);
  const auto anomalies = load(rep, "anomalies", o.anomalies, &load_anomalies);
  const auto r = source_overlap_rate(corpus, ann, anomalies, o.oc_threshold);
  auto& t = rep.table("per_language", {"language", "counted", "total", "rate"});
  json per = json::object();
  for (const auto& [lang, l] : r.per_language) {
    per[lang] = {{"counted", l.counted}, {"total", l.total}, {"rate", score(l.rate)}};
    t.add({lang, l.counted, l.total, score(l.rate)});
  }
  if (r.unlinked_anchors) rep.warn(std::to_string(r.unlinked_anchors) + " anomaly target anchors could not be grounded");
  rep.results() = {{"threshold", o.oc_threshold}, {"mean", score(r.mean)}, {"range", {score(r.min), score(r.max)}},
                   {"unlinked_anchors", r.unlinked_anchors}, {"per_language", per}};
  rep.write();
}

void cmd_stats(const Options& o) {
  Report rep("stats", o);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  std::vector<AnnotationSet> all;
  if (!o.gold.empty()) all = load(rep, "gold", o.gold, &load_annotations);
  if (!o.pred.empty()) all = concat(std::move(all), load(rep, "pred", o.pred, &load_annotations));
  require_known_segments(all, index_segments(corpus));
  auto& t = rep.table("annotators", {"annotator", "language", "segments", "spans", "spans_per_sample",
                                     "median_length", "coverage"});
  for (const auto& [annotator, sets] : by_annotator(all)) {
    const auto s = annotator_stats(corpus, sets);
    json per = json::object();
    for (const auto& [lang, l] : s.per_language) {
      const json median = l.median_defined ? json(round_to(l.median_length, 2)) : json(nullptr);
      per[lang] = {{"segments", l.segments}, {"spans", l.spans}, {"spans_per_sample", score(l.spans_per_sample)},
                   {"median_length", median}, {"coverage", score(l.coverage)}};
      t.add({annotator, lang, l.segments, l.spans, score(l.spans_per_sample), median, score(l.coverage)});
    }
    const json median = s.median_defined ? json(round_to(s.median_length, 2)) : json(nullptr);
    t.add({annotator, "mean", nullptr, nullptr, score(s.spans_per_sample), median, score(s.coverage)});
    rep.results()[annotator] = {{"spans_per_sample", score(s.spans_per_sample)}, {"median_length", median},
                                {"coverage", score(s.coverage)}, {"per_language", per}};
  }
  rep.write();
}

std::vector<refspan::ProjectedItem> project_all(Report& rep, const Options& o) {
  const auto items = refspan::load_aces(o.aces);
  rep.input("aces", o.aces);
  std::vector<refspan::ProjectedItem> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(refspan::project(item));
  return out;
}

void cmd_project(const Options& o) {
  Report rep("project", o);
  const auto projected = project_all(rep, o);
  auto& t = rep.table("items", {"item_id", "language", "phenomenon", "status", "gold_start", "gold_end",
                                "gold_text", "pure_insertion"});
  std::map<std::string, std::size_t> status_counts;
  json items = json::array();
  std::size_t kept = 0;
  for (const auto& p : projected) {
    const std::string status(refspan::to_string(p.status));
    ++status_counts[status];
    kept += p.kept();
    const json start = p.kept() ? json(p.gold.start) : json(nullptr);
    const json end = p.kept() ? json(p.gold.end) : json(nullptr);
    items.push_back({{"item_id", p.item_id}, {"language", p.language}, {"phenomenon", p.phenomenon},
                     {"status", status}, {"gold_start", start}, {"gold_end", end},
                     {"gold_text", p.gold_text}, {"pure_insertion", p.pure_insertion}});
    t.add({p.item_id, p.language, p.phenomenon, status, start, end, p.gold_text, p.pure_insertion});
  }
  rep.results() = {{"items", projected.size()}, {"kept", kept}, {"status_counts", status_counts},
                   {"projected", items}};
  rep.write();
}

void cmd_spanloc(const Options& o) {
  Report rep("spanloc", o);
  const auto projected = project_all(rep, o);
  const auto preds = refspan::load_predictions(o.pred);
  rep.input("pred", o.pred);
  const auto scores = refspan::score_spans(projected, preds, o.k);
  if (scores.ignored_predictions)
    rep.warn(std::to_string(scores.ignored_predictions) + " predictions for discarded items ignored");
  auto& t = rep.table("per_phenomenon", {"phenomenon", "items", "f1", "recall", "f1_tolerant", "recall_tolerant"});
  json per = json::object();
  for (const auto& [name, s] : scores.per_phenomenon) {
    per[name] = {{"items", s.items}, {"classic", {{"counts", counts_json(s.classic.counts)}, {"prf", prf_json(s.classic.prf)}}},
                 {"tolerant", {{"counts", counts_json(s.tolerant.counts)}, {"prf", prf_json(s.tolerant.prf)}}}};
    t.add({name, s.items, score(s.classic.prf.f1), score(s.classic.prf.recall), score(s.tolerant.prf.f1),
           score(s.tolerant.prf.recall)});
  }
  auto& c = rep.table("per_category", {"weighting", "category", "phenomena", "total_weight", "f1", "recall",
                                       "f1_tolerant", "recall_tolerant"});
  json cat = json::object();
  const auto& map = refspan::default_phenomenon_map();
  for (const auto& [wname, w] : {std::pair{"meanN", refspan::Weighting::mean_n},
                                 std::pair{"meanCap", refspan::Weighting::mean_cap}}) {
    for (const auto& [category, s] : refspan::aggregate(scores.per_phenomenon, map, w, o.cap)) {
      const std::string cname(refspan::to_string(category));
      cat[wname][cname] = {{"phenomena", s.phenomena}, {"total_weight", s.total_weight}, {"f1", score(s.f1)},
                           {"recall", score(s.recall)}, {"f1_tolerant", score(s.f1_tolerant)},
                           {"recall_tolerant", score(s.recall_tolerant)}};
      c.add({wname, cname, s.phenomena, s.total_weight, score(s.f1), score(s.recall), score(s.f1_tolerant),
             score(s.recall_tolerant)});
    }
  }
  rep.results() = {{"slack", o.k}, {"cap", o.cap}, {"ignored_predictions", scores.ignored_predictions},
                   {"per_phenomenon", per}, {"per_category", cat}};
  rep.write();
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

std::vector<impact::RegressionRow> impact_rows(Report& rep, const Options& o) {
  const auto correctness = load(rep, "correctness", o.correctness, &load_correctness);
  const auto corpus = load(rep, "segments", o.segments, &load_corpus);
  const auto ann = load(rep, "pred", o.pred, &load_annotations);
  std::vector<SourceAnomaly> anomalies;
  if (!o.anomalies.empty()) anomalies = load(rep, "anomalies", o.anomalies, &load_anomalies);
  auto assembled = impact::assemble(correctness, corpus, ann, anomalies, split_list(o.datasets));
  const auto& d = assembled.dropped;
  rep.results()["dropped"] = {{"excluded_dataset", d.excluded_dataset}, {"missing_english", d.missing_english},
                              {"missing_segment", d.missing_segment}, {"missing_annotation", d.missing_annotation}};
  return std::move(assembled.rows);
}

json estimate_json(const impact::Estimate& e, double (*fmt)(double)) {
  return {{"point", fmt(e.point)}, {"ci95", {fmt(e.ci.lower), fmt(e.ci.upper)}}};
}

void cmd_impact(const Options& o) {
  Report rep("impact", o);
  const auto rows = impact_rows(rep, o);
  impact::ModelSpec spec{o.spec == "B" ? impact::ModelSpec::Kind::b : impact::ModelSpec::Kind::a, !o.omit_s};
  const auto fitted = impact::fit(rows, spec);
  const auto r = impact::block_bootstrap(rows, spec, o.boot, o.seed, o.jobs);

  auto& coefs = rep.table("coefficients", {"term", "log_odds", "ci_lower", "ci_upper"});
  auto& odds = rep.table("odds_ratios", {"term", "odds_ratio", "ci_lower", "ci_upper"});
  json cj = json::array();
  json oj = json::array();
  for (std::size_t i = 0; i < fitted.terms().size(); ++i) {
    const auto& term = fitted.terms()[i];
    const double b = fitted.coefficients[static_cast<Eigen::Index>(i)];
    std::optional<impact::Estimate> est;
    if (term.kind == impact::Design::Term::Kind::regressor && term.regressor == impact::Regressor::t) est = r.coef_t;
    if (term.kind == impact::Design::Term::Kind::regressor && term.regressor == impact::Regressor::s) est = r.coef_s;
    const json lo = est ? json(coef(est->ci.lower)) : json(nullptr);
    const json hi = est ? json(coef(est->ci.upper)) : json(nullptr);
    const json olo = est ? json(coef(std::exp(est->ci.lower))) : json(nullptr);
    const json ohi = est ? json(coef(std::exp(est->ci.upper))) : json(nullptr);
    cj.push_back({{"term", term.name}, {"log_odds", coef(b)}, {"ci95", {lo, hi}}});
    oj.push_back({{"term", term.name}, {"odds_ratio", coef(std::exp(b))}, {"ci95", {olo, ohi}}});
    coefs.add({term.name, coef(b), lo, hi});
    odds.add({term.name, coef(std::exp(b)), olo, ohi});
  }
  auto& ames = rep.table("ame", {"spec", "regressor", "ame_pp", "ci_lower", "ci_upper"});
  ames.add({spec.name(), "T", pp(r.ame_t.point), pp(r.ame_t.ci.lower), pp(r.ame_t.ci.upper)});
  json aj = {{"T", estimate_json(r.ame_t, &pp)}};
  if (r.ame_s) {
    ames.add({spec.name(), "S", pp(r.ame_s->point), pp(r.ame_s->ci.lower), pp(r.ame_s->ci.upper)});
    aj["S"] = estimate_json(*r.ame_s, &pp);
  }
  const auto used = impact::spec_rows(rows, spec);
  std::size_t exposed = 0;
  for (const auto& row : used) exposed += row.t == 1;
  const double share = static_cast<double>(exposed) / static_cast<double>(used.size());
  if (r.boot_fail) rep.warn(std::to_string(r.boot_fail) + " bootstrap replicates failed to converge and were excluded");
  rep.results()["spec"] = spec.name();
  rep.results()["effects"] = "associational";
  rep.results()["n_rows"] = r.n_rows;
  rep.results()["n_items"] = r.n_items;
  rep.results()["iterations"] = fitted.iterations;
  rep.results()["coefficients"] = cj;
  rep.results()["odds_ratios"] = oj;
  rep.results()["ame_pp"] = aj;
  rep.results()["share_t"] = score(share);
  rep.results()["overall_loss_pp"] = pp(impact::overall_loss(share, r.ame_t.point));
  rep.results()["bootstrap"] = {{"replicates", o.boot}, {"succeeded", r.boot_success}, {"failed", r.boot_fail},
                                {"percentiles", {2.5, 97.5}}, {"failed_replicates", "excluded"}};
  rep.write();
}

void cmd_rank(const Options& o) {
  Report rep("rank", o);
  const auto rows = impact_rows(rep, o);
  const impact::ModelSpec spec{impact::ModelSpec::Kind::a, !o.omit_s};
  const auto fitted = impact::fit(rows, spec);
  if (!fitted.converged) throw ValidationError("Spec " + spec.name() + " fit did not converge");
  const auto r = impact::counterfactual_ranking(rows, fitted, o.boot, o.seed, o.jobs);
  rep.warn_all(r.warnings);
  if (r.boot_fail) rep.warn(std::to_string(r.boot_fail) + " bootstrap replicates failed and were excluded");
  auto& t = rep.table("models", {"eval_model", "observed", "predicted", "counterfactual", "uplift_pp",
                                 "uplift_ci_lower", "uplift_ci_upper"});
  json models = json::array();
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    const auto& m = r.models[i];
    const auto& ci = r.uplift_ci[i];
    models.push_back({{"eval_model", m.eval_model}, {"observed", score(m.observed)}, {"predicted", score(m.predicted)},
                      {"counterfactual", score(m.counterfactual)}, {"uplift_pp", pp(m.uplift_pp)},
                      {"uplift_ci95", {pp(ci.lower), pp(ci.upper)}}});
    t.add({m.eval_model, score(m.observed), score(m.predicted), score(m.counterfactual), pp(m.uplift_pp),
           pp(ci.lower), pp(ci.upper)});
  }
  auto& c = rep.table("correlations", {"statistic", "point", "ci_lower", "ci_upper"});
  auto corr = [&](const char* name, const std::optional<impact::Estimate>& e) -> json {
    if (!e) return nullptr;
    c.add({name, score(e->point), score(e->ci.lower), score(e->ci.upper)});
    return estimate_json(*e, &score);
  };
  rep.results() = json{{"dropped", rep.results()["dropped"]},
                        {"spec", spec.name()},
                        {"models", models},
                        {"correlations_available", r.correlations_available},
                        {"spearman", corr("spearman", r.spearman)},
                        {"kendall_tau_b", corr("kendall_tau_b", r.kendall)},
                        {"bootstrap", {{"replicates", o.boot}, {"succeeded", r.boot_success}, {"failed", r.boot_fail}}}};
  rep.write();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Span-level MQM annotation evaluation and performance-impact analysis", "mqmeval"};
  app.set_version_flag("--version", MQMSPAN_VERSION);
  app.require_subcommand(1);
  Options o;

  auto shared = [&o](CLI::App* sub) {
    sub->add_option("--segments", o.segments, "Segment corpus (JSONL)");
    sub->add_option("--gold", o.gold, "Reference annotations (JSONL)");
    sub->add_option("--pred", o.pred, "Annotations or predictions under evaluation (JSONL)");
    sub->add_option("--anomalies", o.anomalies, "Source anomalies (JSONL)");
    sub->add_option("--correctness", o.correctness, "Benchmark correctness records (JSONL)");
    sub->add_option("--aces", o.aces, "Good/incorrect/reference triples (JSONL)");
    sub->add_option("--oc-threshold", o.oc_threshold, "OC match threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--sim-threshold", o.sim_threshold, "SIM match threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--sweep", o.sweep, "Also report the threshold sweep");
    sub->add_option("--k", o.k, "Tolerant boundary slack in tokens");
    sub->add_option("--cap", o.cap, "Per-phenomenon weight cap for meanCap")->check(CLI::PositiveNumber);
    sub->add_option("--spec", o.spec, "Regression specification")->check(CLI::IsMember({"A", "B"}));
    sub->add_flag("--omit-s", o.omit_s, "Drop the source-issue regressor");
    sub->add_option("--boot", o.boot, "Bootstrap replicates")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--datasets", o.datasets, "Comma-separated dataset allowlist");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&);
    std::vector<const char*> required;
  };
  const std::vector<Command> commands{
      {"agree", "Span agreement (OC and SIM)", &cmd_agree, {"--segments", "--gold", "--pred"}},
      {"char", "Character-level F1 with bootstrap CIs", &cmd_char, {"--segments", "--gold", "--pred"}},
      {"reliability", "Krippendorff's alpha across annotators", &cmd_reliability, {"--segments"}},
      {"overlap", "Source-issue overlap rate", &cmd_overlap, {"--segments", "--pred", "--anomalies"}},
      {"stats", "Annotation statistics", &cmd_stats, {"--segments"}},
      {"project", "Project gold spans onto references", &cmd_project, {"--aces"}},
      {"spanloc", "Token-level span localization scores", &cmd_spanloc, {"--aces", "--pred"}},
      {"impact", "Fixed-effects logit and marginal effects", &cmd_impact,
       {"--correctness", "--segments", "--pred"}},
      {"rank", "Observed vs counterfactual model ranking", &cmd_rank, {"--correctness", "--segments", "--pred"}},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    shared(sub);
    for (const auto* flag : c.required) sub->get_option(flag)->required();
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    for (const auto& [sub, c] : subs) {
      if (!sub->parsed()) continue;
      if ((std::string(c->name) == "reliability" || std::string(c->name) == "stats") && o.gold.empty() &&
          o.pred.empty())
        throw ParameterError("--gold or --pred is required");
      c->run(o);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
