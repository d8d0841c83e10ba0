#include "mqmspan/span_match.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

#include "mqmspan/errors.hpp"
#include "mqmspan/grounding.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/text.hpp"

namespace mqmspan {

namespace {

// Guards threshold comparisons against representation error (34/40 vs 0.85).
constexpr double kThresholdSlack = 1e-12;

std::map<std::u32string, std::size_t> char_ngrams(const std::u32string& s) {
  std::map<std::u32string, std::size_t> grams;
  if (s.size() < 3) {
    ++grams[s];
    return grams;
  }
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) ++grams[s.substr(i, 3)];
  return grams;
}

std::vector<std::size_t> eligible(const std::vector<ErrorSpan>& spans, bool dedup) {
  std::vector<std::size_t> out;
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].side != Side::target) continue;
    if (dedup && !seen.insert(spans[i].text).second) continue;
    out.push_back(i);
  }
  return out;
}

std::size_t start_key(const ErrorSpan& s) {
  return s.offsets_valid ? s.start : std::numeric_limits<std::size_t>::max();
}

std::map<std::string, const AnnotationSet*, std::less<>> by_segment(
    const std::vector<AnnotationSet>& sets, const char* role) {
  std::map<std::string, const AnnotationSet*, std::less<>> out;
  for (const auto& s : sets)
    if (!out.emplace(s.segment_id, &s).second)
      throw ValidationError(std::string(role) + " annotations hold more than one record for segment '" +
                            s.segment_id + "'");
  return out;
}

template <class Range>
std::pair<double, double> min_max(const Range& values) {
  if (values.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(Criterion c) noexcept { return c == Criterion::oc ? "OC" : "SIM"; }

Prf prf(double tp, double fp, double fn) noexcept {
  Prf out;
  out.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  const double s = out.precision + out.recall;
  out.f1 = s > 0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

Prf prf(const Counts& c) noexcept {
  return prf(static_cast<double>(c.tp), static_cast<double>(c.fp), static_cast<double>(c.fn));
}

double oc_score(const Interval& a, const Interval& b) {
  if (a.empty() || b.empty()) throw PreconditionError("oc_score: zero-length interval");
  return static_cast<double>(intersection_length(a, b)) /
         static_cast<double>(std::min(a.length(), b.length()));
}

double sim_score(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) throw PreconditionError("sim_score: empty span text");
  const auto ga = char_ngrams(text::decode(a));
  const auto gb = char_ngrams(text::decode(b));
  std::size_t total_a = 0;
  std::size_t total_b = 0;
  std::size_t shared = 0;
  for (const auto& [g, c] : ga) {
    total_a += c;
    if (const auto it = gb.find(g); it != gb.end()) shared += std::min(c, it->second);
  }
  for (const auto& [g, c] : gb) total_b += c;
  return 2.0 * static_cast<double>(shared) / static_cast<double>(total_a + total_b);
}

SegmentMatch greedy_match(const std::vector<ErrorSpan>& gold, const std::vector<ErrorSpan>& pred,
                          const MatchConfig& cfg) {
  const auto gold_idx = eligible(gold, cfg.dedup_by_text);
  const auto pred_idx = eligible(pred, cfg.dedup_by_text);

  struct Candidate {
    std::size_t g, p;
    double score;
  };
  std::vector<Candidate> candidates;
  for (auto g : gold_idx) {
    for (auto p : pred_idx) {
      double score = 0.0;
      if (cfg.criterion == Criterion::oc) {
        if (!gold[g].offsets_valid || !pred[p].offsets_valid) continue;
        score = oc_score(gold[g].interval(), pred[p].interval());
      } else {
        score = sim_score(gold[g].text, pred[p].text);
      }
      if (score + kThresholdSlack >= cfg.threshold) candidates.push_back({g, p, score});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto ga = start_key(gold[a.g]), gb = start_key(gold[b.g]);
    if (ga != gb) return ga < gb;
    const auto pa = start_key(pred[a.p]), pb = start_key(pred[b.p]);
    if (pa != pb) return pa < pb;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });

  std::vector<bool> gold_used(gold.size(), false);
  std::vector<bool> pred_used(pred.size(), false);
  SegmentMatch out;
  for (const auto& c : candidates) {
    if (gold_used[c.g] || pred_used[c.p]) continue;
    gold_used[c.g] = pred_used[c.p] = true;
    out.pairs.push_back({c.g, c.p, c.score});
  }
  out.counts.tp = out.pairs.size();
  out.counts.fn = gold_idx.size() - out.counts.tp;
  out.counts.fp = pred_idx.size() - out.counts.tp;
  return out;
}

MatchReport micro_aggregate(const std::vector<Fragment>& fragments) {
  MatchReport report;
  if (fragments.empty()) {
    report.warnings.push_back("no segments to aggregate; all scores are zero");
    return report;
  }
  for (const auto& f : fragments) {
    report.counts += f.match.counts;
    report.per_language[f.language].counts += f.match.counts;
    for (const auto& pair : f.match.pairs) report.matched_pairs.emplace_back(f.segment_id, pair);
  }
  report.pooled = prf(report.counts);
  std::vector<double> p, r, f1;
  for (auto& [lang, score] : report.per_language) {
    score.prf = prf(score.counts);
    p.push_back(score.prf.precision);
    r.push_back(score.prf.recall);
    f1.push_back(score.prf.f1);
  }
  report.mean = {mean_of(p), mean_of(r), mean_of(f1)};
  std::tie(report.f1_min, report.f1_max) = min_max(f1);
  std::tie(report.recall_min, report.recall_max) = min_max(r);
  return report;
}

std::vector<Fragment> match_corpus(const std::vector<Segment>& corpus,
                                   const std::vector<AnnotationSet>& gold,
                                   const std::vector<AnnotationSet>& pred, const MatchConfig& cfg) {
  const auto index = index_segments(corpus);
  require_known_segments(gold, index);
  require_known_segments(pred, index);
  const auto gold_by = by_segment(gold, "gold");
  const auto pred_by = by_segment(pred, "pred");

  std::vector<Fragment> out;
  for (const auto& segment : corpus) {
    const auto g = gold_by.find(segment.segment_id);
    const auto p = pred_by.find(segment.segment_id);
    if (g == gold_by.end() && p == pred_by.end()) continue;
    const auto gold_set = g != gold_by.end() ? ground(*g->second, segment) : AnnotationSet{};
    const auto pred_set = p != pred_by.end() ? ground(*p->second, segment) : AnnotationSet{};
    out.push_back({segment.segment_id, segment.language,
                   greedy_match(gold_set.spans, pred_set.spans, cfg)});
  }
  return out;
}

MatchReport compare(const std::vector<Segment>& corpus, const std::vector<AnnotationSet>& gold,
                    const std::vector<AnnotationSet>& pred, const MatchConfig& cfg) {
  return micro_aggregate(match_corpus(corpus, gold, pred, cfg));
}

SweepResult threshold_sweep(const std::vector<Segment>& corpus,
                            const std::vector<AnnotationSet>& gold,
                            const std::vector<AnnotationSet>& pred, Criterion criterion) {
  SweepResult out;
  out.criterion = criterion;
  const auto& grid = criterion == Criterion::oc ? kOcSweep : kSimSweep;
  std::vector<double> f1;
  for (double t : grid) {
    const auto cfg = criterion == Criterion::oc ? MatchConfig::oc(t) : MatchConfig::sim(t);
    const auto report = compare(corpus, gold, pred, cfg);
    out.points.push_back({t, report.counts, report.pooled, report.mean});
    f1.push_back(report.pooled.f1);
  }
  std::tie(out.f1_min, out.f1_max) = min_max(f1);
  return out;
}

AnnotatorStats annotator_stats(const std::vector<Segment>& corpus,
                               const std::vector<AnnotationSet>& annotations) {
  const auto index = index_segments(corpus);
  require_known_segments(annotations, index);

  struct Acc {
    std::size_t segments = 0, spans = 0;
    std::vector<double> lengths;
    double coverage_sum = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& raw : annotations) {
    const Segment& segment = *index.at(raw.segment_id);
    const auto set = ground(raw, segment);
    auto& a = acc[segment.language];
    ++a.segments;
    std::vector<ErrorSpan> valid;
    for (const auto& s : set.spans) {
      if (s.side != Side::target) continue;
      ++a.spans;
      if (s.offsets_valid) {
        valid.push_back(s);
        a.lengths.push_back(static_cast<double>(s.end - s.start));
      }
    }
    std::size_t covered = 0;
    for (const auto& i : merge_overlapping(valid)) covered += i.length();
    a.coverage_sum += static_cast<double>(covered) /
                      static_cast<double>(text::length(segment.target_text));
  }

  AnnotatorStats out;
  std::vector<double> sps, medians, coverage;
  for (auto& [lang, a] : acc) {
    LanguageStats ls;
    ls.segments = a.segments;
    ls.spans = a.spans;
    ls.spans_per_sample = static_cast<double>(a.spans) / static_cast<double>(a.segments);
    ls.coverage = a.coverage_sum / static_cast<double>(a.segments);
    if (!a.lengths.empty()) {
      ls.median_length = median_of(a.lengths);
      ls.median_defined = true;
      medians.push_back(ls.median_length);
    }
    sps.push_back(ls.spans_per_sample);
    coverage.push_back(ls.coverage);
    out.per_language.emplace(lang, ls);
  }
  out.spans_per_sample = mean_of(sps);
  out.coverage = mean_of(coverage);
  out.median_defined = !medians.empty();
  out.median_length = mean_of(medians);
  return out;
}

OverlapReport source_overlap_rate(const std::vector<Segment>& corpus,
                                  const std::vector<AnnotationSet>& annotations,
                                  const std::vector<SourceAnomaly>& anomalies, double threshold) {
  const auto index = index_segments(corpus);
  require_known_segments(annotations, index);

  OverlapReport out;
  std::unordered_map<std::string, std::vector<Interval>> anchors;
  for (const auto& raw : anomalies) {
    const auto it = index.find(raw.segment_id);
    if (it == index.end())
      throw ValidationError("anomaly references unknown segment_id '" + raw.segment_id + "'");
    if (!raw.target_anchor) continue;
    const auto anomaly = ground(raw, *it->second);
    if (anomaly.target_anchor->offsets_valid)
      anchors[anomaly.segment_id].push_back(anomaly.target_anchor->interval());
    else
      ++out.unlinked_anchors;
  }

  for (const auto& raw : annotations) {
    const Segment& segment = *index.at(raw.segment_id);
    const auto set = ground(raw, segment);
    auto& lang = out.per_language[segment.language];
    const auto a = anchors.find(segment.segment_id);
    for (const auto& s : set.spans) {
      if (s.side != Side::target || !s.offsets_valid) continue;
      ++lang.total;
      double best = 0.0;
      if (a != anchors.end())
        for (const auto& anchor : a->second) best = std::max(best, oc_score(s.interval(), anchor));
      if (best + kThresholdSlack >= threshold) ++lang.counted;
    }
  }

  std::vector<double> rates;
  for (auto& [name, lang] : out.per_language) {
    if (lang.total == 0) continue;
    lang.rate = static_cast<double>(lang.counted) / static_cast<double>(lang.total);
    rates.push_back(lang.rate);
  }
  out.mean = mean_of(rates);
  std::tie(out.min, out.max) = min_max(rates);
  return out;
}

}  // namespace mqmspan
