#include "mqmspan/char_metrics.hpp"

#include <algorithm>

#include "mqmspan/errors.hpp"
#include "mqmspan/grounding.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/resample.hpp"
#include "mqmspan/span_match.hpp"
#include "mqmspan/stats.hpp"
#include "mqmspan/text.hpp"

namespace mqmspan {

namespace {

CharSeverity char_severity(Severity s) {
  switch (s) {
    case Severity::major:
    case Severity::critical: return CharSeverity::major;
    case Severity::minor: return CharSeverity::minor;
    case Severity::unknown: return CharSeverity::unknown;
  }
  return CharSeverity::unknown;
}

CharTally tally(const CharMask& gold, const CharMask& pred) {
  CharTally t;
  t.gold_any = gold.has_errors();
  t.pred_any = pred.has_errors();
  for (std::size_t i = 0; i < gold.length; ++i) {
    const auto g = gold.severity_at[i];
    const auto p = pred.severity_at[i];
    const bool ge = g != CharSeverity::none;
    const bool pe = p != CharSeverity::none;
    if (ge && pe) {
      t.tp += 1.0;
      t.tp_weighted += (g == p && g != CharSeverity::unknown) ? 1.0 : 0.5;
    } else if (pe) {
      t.fp += 1.0;
    } else if (ge) {
      t.fn += 1.0;
    }
  }
  return t;
}

}  // namespace

std::size_t CharMask::error_count() const noexcept {
  std::size_t n = 0;
  for (const auto& i : error_chars) n += i.length();
  return n;
}

MaskBuild build_mask(const std::string& segment_id, std::size_t length,
                     const std::vector<ErrorSpan>& spans) {
  MaskBuild out;
  out.mask.segment_id = segment_id;
  out.mask.length = length;
  out.mask.severity_at.assign(length, CharSeverity::none);
  std::vector<Interval> intervals;
  for (const auto& s : spans) {
    if (s.side != Side::target) continue;
    if (!s.offsets_valid) {
      ++out.excluded_spans;
      continue;
    }
    if (s.end > length) throw PreconditionError("build_mask: span exceeds segment length");
    intervals.push_back(s.interval());
    const auto sev = char_severity(s.severity);
    for (std::size_t i = s.start; i < s.end; ++i)
      out.mask.severity_at[i] = std::max(out.mask.severity_at[i], sev);
  }
  out.mask.error_chars = merge_intervals(std::move(intervals));
  return out;
}

MaskSetBuild build_masks(const std::vector<Segment>& corpus,
                         const std::vector<AnnotationSet>& annotations,
                         const std::vector<std::string>& segment_ids) {
  const auto index = index_segments(corpus);
  require_known_segments(annotations, index);
  std::map<std::string, const AnnotationSet*> by_segment;
  for (const auto& a : annotations)
    if (!by_segment.emplace(a.segment_id, &a).second)
      throw ValidationError("more than one annotation record for segment '" + a.segment_id + "'");

  MaskSetBuild out;
  for (const auto& id : segment_ids) {
    const auto seg = index.find(id);
    if (seg == index.end()) throw ValidationError("unknown segment_id '" + id + "'");
    const Segment& segment = *seg->second;
    const auto length = text::length(segment.target_text);
    const auto a = by_segment.find(id);
    std::vector<ErrorSpan> spans;
    if (a != by_segment.end()) spans = ground(*a->second, segment).spans;
    auto built = build_mask(id, length, spans);
    out.excluded_spans += built.excluded_spans;
    out.masks.emplace(id, std::move(built.mask));
  }
  return out;
}

std::vector<CharTally> char_tallies(const MaskSet& gold, const MaskSet& pred) {
  if (gold.size() != pred.size())
    throw ValidationError("gold and predicted masks cover different segment sets");
  std::vector<CharTally> out;
  out.reserve(gold.size());
  auto p = pred.begin();
  for (const auto& [id, g] : gold) {
    if (p->first != id)
      throw ValidationError("segment '" + id + "' is present on one side only");
    if (p->second.length != g.length)
      throw ValidationError("segment '" + id + "' has different mask lengths");
    out.push_back(tally(g, p->second));
    ++p;
  }
  return out;
}

double char_metric(const std::vector<CharTally>& tallies, CharMetric metric) {
  if (metric == CharMetric::any_error_f1) {
    Counts c;
    for (const auto& t : tallies) {
      if (t.gold_any && t.pred_any) ++c.tp;
      else if (t.pred_any) ++c.fp;
      else if (t.gold_any) ++c.fn;
    }
    if (c.tp + c.fp + c.fn == 0) return 1.0;
    return prf(c).f1;
  }
  double tp = 0.0, tpw = 0.0, fp = 0.0, fn = 0.0;
  for (const auto& t : tallies) {
    tp += t.tp;
    tpw += t.tp_weighted;
    fp += t.fp;
    fn += t.fn;
  }
  if (tp + fp + fn == 0.0) return 1.0;
  if (metric == CharMetric::f1) return prf(tp, fp, fn).f1;
  const double p = tp + fp > 0 ? tpw / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tpw / (tp + fn) : 0.0;
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

double char_f1(const MaskSet& gold, const MaskSet& pred) {
  return char_metric(char_tallies(gold, pred), CharMetric::f1);
}

double char_f1w(const MaskSet& gold, const MaskSet& pred) {
  return char_metric(char_tallies(gold, pred), CharMetric::f1w);
}

double any_error_f1(const MaskSet& gold, const MaskSet& pred) {
  return char_metric(char_tallies(gold, pred), CharMetric::any_error_f1);
}

CharCi char_ci(const MaskSet& gold, const MaskSet& pred, CharMetric metric,
               std::size_t replicates, std::uint64_t seed, unsigned jobs) {
  if (replicates == 0) throw ParameterError("char_ci: replicate count must be at least 1");
  const auto tallies = char_tallies(gold, pred);
  CharCi out;
  out.point = char_metric(tallies, metric);
  out.replicates = replicates;
  if (tallies.empty()) {
    out.lower = out.upper = out.point;
    return out;
  }
  std::vector<double> values(replicates);
  parallel_for(replicates, jobs, [&](std::size_t b) {
    std::mt19937_64 rng(replicate_seed(seed, b));
    std::vector<CharTally> sample;
    sample.reserve(tallies.size());
    for (std::size_t i = 0; i < tallies.size(); ++i)
      sample.push_back(tallies[uniform_index(rng, tallies.size())]);
    values[b] = char_metric(sample, metric);
  });
  const auto ci = stats::percentile_ci(values);
  out.lower = ci.lower;
  out.upper = ci.upper;
  return out;
}

}  // namespace mqmspan
