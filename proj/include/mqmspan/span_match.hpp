#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mqmspan/model.hpp"

namespace mqmspan {

enum class Criterion { oc, sim };

std::string_view to_string(Criterion c) noexcept;

struct MatchConfig {
  Criterion criterion = Criterion::oc;
  double threshold = 0.8;
  bool dedup_by_text = false;

  static MatchConfig oc(double threshold = 0.8) { return {Criterion::oc, threshold, false}; }
  static MatchConfig sim(double threshold = 0.6) { return {Criterion::sim, threshold, true}; }
};

inline constexpr std::array<double, 3> kOcSweep{0.7, 0.8, 0.9};
inline constexpr std::array<double, 3> kSimSweep{0.4, 0.5, 0.6};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// P = tp/(tp+fp), R = tp/(tp+fn); zero denominators give 0, and f1 = 0 when p + r = 0.
Prf prf(const Counts& c) noexcept;
Prf prf(double tp, double fp, double fn) noexcept;

/// |a ∩ b| / min(|a|, |b|). Throws PreconditionError on an empty interval.
double oc_score(const Interval& a, const Interval& b);

/// Sørensen-Dice over raw character-trigram multisets (Unicode scalar values, no
/// normalization). A text shorter than three characters is a single n-gram of its own
/// length. Throws PreconditionError on empty text.
double sim_score(std::string_view a, std::string_view b);

struct MatchedPair {
  std::size_t gold_index = 0;  // into the gold span list passed to greedy_match
  std::size_t pred_index = 0;
  double score = 0.0;
};

struct SegmentMatch {
  Counts counts;
  std::vector<MatchedPair> pairs;
};

/// Greedy one-to-one matching of target-side spans.
///
/// Source-side spans are ignored. Under OC, spans without valid offsets cannot be
/// matched but still count as FP/FN. With dedup_by_text, each side keeps only the first
/// span of every distinct text. Matchable pairs (score >= threshold) are visited in
/// descending score order, ties broken by gold start, pred start, then input order.
SegmentMatch greedy_match(const std::vector<ErrorSpan>& gold, const std::vector<ErrorSpan>& pred,
                          const MatchConfig& cfg);

struct Fragment {
  std::string segment_id;
  std::string language;
  SegmentMatch match;
};

struct LanguageScore {
  Counts counts;
  Prf prf;
};

struct MatchReport {
  Counts counts;
  Prf pooled;
  std::map<std::string, LanguageScore> per_language;
  /// Unweighted mean over languages.
  Prf mean;
  double f1_min = 0.0;
  double f1_max = 0.0;
  double recall_min = 0.0;
  double recall_max = 0.0;
  std::vector<std::pair<std::string, MatchedPair>> matched_pairs;  // (segment_id, pair)
  std::vector<std::string> warnings;
};

MatchReport micro_aggregate(const std::vector<Fragment>& fragments);

/// Grounds both annotators' spans and matches them segment by segment. Segments are those
/// annotated by either side, in corpus order; a side with no record for a segment
/// contributes no spans. Throws ValidationError on unknown segment ids.
std::vector<Fragment> match_corpus(const std::vector<Segment>& corpus,
                                   const std::vector<AnnotationSet>& gold,
                                   const std::vector<AnnotationSet>& pred, const MatchConfig& cfg);

MatchReport compare(const std::vector<Segment>& corpus, const std::vector<AnnotationSet>& gold,
                    const std::vector<AnnotationSet>& pred, const MatchConfig& cfg);

struct SweepPoint {
  double threshold = 0.0;
  Counts counts;
  Prf pooled;
  Prf mean;
};

struct SweepResult {
  Criterion criterion = Criterion::oc;
  std::vector<SweepPoint> points;
  double f1_min = 0.0;  // over pooled F1
  double f1_max = 0.0;
};

SweepResult threshold_sweep(const std::vector<Segment>& corpus,
                            const std::vector<AnnotationSet>& gold,
                            const std::vector<AnnotationSet>& pred, Criterion criterion);

struct LanguageStats {
  std::size_t segments = 0;
  std::size_t spans = 0;
  double spans_per_sample = 0.0;
  double median_length = 0.0;
  bool median_defined = false;
  double coverage = 0.0;
};

struct AnnotatorStats {
  double spans_per_sample = 0.0;
  /// Mean over languages with at least one valid span; 0 with median_defined=false if none.
  double median_length = 0.0;
  bool median_defined = false;
  double coverage = 0.0;
  std::map<std::string, LanguageStats> per_language;
};

/// Target-side statistics of one annotator: spans per segment, median valid-span length
/// in characters, and mean union coverage of the target text. Averaged over languages.
AnnotatorStats annotator_stats(const std::vector<Segment>& corpus,
                               const std::vector<AnnotationSet>& annotations);

struct LanguageOverlap {
  std::size_t counted = 0;
  std::size_t total = 0;
  double rate = 0.0;
};

struct OverlapReport {
  std::map<std::string, LanguageOverlap> per_language;
  /// Mean and range over languages with at least one valid target span.
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t unlinked_anchors = 0;
};

/// Fraction of an annotator's valid target spans whose best OC against any linked anomaly
/// target anchor of the same segment reaches `threshold`. Each span counts at most once.
OverlapReport source_overlap_rate(const std::vector<Segment>& corpus,
                                  const std::vector<AnnotationSet>& annotations,
                                  const std::vector<SourceAnomaly>& anomalies,
                                  double threshold = 0.8);

}  // namespace mqmspan
