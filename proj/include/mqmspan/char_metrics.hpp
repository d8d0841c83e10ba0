#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mqmspan/model.hpp"

namespace mqmspan {

/// Severity of a single target character. `none` outside error spans.
enum class CharSeverity : std::uint8_t { none, unknown, minor, major };

/// Binary target-side error mask of one segment, with per-character severity.
struct CharMask {
  std::string segment_id;
  std::size_t length = 0;
  std::vector<Interval> error_chars;
  std::vector<CharSeverity> severity_at;  // one entry per character

  std::size_t error_count() const noexcept;
  bool has_errors() const noexcept { return !error_chars.empty(); }
};

struct MaskBuild {
  CharMask mask;
  std::size_t excluded_spans = 0;  // target spans without valid offsets
};

/// Union of valid target spans; a character is major if any covering span is major or
/// critical, else minor if any is minor, else unknown. Source spans are ignored.
MaskBuild build_mask(const std::string& segment_id, std::size_t length,
                     const std::vector<ErrorSpan>& spans);

using MaskSet = std::map<std::string, CharMask>;

struct MaskSetBuild {
  MaskSet masks;
  std::size_t excluded_spans = 0;
};

/// One mask per corpus segment named in `segment_ids` (empty mask when the annotator has
/// no record there). Spans are grounded first.
MaskSetBuild build_masks(const std::vector<Segment>& corpus,
                         const std::vector<AnnotationSet>& annotations,
                         const std::vector<std::string>& segment_ids);

enum class CharMetric { f1, f1w, any_error_f1 };

/// Per-segment tallies; global metrics are computed from their sums.
struct CharTally {
  double tp = 0.0;
  double tp_weighted = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  bool gold_any = false;
  bool pred_any = false;
};

/// Throws ValidationError when the segment sets or lengths differ.
std::vector<CharTally> char_tallies(const MaskSet& gold, const MaskSet& pred);

double char_metric(const std::vector<CharTally>& tallies, CharMetric metric);

/// Global-micro character F1. When neither side marks any character the masks agree and
/// the score is 1.
double char_f1(const MaskSet& gold, const MaskSet& pred);

/// As char_f1, but overlapping characters earn 1.0 when severities match and 0.5
/// otherwise (unknown never matches). P = weighted TP / predicted chars, R = weighted TP /
/// gold chars.
double char_f1w(const MaskSet& gold, const MaskSet& pred);

/// Binary F1 over segments, positive = non-empty mask.
double any_error_f1(const MaskSet& gold, const MaskSet& pred);

inline constexpr std::size_t kDefaultReplicates = 2500;

struct CharCi {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t replicates = 0;
};

/// Percentile bootstrap over segments (resampled with replacement). Deterministic for a
/// seed regardless of `jobs`. Throws ParameterError when replicates == 0.
CharCi char_ci(const MaskSet& gold, const MaskSet& pred, CharMetric metric,
               std::size_t replicates, std::uint64_t seed, unsigned jobs = 1);

}  // namespace mqmspan
