#pragma once

#include <string_view>
#include <vector>

#include "mqmspan/model.hpp"

namespace mqmspan {

/// Validates or recovers a span's offsets against the text it refers to.
///
/// Given offsets are kept when they lie inside the text and reproduce `span.text`
/// exactly. Otherwise the span text is searched for verbatim (case- and
/// whitespace-exact, overlapping occurrences counted); a unique occurrence supplies
/// the offsets, anything else leaves the span unlinked (`offsets_valid = false`).
ErrorSpan ground_span(ErrorSpan span, std::u32string_view segment_text);
ErrorSpan ground_span(ErrorSpan span, std::string_view segment_text_utf8);

/// Grounds every span against the source or target text its side names.
AnnotationSet ground(AnnotationSet set, const Segment& segment);
SourceAnomaly ground(SourceAnomaly anomaly, const Segment& segment);

/// Minimal sorted set of disjoint half-open intervals covering the union of the input.
/// Adjacent intervals are coalesced.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals);

/// Throws PreconditionError if any span lacks valid offsets.
std::vector<Interval> merge_overlapping(const std::vector<ErrorSpan>& spans);

}  // namespace mqmspan
