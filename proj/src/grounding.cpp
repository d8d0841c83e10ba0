#include "mqmspan/grounding.hpp"

#include <algorithm>

#include "mqmspan/errors.hpp"
#include "mqmspan/text.hpp"

namespace mqmspan {

ErrorSpan ground_span(ErrorSpan span, std::u32string_view segment_text) {
  const auto needle = text::decode(span.text);
  if ((span.has_offsets || span.offsets_valid) && span.start < span.end && span.end <= segment_text.size() &&
      segment_text.substr(span.start, span.end - span.start) == needle) {
    span.offsets_valid = true;
    return span;
  }
  span.offsets_valid = false;
  if (needle.empty()) return span;

  std::size_t hits = 0;
  std::size_t first = 0;
  for (auto pos = segment_text.find(needle); pos != std::u32string_view::npos;
       pos = segment_text.find(needle, pos + 1)) {
    if (hits++ == 0) first = pos;
    if (hits > 1) break;
  }
  if (hits == 1) {
    span.start = first;
    span.end = first + needle.size();
    span.offsets_valid = true;
  }
  return span;
}

ErrorSpan ground_span(ErrorSpan span, std::string_view segment_text_utf8) {
  return ground_span(std::move(span), text::decode(segment_text_utf8));
}

AnnotationSet ground(AnnotationSet set, const Segment& segment) {
  const auto source = text::decode(segment.source_text);
  const auto target = text::decode(segment.target_text);
  for (auto& span : set.spans)
    span = ground_span(std::move(span), span.side == Side::source ? source : target);
  return set;
}

SourceAnomaly ground(SourceAnomaly anomaly, const Segment& segment) {
  anomaly.source_span = ground_span(std::move(anomaly.source_span), segment.source_text);
  if (anomaly.target_anchor)
    anomaly.target_anchor = ground_span(std::move(*anomaly.target_anchor), segment.target_text);
  return anomaly;
}

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& i) { return i.empty(); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const auto& i : intervals) {
    if (!out.empty() && i.start <= out.back().end)
      out.back().end = std::max(out.back().end, i.end);
    else
      out.push_back(i);
  }
  return out;
}

std::vector<Interval> merge_overlapping(const std::vector<ErrorSpan>& spans) {
  std::vector<Interval> intervals;
  intervals.reserve(spans.size());
  for (const auto& s : spans) {
    if (!s.offsets_valid) throw PreconditionError("merge_overlapping: span '" + s.text + "' has no valid offsets");
    intervals.push_back(s.interval());
  }
  return merge_intervals(std::move(intervals));
}

}  // namespace mqmspan
