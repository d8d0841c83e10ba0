#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqmspan/model.hpp"

namespace mqmspan {

template <class T>
struct Loaded {
  std::vector<T> records;
  std::vector<std::string> warnings;
};

/// Calls `fn(record, line_number)` for every non-blank line. Throws IoError when the
/// file cannot be opened and ParseError (with line number) on malformed JSON.
/// Returns the number of records visited.
std::size_t for_each_jsonl(const std::string& path,
                           const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// Parses one span object; errors carry the path and line of the enclosing record.
ErrorSpan parse_span(const nlohmann::json& j, const std::string& path, std::size_t line);

Loaded<Segment> load_corpus(const std::string& path);
Loaded<AnnotationSet> load_annotations(const std::string& path);
Loaded<SourceAnomaly> load_anomalies(const std::string& path);
Loaded<CorrectnessRecord> load_correctness(const std::string& path);

using SegmentIndex = std::map<std::string, const Segment*, std::less<>>;

SegmentIndex index_segments(const std::vector<Segment>& corpus);

/// Throws ValidationError naming the first annotation whose segment_id is not in the corpus.
void require_known_segments(const std::vector<AnnotationSet>& annotations,
                            const SegmentIndex& corpus);

/// Groups annotation sets by annotator id (sorted), preserving record order within a group.
std::map<std::string, std::vector<AnnotationSet>> by_annotator(
    const std::vector<AnnotationSet>& annotations);

}  // namespace mqmspan
