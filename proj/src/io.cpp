#include "mqmspan/io.hpp"

#include <fstream>
#include <set>
#include <tuple>

#include "mqmspan/errors.hpp"

namespace mqmspan {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& path, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path, line, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           std::size_t line) {
  const auto& v = require(j, key, path, line);
  if (!v.is_string()) throw ParseError(path, line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key, const std::string& path,
                            std::size_t line, std::string fallback = {}) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw ParseError(path, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::size_t offset(const json& v, const char* key, const std::string& path, std::size_t line) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError(path, line, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

std::size_t for_each_jsonl(const std::string& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!j.is_object()) throw ParseError(path, line_no, "record is not a JSON object");
    fn(j, line_no);
    ++records;
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return records;
}

ErrorSpan parse_span(const json& j, const std::string& path, std::size_t line) {
  if (!j.is_object()) throw ParseError(path, line, "span is not a JSON object");
  ErrorSpan span;
  const auto side = optional_string(j, "side", path, line, "target");
  const auto parsed_side = parse_side(side);
  if (!parsed_side) throw ParseError(path, line, "unknown side '" + side + "'");
  span.side = *parsed_side;

  span.text = require_string(j, "text", path, line);
  if (span.text.empty()) throw ParseError(path, line, "zero-length span text");

  const auto label = optional_string(j, "label", path, line, "Other/Unknown");
  const auto parsed_label = parse_label(label);
  if (!parsed_label) throw ValidationError(path + ":" + std::to_string(line) + ": label '" + label +
                                           "' is not in the MQM inventory");
  span.label = *parsed_label;

  const auto severity = optional_string(j, "severity", path, line, "unknown");
  const auto parsed_severity = parse_severity(severity);
  if (!parsed_severity) throw ParseError(path, line, "unknown severity '" + severity + "'");
  span.severity = *parsed_severity;

  const bool has_start = j.contains("start") && !j["start"].is_null();
  const bool has_end = j.contains("end") && !j["end"].is_null();
  if (has_start != has_end) throw ParseError(path, line, "span must give both start and end, or neither");
  if (has_start) {
    span.start = offset(j["start"], "start", path, line);
    span.end = offset(j["end"], "end", path, line);
    if (span.end <= span.start) throw ParseError(path, line, "zero-length or inverted span offsets");
    span.has_offsets = true;
  }
  return span;
}

Loaded<Segment> load_corpus(const std::string& path) {
  Loaded<Segment> out;
  std::set<std::string, std::less<>> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    Segment s;
    s.segment_id = require_string(j, "segment_id", path, line);
    s.dataset = optional_string(j, "dataset", path, line);
    s.language = require_string(j, "language", path, line);
    s.source_text = require_string(j, "source_text", path, line);
    s.target_text = require_string(j, "target_text", path, line);
    s.item_id = optional_string(j, "item_id", path, line, s.segment_id);
    if (s.source_text.empty() || s.target_text.empty())
      throw ValidationError(path + ":" + std::to_string(line) + ": segment '" + s.segment_id +
                            "' has empty source or target text");
    if (!seen.insert(s.segment_id).second)
      throw ValidationError(path + ":" + std::to_string(line) + ": duplicate segment_id '" +
                            s.segment_id + "'");
    out.records.push_back(std::move(s));
  });
  if (out.records.empty()) out.warnings.push_back(path + ": no segments");
  return out;
}

Loaded<AnnotationSet> load_annotations(const std::string& path) {
  Loaded<AnnotationSet> out;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    AnnotationSet a;
    a.annotator_id = require_string(j, "annotator_id", path, line);
    a.segment_id = require_string(j, "segment_id", path, line);
    const auto it = j.find("spans");
    if (it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(path, line, "'spans' must be an array");
      for (const auto& s : *it) a.spans.push_back(parse_span(s, path, line));
    }
    if (!seen.emplace(a.annotator_id, a.segment_id).second)
      throw ValidationError(path + ":" + std::to_string(line) + ": duplicate annotation for annotator '" +
                            a.annotator_id + "' on segment '" + a.segment_id + "'");
    out.records.push_back(std::move(a));
  });
  if (out.records.empty()) out.warnings.push_back(path + ": no annotation records");
  return out;
}

Loaded<SourceAnomaly> load_anomalies(const std::string& path) {
  Loaded<SourceAnomaly> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    SourceAnomaly a;
    a.segment_id = require_string(j, "segment_id", path, line);
    a.source_span = parse_span(require(j, "source_span", path, line), path, line);
    a.source_span.side = Side::source;
    if (const auto it = j.find("target_anchor"); it != j.end() && !it->is_null()) {
      a.target_anchor = parse_span(*it, path, line);
      a.target_anchor->side = Side::target;
    }
    a.category = optional_string(j, "category", path, line);
    const auto sev = optional_string(j, "severity", path, line, "major");
    const auto parsed = parse_severity(sev);
    if (!parsed || *parsed == Severity::unknown)
      throw ParseError(path, line, "anomaly severity must be major or minor");
    a.severity = *parsed == Severity::minor ? AnomalySeverity::minor : AnomalySeverity::major;
    out.records.push_back(std::move(a));
  });
  if (out.records.empty()) out.warnings.push_back(path + ": no anomaly records");
  return out;
}

Loaded<CorrectnessRecord> load_correctness(const std::string& path) {
  Loaded<CorrectnessRecord> out;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    CorrectnessRecord r;
    r.item_id = require_string(j, "item_id", path, line);
    r.language = require_string(j, "language", path, line);
    r.dataset = optional_string(j, "dataset", path, line);
    r.eval_model = require_string(j, "eval_model", path, line);
    const auto& c = require(j, "correct", path, line);
    if (c.is_boolean()) {
      r.correct = c.get<bool>();
    } else if (c.is_number_integer() && (c.get<int>() == 0 || c.get<int>() == 1)) {
      r.correct = c.get<int>() == 1;
    } else {
      throw ParseError(path, line, "'correct' must be a boolean or 0/1");
    }
    if (!seen.emplace(r.item_id, r.language, r.dataset, r.eval_model).second)
      throw ValidationError(path + ":" + std::to_string(line) + ": duplicate correctness record for item '" +
                            r.item_id + "' (" + r.language + ", " + r.dataset + ", " + r.eval_model + ")");
    out.records.push_back(std::move(r));
  });
  if (out.records.empty()) out.warnings.push_back(path + ": no correctness records");
  return out;
}

SegmentIndex index_segments(const std::vector<Segment>& corpus) {
  SegmentIndex index;
  for (const auto& s : corpus) index.emplace(s.segment_id, &s);
  return index;
}

void require_known_segments(const std::vector<AnnotationSet>& annotations,
                            const SegmentIndex& corpus) {
  for (const auto& a : annotations)
    if (!corpus.contains(a.segment_id))
      throw ValidationError("unknown segment_id '" + a.segment_id + "' (annotator '" +
                            a.annotator_id + "')");
}

std::map<std::string, std::vector<AnnotationSet>> by_annotator(
    const std::vector<AnnotationSet>& annotations) {
  std::map<std::string, std::vector<AnnotationSet>> out;
  for (const auto& a : annotations) out[a.annotator_id].push_back(a);
  return out;
}

}  // namespace mqmspan
