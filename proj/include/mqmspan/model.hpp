#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mqmspan {

/// Half-open interval of Unicode scalar offsets (or token indices).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end > start ? end - start : 0; }
  bool empty() const noexcept { return end <= start; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

std::size_t intersection_length(const Interval& a, const Interval& b) noexcept;

enum class Side { source, target };

enum class Severity { major, minor, critical, unknown };

enum class MqmLabel {
  addition,
  omission,
  mistranslation,
  under_translation,
  over_translation,
  reordering,
  untranslated,
  wrong_language,
  do_not_translate,
  grammar,
  spelling,
  punctuation,
  inconsistent,
  awkward,
  unintelligible,
  other_unknown,
};

std::string_view to_string(Side side) noexcept;
std::string_view to_string(Severity severity) noexcept;
std::string_view to_string(MqmLabel label) noexcept;

std::optional<Side> parse_side(std::string_view s);
std::optional<Severity> parse_severity(std::string_view s);
/// Case-insensitive; also accepts "Other" and "Unknown" for Other/Unknown.
std::optional<MqmLabel> parse_label(std::string_view s);

struct Segment {
  std::string segment_id;
  std::string dataset;
  std::string language;
  std::string source_text;
  std::string target_text;
  /// Underlying benchmark item; defaults to segment_id when the record omits it.
  std::string item_id;

  const std::string& text(Side side) const noexcept {
    return side == Side::source ? source_text : target_text;
  }
};

struct ErrorSpan {
  Side side = Side::target;
  /// Offsets are meaningful when has_offsets (as read) or offsets_valid (after grounding).
  std::size_t start = 0;
  std::size_t end = 0;
  bool has_offsets = false;
  bool offsets_valid = false;
  std::string text;
  MqmLabel label = MqmLabel::other_unknown;
  Severity severity = Severity::unknown;

  Interval interval() const noexcept { return {start, end}; }
};

struct AnnotationSet {
  std::string annotator_id;
  std::string segment_id;
  std::vector<ErrorSpan> spans;
};

enum class AnomalySeverity { major, minor };

struct SourceAnomaly {
  std::string segment_id;
  ErrorSpan source_span;
  std::optional<ErrorSpan> target_anchor;
  std::string category;
  AnomalySeverity severity = AnomalySeverity::major;
};

/// Literal language tag of English-original correctness records.
inline constexpr std::string_view kEnglishLanguage = "en";
bool is_english(std::string_view language);

struct CorrectnessRecord {
  std::string item_id;
  std::string language;
  std::string dataset;
  std::string eval_model;
  bool correct = false;
};

}  // namespace mqmspan
