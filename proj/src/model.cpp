#include "mqmspan/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace mqmspan {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<std::pair<MqmLabel, std::string_view>, 16> kLabels{{
    {MqmLabel::addition, "Addition"},
    {MqmLabel::omission, "Omission"},
    {MqmLabel::mistranslation, "Mistranslation"},
    {MqmLabel::under_translation, "Under-translation"},
    {MqmLabel::over_translation, "Over-translation"},
    {MqmLabel::reordering, "Reordering"},
    {MqmLabel::untranslated, "Untranslated"},
    {MqmLabel::wrong_language, "Wrong language"},
    {MqmLabel::do_not_translate, "Do-not-translate"},
    {MqmLabel::grammar, "Grammar"},
    {MqmLabel::spelling, "Spelling"},
    {MqmLabel::punctuation, "Punctuation"},
    {MqmLabel::inconsistent, "Inconsistent"},
    {MqmLabel::awkward, "Awkward"},
    {MqmLabel::unintelligible, "Unintelligible"},
    {MqmLabel::other_unknown, "Other/Unknown"},
}};

}  // namespace

std::size_t intersection_length(const Interval& a, const Interval& b) noexcept {
  const auto lo = std::max(a.start, b.start);
  const auto hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

std::string_view to_string(Side side) noexcept {
  return side == Side::source ? "source" : "target";
}

std::string_view to_string(Severity severity) noexcept {
  switch (severity) {
    case Severity::major: return "major";
    case Severity::minor: return "minor";
    case Severity::critical: return "critical";
    case Severity::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(MqmLabel label) noexcept {
  for (const auto& [l, name] : kLabels)
    if (l == label) return name;
  return "Other/Unknown";
}

std::optional<Side> parse_side(std::string_view s) {
  const auto v = lower(s);
  if (v == "source") return Side::source;
  if (v == "target") return Side::target;
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view s) {
  const auto v = lower(s);
  if (v == "major") return Severity::major;
  if (v == "minor") return Severity::minor;
  if (v == "critical") return Severity::critical;
  if (v == "unknown" || v.empty()) return Severity::unknown;
  return std::nullopt;
}

std::optional<MqmLabel> parse_label(std::string_view s) {
  const auto v = lower(s);
  for (const auto& [label, name] : kLabels)
    if (lower(name) == v) return label;
  if (v == "other" || v == "unknown") return MqmLabel::other_unknown;
  return std::nullopt;
}

bool is_english(std::string_view language) {
  const auto v = lower(language);
  return v == kEnglishLanguage || v == "english";
}

}  // namespace mqmspan
