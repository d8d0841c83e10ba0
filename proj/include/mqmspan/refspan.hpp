#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mqmspan/model.hpp"
#include "mqmspan/span_match.hpp"

namespace mqmspan::refspan {

struct Token {
  std::string text;
  Interval chars;  // Unicode scalar offsets into the tokenized string
};

/// Whitespace split; leading and trailing punctuation characters become tokens of their own.
std::vector<Token> tokenize(std::string_view utf8);

/// Contains at least one letter or digit.
bool is_contentful(std::string_view token);

struct TokenEdit {
  Interval good;       // token range in the good translation
  Interval incorrect;  // token range in the incorrect translation
};

/// Contiguous edits of a case-sensitive longest-common-subsequence alignment.
std::vector<TokenEdit> token_diff(const std::vector<std::string>& good,
                                  const std::vector<std::string>& incorrect);
std::vector<TokenEdit> token_diff(std::string_view good, std::string_view incorrect);

enum class Category { accuracy, fluency_style };
std::string_view to_string(Category c) noexcept;

struct PhenomenonInfo {
  std::string mqm_type;
  Category category = Category::accuracy;
};

/// Phenomenon -> MQM type/category, keyed by phenomenon name.
using PhenomenonMap = std::map<std::string, PhenomenonInfo, std::less<>>;

/// The 18-phenomenon mapping shipped with the tool (also in data/phenomenon_mqm.tsv).
const PhenomenonMap& default_phenomenon_map();

/// Reads `phenomenon<TAB>mqm_type<TAB>category` lines; '#' starts a comment.
PhenomenonMap load_phenomenon_map(const std::string& path);

struct AcesItem {
  std::string item_id;
  std::string language;
  std::string phenomenon;
  std::string reference;
  std::string good;
  std::string incorrect;
};

std::vector<AcesItem> load_aces(const std::string& path);

enum class Status {
  kept,
  multiple_diffs,
  non_contentful,
  no_reference_match,
  ambiguous_reference_match,
};
std::string_view to_string(Status s) noexcept;

struct ProjectedItem {
  std::string item_id;
  std::string language;
  std::string phenomenon;
  Status status = Status::non_contentful;
  Interval gold;            // token interval into the reference (kept items only)
  std::string gold_text;    // reference surface text of the gold span
  std::size_t reference_tokens = 0;
  bool pure_insertion = false;  // discarded because the edit has no good-side tokens

  bool kept() const noexcept { return status == Status::kept; }
};

/// Keeps the item iff exactly one edit touches contentful good-side tokens and that token
/// sequence occurs exactly once in the reference.
ProjectedItem project(const AcesItem& item);

struct TokenPrediction {
  std::string item_id;
  Interval tokens;
};

std::vector<TokenPrediction> load_predictions(const std::string& path);

struct Scores {
  Counts counts;
  Prf prf;
};

struct PhenomenonScore {
  std::size_t items = 0;  // kept items
  Scores classic;
  Scores tolerant;
};

struct SpanScoreReport {
  std::map<std::string, PhenomenonScore> per_phenomenon;
  std::size_t ignored_predictions = 0;  // predictions for discarded items
};

inline constexpr std::size_t kDefaultSlack = 3;

/// Classic: prediction equals the gold interval. Tolerant: prediction contains gold and
/// extends at most `slack` tokens beyond it on either side. Per item TP <= 1; surplus
/// predictions are false positives; an item without a correct prediction is a false
/// negative. Throws ValidationError for unknown items or out-of-range predictions.
SpanScoreReport score_spans(const std::vector<ProjectedItem>& items,
                            const std::vector<TokenPrediction>& predictions,
                            std::size_t slack = kDefaultSlack);

bool classic_correct(const Interval& gold, const Interval& pred) noexcept;
bool tolerant_correct(const Interval& gold, const Interval& pred, std::size_t slack) noexcept;

enum class Weighting { mean_n, mean_cap };

inline constexpr std::size_t kDefaultCap = 25;

struct CategoryScore {
  double f1 = 0.0;
  double recall = 0.0;
  double f1_tolerant = 0.0;
  double recall_tolerant = 0.0;
  double total_weight = 0.0;
  std::size_t phenomena = 0;
};

/// Weighted mean of per-phenomenon scores within each MQM category: weight n (mean_n)
/// or min(n, cap) (mean_cap). Throws ValidationError on a phenomenon not in `map`.
std::map<Category, CategoryScore> aggregate(const std::map<std::string, PhenomenonScore>& scores,
                                            const PhenomenonMap& map, Weighting weighting,
                                            std::size_t cap = kDefaultCap);

}  // namespace mqmspan::refspan
