#include "mqmspan/refspan.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mqmspan/errors.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/text.hpp"

namespace mqmspan::refspan {

namespace {

using nlohmann::json;

std::string field(const json& j, const char* key, const std::string& path, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ParseError(path, line, std::string("missing or non-string field '") + key + "'");
  return it->get<std::string>();
}

std::vector<std::string> texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

bool range_contentful(const std::vector<std::string>& tokens, const Interval& range) {
  for (auto i = range.start; i < range.end; ++i)
    if (is_contentful(tokens[i])) return true;
  return false;
}

void finish(Scores& s) { s.prf = prf(s.counts); }

}  // namespace

std::vector<Token> tokenize(std::string_view utf8) {
  const auto chars = text::decode(utf8);
  std::vector<Token> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    out.push_back({text::encode(std::u32string_view(chars).substr(b, e - b)), {b, e}});
  };
  std::size_t i = 0;
  while (i < chars.size()) {
    while (i < chars.size() && text::is_space(chars[i])) ++i;
    if (i == chars.size()) break;
    std::size_t end = i;
    while (end < chars.size() && !text::is_space(chars[end])) ++end;

    std::size_t b = i;
    std::size_t e = end;
    while (b < e && text::is_punct(chars[b])) {
      emit(b, b + 1);
      ++b;
    }
    std::size_t trail = e;
    while (trail > b && text::is_punct(chars[trail - 1])) --trail;
    if (b < trail) emit(b, trail);
    for (std::size_t p = trail; p < e; ++p) emit(p, p + 1);
    i = end;
  }
  return out;
}

bool is_contentful(std::string_view token) {
  const auto chars = text::decode(token);
  return std::any_of(chars.begin(), chars.end(), [](char32_t c) { return text::is_alnum(c); });
}

std::vector<TokenEdit> token_diff(const std::vector<std::string>& good,
                                  const std::vector<std::string>& incorrect) {
  const auto n = good.size();
  const auto m = incorrect.size();
  // lcs[i][j]: LCS length of good[i..] and incorrect[j..]
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = good[i] == incorrect[j] ? lcs[i + 1][j + 1] + 1
                                          : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  std::vector<TokenEdit> edits;
  std::size_t i = 0, j = 0;
  bool open = false;
  TokenEdit current;
  auto close = [&] {
    if (!open) return;
    current.good.end = i;
    current.incorrect.end = j;
    edits.push_back(current);
    open = false;
  };
  while (i < n || j < m) {
    if (i < n && j < m && good[i] == incorrect[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
      close();
      ++i;
      ++j;
      continue;
    }
    if (!open) {
      current = {{i, i}, {j, j}};
      open = true;
    }
    if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1]))
      ++i;
    else
      ++j;
  }
  close();
  return edits;
}

std::vector<TokenEdit> token_diff(std::string_view good, std::string_view incorrect) {
  return token_diff(texts(tokenize(good)), texts(tokenize(incorrect)));
}

std::string_view to_string(Category c) noexcept {
  return c == Category::accuracy ? "Accuracy" : "Fluency/Style";
}

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::kept: return "kept";
    case Status::multiple_diffs: return "multiple_diffs";
    case Status::non_contentful: return "non_contentful";
    case Status::no_reference_match: return "no_reference_match";
    case Status::ambiguous_reference_match: return "ambiguous_reference_match";
  }
  return "non_contentful";
}

const PhenomenonMap& default_phenomenon_map() {
  static const PhenomenonMap map = [] {
    PhenomenonMap m;
    const auto acc = Category::accuracy;
    const auto flu = Category::fluency_style;
    for (const char* p : {"pleonastic_it:substitution", "coreference-based-on-commonsense",
                          "hallucination-date-time", "overly-literal-vs-ref-word",
                          "overly-literal-vs-explanation", "overly-literal-vs-synonym",
                          "real-world-knowledge-hypernym-vs-distractor",
                          "real-world-knowledge-entailment",
                          "real-world-knowledge-synonym-vs-antonym", "ordering-mismatch"})
      m.emplace(p, PhenomenonInfo{"mistranslation", acc});
    m.emplace("untranslated-vs-ref-word", PhenomenonInfo{"untranslated", acc});
    m.emplace("untranslated-vs-synonym", PhenomenonInfo{"untranslated", acc});
    m.emplace("do-not-translate", PhenomenonInfo{"no-translate", acc});
    m.emplace("addition", PhenomenonInfo{"addition", acc});
    for (const char* p : {"anaphoric_intra_non-subject_it:substitution",
                          "anaphoric_intra_subject_it:substitution",
                          "anaphoric_intra_they:substitution",
                          "anaphoric_group_it-they:substitution"})
      m.emplace(p, PhenomenonInfo{"grammar", flu});
    return m;
  }();
  return map;
}

PhenomenonMap load_phenomenon_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PhenomenonMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::stringstream ss(line);
    std::string phenomenon, type, category;
    if (!std::getline(ss, phenomenon, '\t') || !std::getline(ss, type, '\t') ||
        !std::getline(ss, category))
      throw ParseError(path, line_no, "expected three tab-separated columns");
    Category c;
    if (category == "Accuracy") c = Category::accuracy;
    else if (category == "Fluency/Style") c = Category::fluency_style;
    else throw ParseError(path, line_no, "unknown category '" + category + "'");
    if (!map.emplace(phenomenon, PhenomenonInfo{type, c}).second)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate phenomenon '" + phenomenon + "'");
  }
  return map;
}

std::vector<AcesItem> load_aces(const std::string& path) {
  std::vector<AcesItem> out;
  std::map<std::string, std::size_t> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    AcesItem item{field(j, "item_id", path, line), field(j, "language", path, line),
                  field(j, "phenomenon", path, line),  field(j, "reference", path, line),
                  field(j, "good", path, line),         field(j, "incorrect", path, line)};
    if (item.reference.empty() || item.good.empty() || item.incorrect.empty())
      throw ValidationError(path + ":" + std::to_string(line) + ": item '" + item.item_id + "' has an empty text");
    if (!seen.emplace(item.item_id, line).second)
      throw ValidationError(path + ":" + std::to_string(line) + ": duplicate item_id '" + item.item_id + "'");
    out.push_back(std::move(item));
  });
  return out;
}

ProjectedItem project(const AcesItem& item) {
  ProjectedItem out;
  out.item_id = item.item_id;
  out.language = item.language;
  out.phenomenon = item.phenomenon;

  const auto good = texts(tokenize(item.good));
  const auto incorrect = texts(tokenize(item.incorrect));
  const auto reference_tokens = tokenize(item.reference);
  const auto reference = texts(reference_tokens);
  out.reference_tokens = reference.size();

  const auto edits = token_diff(good, incorrect);
  std::vector<TokenEdit> contentful;
  for (const auto& e : edits)
    if (range_contentful(good, e.good)) contentful.push_back(e);

  if (contentful.size() > 1) {
    out.status = Status::multiple_diffs;
    return out;
  }
  if (contentful.empty()) {
    const bool insertion = std::any_of(edits.begin(), edits.end(), [&](const TokenEdit& e) {
      return e.good.empty() && range_contentful(incorrect, e.incorrect);
    });
    out.status = insertion ? Status::no_reference_match : Status::non_contentful;
    out.pure_insertion = insertion;
    return out;
  }

  const auto& edit = contentful.front();
  const auto len = edit.good.length();
  std::size_t hits = 0;
  std::size_t at = 0;
  for (std::size_t i = 0; i + len <= reference.size(); ++i) {
    if (std::equal(good.begin() + static_cast<std::ptrdiff_t>(edit.good.start),
                   good.begin() + static_cast<std::ptrdiff_t>(edit.good.end),
                   reference.begin() + static_cast<std::ptrdiff_t>(i))) {
      if (hits++ == 0) at = i;
    }
  }
  if (hits == 0) {
    out.status = Status::no_reference_match;
    return out;
  }
  if (hits > 1) {
    out.status = Status::ambiguous_reference_match;
    return out;
  }
  out.status = Status::kept;
  out.gold = {at, at + len};
  const auto ref_chars = text::decode(item.reference);
  const auto first = reference_tokens[at].chars.start;
  const auto last = reference_tokens[at + len - 1].chars.end;
  out.gold_text = text::encode(std::u32string_view(ref_chars).substr(first, last - first));
  return out;
}

std::vector<TokenPrediction> load_predictions(const std::string& path) {
  std::vector<TokenPrediction> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    TokenPrediction p;
    p.item_id = field(j, "item_id", path, line);
    const auto s = j.find("token_start");
    const auto e = j.find("token_end");
    if (s == j.end() || e == j.end() || !s->is_number_integer() || !e->is_number_integer() ||
        s->get<long long>() < 0 || e->get<long long>() < 0)
      throw ParseError(path, line, "token_start/token_end must be non-negative integers");
    p.tokens = {s->get<std::size_t>(), e->get<std::size_t>()};
    if (p.tokens.empty()) throw ParseError(path, line, "empty token interval");
    out.push_back(std::move(p));
  });
  return out;
}

bool classic_correct(const Interval& gold, const Interval& pred) noexcept { return gold == pred; }

bool tolerant_correct(const Interval& gold, const Interval& pred, std::size_t slack) noexcept {
  return pred.start <= gold.start && pred.end >= gold.end && gold.start - pred.start <= slack &&
         pred.end - gold.end <= slack;
}

SpanScoreReport score_spans(const std::vector<ProjectedItem>& items,
                            const std::vector<TokenPrediction>& predictions, std::size_t slack) {
  std::map<std::string, const ProjectedItem*, std::less<>> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);

  SpanScoreReport report;
  std::map<std::string, std::vector<Interval>> preds;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.item_id);
    if (it == by_id.end()) throw ValidationError("prediction for unknown item_id '" + p.item_id + "'");
    if (!it->second->kept()) {
      ++report.ignored_predictions;
      continue;
    }
    if (p.tokens.empty() || p.tokens.end > it->second->reference_tokens)
      throw ValidationError("prediction [" + std::to_string(p.tokens.start) + "," +
                            std::to_string(p.tokens.end) + ") for item '" + p.item_id +
                            "' is outside the reference's " +
                            std::to_string(it->second->reference_tokens) + " tokens");
    preds[p.item_id].push_back(p.tokens);
  }

  for (const auto& item : items) {
    if (!item.kept()) continue;
    auto& score = report.per_phenomenon[item.phenomenon];
    ++score.items;
    const auto it = preds.find(item.item_id);
    const std::vector<Interval> none;
    const auto& candidates = it != preds.end() ? it->second : none;
    auto tally = [&](Scores& s, auto&& correct) {
      const bool hit = std::any_of(candidates.begin(), candidates.end(), correct);
      s.counts.tp += hit ? 1 : 0;
      s.counts.fn += hit ? 0 : 1;
      s.counts.fp += candidates.size() - (hit ? 1 : 0);
    };
    tally(score.classic, [&](const Interval& p) { return classic_correct(item.gold, p); });
    tally(score.tolerant, [&](const Interval& p) { return tolerant_correct(item.gold, p, slack); });
  }
  for (auto& [name, score] : report.per_phenomenon) {
    finish(score.classic);
    finish(score.tolerant);
  }
  return report;
}

std::map<Category, CategoryScore> aggregate(const std::map<std::string, PhenomenonScore>& scores,
                                            const PhenomenonMap& map, Weighting weighting,
                                            std::size_t cap) {
  std::map<Category, CategoryScore> out;
  for (const auto& [name, score] : scores) {
    const auto it = map.find(name);
    if (it == map.end()) {
      std::string known;
      for (const auto& [p, info] : map) known += (known.empty() ? "" : ", ") + p;
      throw ValidationError("unknown phenomenon '" + name + "'; known phenomena: " + known);
    }
    const double n = static_cast<double>(score.items);
    const double w = weighting == Weighting::mean_n ? n : std::min(n, static_cast<double>(cap));
    auto& c = out[it->second.category];
    ++c.phenomena;
    c.total_weight += w;
    c.f1 += w * score.classic.prf.f1;
    c.recall += w * score.classic.prf.recall;
    c.f1_tolerant += w * score.tolerant.prf.f1;
    c.recall_tolerant += w * score.tolerant.prf.recall;
  }
  for (auto& [category, c] : out) {
    if (c.total_weight <= 0.0) {
      c.f1 = c.recall = c.f1_tolerant = c.recall_tolerant = 0.0;
      continue;
    }
    c.f1 /= c.total_weight;
    c.recall /= c.total_weight;
    c.f1_tolerant /= c.total_weight;
    c.recall_tolerant /= c.total_weight;
  }
  return out;
}

}  // namespace mqmspan::refspan
