#include "mqmspan/reliability.hpp"

#include <algorithm>
#include <set>

#include "mqmspan/errors.hpp"
#include "mqmspan/grounding.hpp"
#include "mqmspan/io.hpp"
#include "mqmspan/text.hpp"

namespace mqmspan {

namespace {

void require_shape(const RaterGrid& grid, std::size_t min_segments) {
  if (grid.raters.size() < 2) throw PreconditionError("reliability needs at least two raters");
  if (grid.segments.size() < min_segments)
    throw PreconditionError("reliability needs at least two segments");
}

/// Histogram of "k raters marked the character as error" over the given segments.
void add_character_units(const RaterGrid& grid, const std::vector<std::size_t>& segments,
                         Coincidences& o) {
  const auto m = grid.raters.size();
  std::vector<double> histogram(m + 1, 0.0);
  for (auto s : segments) {
    const auto& row = grid.masks[s];
    const auto length = row.front().length;
    for (const auto& mask : row)
      if (mask.length != length) throw ValidationError("mask lengths differ on segment '" + grid.segments[s] + "'");
    for (std::size_t i = 0; i < length; ++i) {
      std::size_t k = 0;
      for (const auto& mask : row) k += mask.severity_at[i] != CharSeverity::none ? 1 : 0;
      histogram[k] += 1.0;
    }
  }
  for (std::size_t k = 0; k <= m; ++k)
    if (histogram[k] > 0) o.add_unit({m - k, k}, histogram[k]);
}

}  // namespace

RaterGrid build_grid(const std::vector<Segment>& corpus,
                     const std::map<std::string, std::vector<AnnotationSet>>& by_rater) {
  const auto index = index_segments(corpus);
  RaterGrid grid;
  std::set<std::string> segment_ids;
  std::map<std::string, std::map<std::string, const AnnotationSet*>> cells;
  for (const auto& [rater, sets] : by_rater) {
    require_known_segments(sets, index);
    grid.raters.push_back(rater);
    for (const auto& a : sets) {
      segment_ids.insert(a.segment_id);
      cells[rater][a.segment_id] = &a;
    }
  }
  for (const auto& segment : corpus) {
    if (!segment_ids.contains(segment.segment_id)) continue;
    const auto length = text::length(segment.target_text);
    std::vector<int> labels;
    std::vector<CharMask> masks;
    for (const auto& rater : grid.raters) {
      const auto it = cells[rater].find(segment.segment_id);
      if (it == cells[rater].end())
        throw ValidationError("rater '" + rater + "' has no annotation for segment '" +
                              segment.segment_id + "'");
      const auto grounded = ground(*it->second, segment);
      const bool any = std::any_of(grounded.spans.begin(), grounded.spans.end(),
                                   [](const ErrorSpan& s) { return s.side == Side::target; });
      labels.push_back(any ? 1 : 0);
      masks.push_back(build_mask(segment.segment_id, length, grounded.spans).mask);
    }
    grid.segments.push_back(segment.segment_id);
    grid.languages.push_back(segment.language);
    grid.labels.push_back(std::move(labels));
    grid.masks.push_back(std::move(masks));
  }
  return grid;
}

Coincidences::Coincidences(std::size_t categories) : k_(categories), o_(categories * categories, 0.0) {}

void Coincidences::add_unit(const std::vector<std::size_t>& category_counts, double multiplicity) {
  if (category_counts.size() != k_) throw PreconditionError("category count mismatch");
  std::size_t m = 0;
  for (auto c : category_counts) m += c;
  if (m < 2) return;
  const double scale = multiplicity / static_cast<double>(m - 1);
  for (std::size_t c = 0; c < k_; ++c) {
    for (std::size_t k = 0; k < k_; ++k) {
      const double nc = static_cast<double>(category_counts[c]);
      const double pairs = c == k ? nc * (nc - 1.0) : nc * static_cast<double>(category_counts[k]);
      o_[c * k_ + k] += pairs * scale;
    }
  }
}

double Coincidences::total() const noexcept {
  double t = 0.0;
  for (double v : o_) t += v;
  return t;
}

Alpha alpha_from(const Coincidences& o) {
  Alpha out;
  const auto k = o.categories();
  std::vector<double> marginal(k, 0.0);
  double n = 0.0;
  double off_diagonal = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      marginal[c] += o.at(c, d);
      if (c != d) off_diagonal += o.at(c, d);
    }
    n += marginal[c];
  }
  out.pairable_values = n;
  if (n < 2.0) return out;
  double expected_pairs = 0.0;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d)
      if (c != d) expected_pairs += marginal[c] * marginal[d];
  out.observed_disagreement = off_diagonal / n;
  out.expected_disagreement = expected_pairs / (n * (n - 1.0));
  if (out.expected_disagreement <= 0.0) return out;
  out.defined = true;
  out.value = 1.0 - out.observed_disagreement / out.expected_disagreement;
  return out;
}

Alpha alpha_nominal(const RaterGrid& grid) {
  require_shape(grid, 2);
  Coincidences o(2);
  for (const auto& row : grid.labels) {
    std::vector<std::size_t> counts(2, 0);
    for (int label : row) ++counts[label != 0 ? 1 : 0];
    o.add_unit(counts);
  }
  return alpha_from(o);
}

UnitizedAlpha alpha_unitized(const RaterGrid& grid) {
  require_shape(grid, 1);
  UnitizedAlpha out;
  std::vector<std::size_t> all(grid.segments.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Coincidences global(2);
  add_character_units(grid, all, global);
  out.global = alpha_from(global);

  std::map<std::string, std::vector<std::size_t>> by_language;
  for (std::size_t i = 0; i < grid.segments.size(); ++i) by_language[grid.languages[i]].push_back(i);
  std::vector<double> defined;
  for (const auto& [lang, segments] : by_language) {
    Coincidences o(2);
    add_character_units(grid, segments, o);
    const auto a = alpha_from(o);
    out.per_language.emplace(lang, a);
    if (a.defined) defined.push_back(a.value);
  }
  if (!defined.empty()) {
    const auto [lo, hi] = std::minmax_element(defined.begin(), defined.end());
    out.min = *lo;
    out.max = *hi;
  }
  return out;
}

}  // namespace mqmspan
