#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mqmspan/char_metrics.hpp"
#include "mqmspan/model.hpp"

namespace mqmspan {

/// Every (segment, rater) cell is filled: a segment-level any-error label and a mask.
struct RaterGrid {
  std::vector<std::string> segments;
  std::vector<std::string> languages;  // parallel to segments
  std::vector<std::string> raters;
  std::vector<std::vector<int>> labels;       // [segment][rater]
  std::vector<std::vector<CharMask>> masks;   // [segment][rater]
};

/// Builds the grid from a corpus and the annotations of all raters. Throws
/// ValidationError when a rater lacks a record for one of the selected segments.
RaterGrid build_grid(const std::vector<Segment>& corpus,
                     const std::map<std::string, std::vector<AnnotationSet>>& by_rater);

/// Value-by-value coincidence matrix of a nominal reliability design.
class Coincidences {
 public:
  explicit Coincidences(std::size_t categories);

  /// Adds one unit given how many of its pairable values fall into each category.
  /// Units with fewer than two values are not pairable and are skipped.
  void add_unit(const std::vector<std::size_t>& category_counts, double multiplicity = 1.0);

  std::size_t categories() const noexcept { return k_; }
  double at(std::size_t c, std::size_t k) const { return o_[c * k_ + k]; }
  double total() const noexcept;

 private:
  std::size_t k_;
  std::vector<double> o_;
};

struct Alpha {
  double value = 0.0;
  bool defined = false;  // false when the data show no variation (De = 0)
  double observed_disagreement = 0.0;
  double expected_disagreement = 0.0;
  double pairable_values = 0.0;
};

/// Krippendorff's alpha for nominal data: 1 - Do/De with Do = off-diagonal mass / n and
/// De = sum_{c != k} n_c n_k / (n (n - 1)).
Alpha alpha_from(const Coincidences& o);

/// Nominal alpha on segment-level any-error labels. Needs >= 2 raters and >= 2 segments.
Alpha alpha_nominal(const RaterGrid& grid);

struct UnitizedAlpha {
  Alpha global;
  std::map<std::string, Alpha> per_language;
  /// Range over languages with a defined coefficient; not a confidence interval.
  double min = 0.0;
  double max = 0.0;
};

/// Character-level nominal alpha on the error masks: every character of every segment
/// is a unit labelled error/no-error by each rater.
UnitizedAlpha alpha_unitized(const RaterGrid& grid);

}  // namespace mqmspan
