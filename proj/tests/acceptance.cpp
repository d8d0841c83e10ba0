#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "helpers.hpp"
#include "mqmspan/char_metrics.hpp"
#include "mqmspan/impact.hpp"
#include "mqmspan/refspan.hpp"
#include "mqmspan/reliability.hpp"
#include "mqmspan/resample.hpp"
#include "mqmspan/span_match.hpp"
#include "mqmspan/text.hpp"
#include "oracles.hpp"

using namespace mqmspan;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
    }
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %s  [%s] (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// Criterion 1
void oc_example(Outcome& o) {
  const double v = oc_score({811, 871}, {805, 845});
  o.require(v == 0.85, "oc_score != 0.85");
  o.require(v == 34.0 / 40.0, "oc_score != 34/40");
  o.detail << "oc=" << fmt(v);
}

// Criterion 2
void sim_example(Outcome& o) {
  const std::string a = "sich stärker verfestigen";
  const std::string b = "die Mitglieder der Gruppe A sich stärker verfestigen";
  const double v = sim_score(a, b);
  o.require(std::abs(v - 44.0 / 72.0) < 1e-9, "sim != 44/72");
  o.require(text::length(a) - 2 == 22 && text::length(b) - 2 == 50, "trigram counts != 22/50");
  o.detail << "sim=" << fmt(v, 12) << " trigrams=" << text::length(a) - 2 << "/" << text::length(b) - 2;
}

// Criterion 3
void projection_toy(Outcome& o) {
  const auto p = refspan::project({"toy", "de", "addition", "Der Ausschuss genehmigte den Vorschlag.",
                                   "Der Ausschuss genehmigte den Vorschlag.",
                                   "Der Ausschuss lehnte den Vorschlag ab."});
  o.require(p.kept(), "item not kept");
  o.require(p.gold_text == "genehmigte", "gold span '" + p.gold_text + "'");
  o.detail << "kept=" << p.kept() << " gold='" << p.gold_text << "'";
}

// Criterion 4
void overall_loss_check(Outcome& o) {
  const double v = impact::overall_loss(0.63, -6.76);
  o.require(std::abs(v - 4.3) <= 0.1, "not within 0.1 pp of 4.3");
  o.require(std::abs(v - 4.2588) < 1e-9, "not 0.63*6.76");
  o.detail << "loss=" << fmt(v) << " pp";
}

ErrorSpan make_span(std::size_t start, std::size_t len, const std::u32string& target) {
  return testing::span(start, start + len, text::encode(target.substr(start, len)));
}

// Criterion 5
void span_properties(Outcome& o) {
  std::mt19937_64 rng(5150);
  const std::u32string alphabet = U"abcdeäöü ";
  std::size_t instances = 0;
  bool symmetric = true, monotone = true, bounded = true, self = true;
  for (int trial = 0; trial < 1500; ++trial) {
    std::u32string target;
    for (int i = 0; i < 40; ++i) target += alphabet[rng() % alphabet.size()];
    auto draw = [&] {
      std::vector<ErrorSpan> v;
      for (auto n = rng() % 6; n > 0; --n) {
        const auto b = rng() % 30;
        v.push_back(make_span(b, 1 + rng() % 10, target));
      }
      return v;
    };
    const auto gold = draw();
    const auto pred = draw();
    ++instances;
    for (const auto c : {Criterion::oc, Criterion::sim}) {
      const auto& sweep = c == Criterion::oc ? kOcSweep : kSimSweep;
      std::size_t last_tp = SIZE_MAX;
      for (const double t : sweep) {
        const MatchConfig cfg{c, t, c == Criterion::sim};
        const auto ab = greedy_match(gold, pred, cfg);
        const auto ba = greedy_match(pred, gold, cfg);
        symmetric = symmetric && prf(ab.counts).f1 == prf(ba.counts).f1;
        if (last_tp != SIZE_MAX) monotone = monotone && ab.counts.tp <= last_tp;
        last_tp = ab.counts.tp;
        if (c == Criterion::oc) {
          const auto best = oracle::optimal_matching(gold.size(), pred.size(), [&](std::size_t g, std::size_t p) {
            return oc_score(gold[g].interval(), pred[p].interval()) >= t - 1e-12;
          });
          const Counts opt{best, pred.size() - best, gold.size() - best};
          bounded = bounded && prf(ab.counts).f1 <= prf(opt).f1 + 1e-15;
        }
      }
      if (!gold.empty()) {
        const MatchConfig cfg = c == Criterion::oc ? MatchConfig::oc() : MatchConfig::sim();
        self = self && prf(greedy_match(gold, gold, cfg).counts).f1 == 1.0;
      }
    }
  }
  o.require(symmetric, "Span-F1 asymmetric");
  o.require(monotone, "TP not monotone in threshold");
  o.require(bounded, "greedy F1 above optimal");
  o.require(self, "self-agreement F1 != 1");
  o.detail << instances << " random instances (<=5 spans/side), OC and SIM";
}

MaskSet random_masks(std::mt19937_64& rng, std::size_t segments, std::size_t length) {
  MaskSet m;
  const Severity sev[] = {Severity::minor, Severity::major, Severity::critical, Severity::unknown};
  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<ErrorSpan> spans;
    for (auto n = rng() % 3; n > 0; --n) {
      const auto b = rng() % (length - 1);
      spans.push_back(testing::span(b, b + 1 + rng() % (length - b - 1), "x", sev[rng() % 4]));
    }
    const auto id = "s" + std::to_string(s);
    m[id] = build_mask(id, length, spans).mask;
  }
  return m;
}

bool identical(const MaskSet& a, const MaskSet& b, bool severities) {
  for (const auto& [id, m] : a) {
    const auto& n = b.at(id);
    if (m.error_chars != n.error_chars) return false;
    if (severities) {
      for (std::size_t i = 0; i < m.length; ++i) {
        if (m.severity_at[i] != n.severity_at[i]) return false;
        if (m.severity_at[i] == CharSeverity::unknown) return false;
      }
    }
  }
  return true;
}

// Criterion 6
void char_properties(Outcome& o) {
  std::mt19937_64 rng(606);
  bool dominated = true, iff_f1 = true, iff_f1w = true;
  std::size_t pairs = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const auto g = random_masks(rng, 3, 12);
    const auto p = rng() % 4 == 0 ? g : random_masks(rng, 3, 12);
    const double f1 = char_f1(g, p);
    const double f1w = char_f1w(g, p);
    ++pairs;
    dominated = dominated && f1w <= f1 + 1e-15;
    iff_f1 = iff_f1 && ((f1 == 1.0) == identical(g, p, false));
    iff_f1w = iff_f1w && ((f1w == 1.0) == identical(g, p, true));
  }
  const auto g = random_masks(rng, 40, 30);
  const auto p = random_masks(rng, 40, 30);
  const auto a = char_ci(g, p, CharMetric::f1, 300, 77, 1);
  const auto b = char_ci(g, p, CharMetric::f1, 300, 77, 3);
  const auto c = char_ci(g, p, CharMetric::f1, 300, 78, 1);
  const bool deterministic = a.lower == b.lower && a.upper == b.upper;
  o.require(dominated, "Char-F1w > Char-F1");
  o.require(iff_f1, "Char-F1 = 1 iff identical masks violated");
  o.require(iff_f1w, "Char-F1w = 1 iff identical masks and severities violated");
  o.require(deterministic, "bootstrap not deterministic");
  o.detail << pairs << " mask pairs; CI(seed 77)=[" << fmt(a.lower) << "," << fmt(a.upper) << "] repeated"
           << (c.lower != a.lower || c.upper != a.upper ? ", differs for seed 78" : "");
}

RaterGrid label_grid(const std::vector<std::vector<int>>& labels) {
  RaterGrid g;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    g.segments.push_back("s" + std::to_string(s));
    g.languages.push_back("de");
  }
  for (std::size_t r = 0; r < labels.front().size(); ++r) g.raters.push_back("r" + std::to_string(r));
  g.labels = labels;
  return g;
}

// Criterion 7
void reliability_properties(Outcome& o) {
  const auto perfect = alpha_nominal(label_grid({{1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0}}));
  o.require(perfect.defined && perfect.value == 1.0, "alpha != 1 on perfect agreement");
  const auto example = alpha_nominal(label_grid({{1, 1}, {1, 0}, {0, 0}, {0, 1}}));
  o.require(std::abs(example.value - 0.125) < 1e-9, "4-segment example != 0.125");
  std::mt19937_64 rng(707);
  std::vector<std::vector<int>> labels(10000, std::vector<int>(2));
  for (auto& row : labels)
    for (auto& v : row) v = static_cast<int>(rng() % 2);
  const auto random = alpha_nominal(label_grid(labels));
  o.require(std::abs(random.value) < 0.05, "|alpha| >= 0.05 on random labels");
  o.detail << "perfect=" << fmt(perfect.value) << " example=" << fmt(example.value, 12)
           << " random(n=10000)=" << fmt(random.value);
}

// Criterion 8
void refspan_properties(Outcome& o) {
  using namespace refspan;
  std::mt19937_64 rng(808);
  bool dominated = true, slack0 = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ProjectedItem> items;
    std::vector<TokenPrediction> preds;
    for (int i = 0; i < 5; ++i) {
      ProjectedItem it;
      it.item_id = "i" + std::to_string(i);
      it.phenomenon = i % 2 ? "addition" : "omission";
      it.status = Status::kept;
      it.reference_tokens = 20;
      const auto b = rng() % 15;
      it.gold = {b, b + 1 + rng() % 3};
      items.push_back(it);
      for (auto n = rng() % 3; n > 0; --n) {
        const auto pb = rng() % 18;
        preds.push_back({it.item_id, {pb, pb + 1 + rng() % (20 - pb)}});
      }
    }
    const auto r = score_spans(items, preds, 1 + rng() % 5);
    const auto r0 = score_spans(items, preds, 0);
    for (const auto& [name, s] : r.per_phenomenon) {
      dominated = dominated && s.tolerant.counts.tp >= s.classic.counts.tp && s.tolerant.prf.f1 >= s.classic.prf.f1;
      const auto& z = r0.per_phenomenon.at(name);
      slack0 = slack0 && z.tolerant.counts == z.classic.counts;
    }
  }
  const std::vector<std::string> vocab{"der", "die", "das", "Haus", "Baum", "sah", "und", "ein", "klein", "groß"};
  std::size_t recovered = 0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = 3 + rng() % 10;
    std::vector<std::string> ref;
    for (std::size_t k = 0; k < len; ++k) ref.push_back(vocab[rng() % vocab.size()]);
    const auto pos = rng() % len;
    ref[pos] = "Wort" + std::to_string(i);
    std::string reference, incorrect;
    for (std::size_t k = 0; k < len; ++k) {
      reference += (k ? " " : "") + ref[k];
      incorrect += (k ? " " : "") + (k == pos ? std::string("Fehler") : ref[k]);
    }
    reference += ".";
    incorrect += ".";
    const auto p = project({"r" + std::to_string(i), "de", "mistranslation", reference, reference, incorrect});
    if (p.kept() && p.gold == Interval{pos, pos + 1} && p.gold_text == ref[pos]) ++recovered;
  }
  std::map<std::string, PhenomenonScore> scores;
  scores["ordering-mismatch"].items = 100;
  scores["ordering-mismatch"].classic.prf.f1 = 0.2;
  scores["addition"].items = 10;
  scores["addition"].classic.prf.f1 = 0.8;
  const auto& map = default_phenomenon_map();
  const double mean_n = aggregate(scores, map, Weighting::mean_n).at(Category::accuracy).f1;
  const double mean_cap = aggregate(scores, map, Weighting::mean_cap, 25).at(Category::accuracy).f1;
  o.require(dominated, "tolerant < classic");
  o.require(slack0, "k=0 tolerant != classic");
  o.require(recovered == n, "round-trip recovery below 100%");
  o.require(std::abs(mean_n - 0.2545) < 1e-4 && std::abs(mean_n - 28.0 / 110.0) < 1e-12, "meanN");
  o.require(std::abs(mean_cap - 0.3714) < 1e-4 && std::abs(mean_cap - 13.0 / 35.0) < 1e-12, "meanCap");
  o.detail << "recovery " << recovered << "/" << n << " meanN=" << fmt(mean_n) << " meanCap(25)=" << fmt(mean_cap);
}

// Criterion 9
void regression_correctness(Outcome& o) {
  using namespace impact;
  std::vector<RegressionRow> rows;
  auto add = [&](int t, int y, int n) {
    for (int i = 0; i < n; ++i) rows.push_back({"i" + std::to_string(rows.size()), "de", "ds", "m", y, 1, t, 0});
  };
  add(0, 1, 3);
  add(0, 0, 1);
  add(1, 1, 1);
  add(1, 0, 3);
  FitOptions opt;
  opt.regressors = {Regressor::t};
  const auto f = impact::fit(rows, opt);
  const auto grid = oracle::grid_mle(rows);
  const double b0 = *f.coefficient("intercept");
  const double bt = *f.coefficient(Regressor::t);
  o.require(f.converged, "two-cell fit did not converge");
  o.require(std::abs(b0 - grid.b0) < 1e-3 && std::abs(bt - grid.bt) < 1e-3, "IRLS vs grid MLE");
  o.require(std::abs(b0 - std::log(3.0)) < 1e-6 && std::abs(bt + 2 * std::log(3.0)) < 1e-6, "closed form");
  const double a = ame(f, rows, Regressor::t);
  o.require(std::abs(a + 50.0) < 0.1, "two-cell AME != -50 pp");

  oracle::Truth truth;
  truth.beta_t = -0.4;
  const auto synth = oracle::simulate(truth, 5000, 909);
  const auto boot = block_bootstrap(synth, ModelSpec{}, 500, kDefaultSeed, 1);
  const double target = oracle::true_ame_t(truth, synth);
  o.require(boot.ame_t.ci.upper < 0.0, "synthetic AME(T) CI not entirely below zero");
  o.require(std::abs(boot.ame_t.point - target) <= 1.5, "synthetic AME(T) off by more than 1.5 pp");
  o.detail << "b0=" << fmt(b0) << " bT=" << fmt(bt) << " grid=(" << fmt(grid.b0) << "," << fmt(grid.bt)
           << ") AME=" << fmt(a) << "pp; synthetic AME=" << fmt(boot.ame_t.point, 4) << " CI=["
           << fmt(boot.ame_t.ci.lower, 4) << "," << fmt(boot.ame_t.ci.upper, 4) << "] oracle=" << fmt(target, 4)
           << " boot ok/fail=" << boot.boot_success << "/" << boot.boot_fail;
}

// Criterion 10
void ranking(Outcome& o) {
  using namespace impact;
  oracle::Truth truth;
  truth.beta_t = -0.5;
  truth.model = {{"m1", -0.8}, {"m2", -0.2}, {"m3", 0.3}, {"m4", 0.9}, {"m5", 1.5}};
  const auto rows = oracle::simulate(truth, 1500, 1010);
  const auto fa = impact::fit(rows, ModelSpec{});
  const auto r = counterfactual_ranking(rows, fa, 200, kDefaultSeed, 1);
  bool all_positive = !r.models.empty();
  for (const auto& m : r.models) all_positive = all_positive && m.uplift_pp > 0.0;
  o.require(r.spearman && r.spearman->point >= 0.99, "uniform penalty: Spearman < 0.99");
  o.require(all_positive, "uniform penalty: some uplift <= 0");

  // T independent of y within every model: the fitted T coefficient vanishes.
  std::vector<RegressionRow> flat;
  const std::vector<std::pair<std::string, int>> models{{"a", 3}, {"b", 5}, {"c", 7}, {"d", 8}};
  int item = 0;
  for (int rep = 0; rep < 5; ++rep)
    for (int t = 0; t < 2; ++t)
      for (int k = 0; k < 10; ++k, ++item)
        for (const auto& [model, ones] : models)
          flat.push_back({"i" + std::to_string(item), "de", "ds", model, k < ones ? 1 : 0, 1, t, 0});
  FitOptions opt;
  opt.regressors = {Regressor::t};
  const auto f0 = impact::fit(flat, opt);
  const auto r0 = counterfactual_ranking(flat, f0, 100, kDefaultSeed, 1);
  double max_uplift = 0.0;
  for (const auto& m : r0.models) max_uplift = std::max(max_uplift, std::abs(m.uplift_pp));
  o.require(r0.spearman && r0.spearman->point == 1.0, "beta_T = 0: Spearman != 1");
  o.require(r0.kendall && r0.kendall->point == 1.0, "beta_T = 0: Kendall != 1");
  o.require(max_uplift < 1e-9, "beta_T = 0: uplift != 0");
  o.detail << "uniform: rho=" << fmt(r.spearman ? r.spearman->point : NAN) << " min uplift=";
  double lo = INFINITY;
  for (const auto& m : r.models) lo = std::min(lo, m.uplift_pp);
  o.detail << fmt(lo, 4) << "pp; beta_T=0: rho=" << fmt(r0.spearman ? r0.spearman->point : NAN)
           << " tau=" << fmt(r0.kendall ? r0.kendall->point : NAN) << " max|uplift|=" << max_uplift;
}

// Criterion 11
void reproducibility(Outcome& o) {
  using testing::fixture;
  const std::string span = testing::span_inputs();
  const std::string imp = testing::impact_inputs();
  const std::vector<std::pair<std::string, std::string>> runs{
      {"agree", "agree --sweep " + span},
      {"char", "char --boot 300 " + span},
      {"reliability", "reliability " + span},
      {"overlap", "overlap " + span},
      {"stats", "stats " + span},
      {"project", "project --aces " + fixture("aces.jsonl")},
      {"spanloc", "spanloc --aces " + fixture("aces.jsonl") + " --pred " + fixture("token_pred.jsonl")},
      {"impact", "impact --boot 100 --seed 11 " + imp},
      {"rank", "rank --boot 100 --seed 11 " + imp},
  };
  std::size_t same = 0;
  for (const auto& [name, args] : runs) {
    testing::ScratchDir a, b;
    const auto ra = testing::run_cli(args + " --jobs 1", a);
    const auto rb = testing::run_cli(args + " --jobs 2", b);
    const bool ok = ra.exit_code == 0 && rb.exit_code == 0 &&
                    testing::slurp(a.path() / (name + ".json")) == testing::slurp(b.path() / (name + ".json")) &&
                    !testing::slurp(a.path() / (name + ".json")).empty();
    o.require(ok, name);
    same += ok;
  }
  o.detail << same << "/" << runs.size() << " subcommands byte-identical across two runs";
}

}  // namespace

int main() {
  criterion(1, "OC worked example", oc_example);
  criterion(2, "SIM worked example", sim_example);
  criterion(3, "projection toy", projection_toy);
  criterion(4, "overall-loss check", overall_loss_check);
  criterion(5, "span matching properties", span_properties);
  criterion(6, "character metric properties", char_properties);
  criterion(7, "reliability properties", reliability_properties);
  criterion(8, "refspan properties", refspan_properties);
  criterion(9, "regression correctness", regression_correctness);
  criterion(10, "counterfactual ranking", ranking);
  criterion(11, "reproducibility", reproducibility);
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
