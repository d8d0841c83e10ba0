#include <doctest.h>

#include "helpers.hpp"
#include "mqmspan/errors.hpp"
#include "mqmspan/impact.hpp"
#include "mqmspan/stats.hpp"
#include "oracles.hpp"

using namespace mqmspan;
using namespace mqmspan::impact;

namespace {

Segment seg(std::string id, std::string item, std::string lang) {
  auto s = testing::segment(std::move(id), std::move(lang), "Ziel Text hier");
  s.item_id = std::move(item);
  return s;
}

}  // namespace

TEST_CASE("assemble joins correctness, annotations and anomalies") {
  const std::vector<Segment> corpus{seg("q1-de", "q1", "de"), seg("q1-fr", "q1", "fr"), seg("q2-de", "q2", "de")};
  std::vector<CorrectnessRecord> c;
  for (const char* m : {"m1", "m2"}) {
    c.push_back({"q1", "en", "ds", m, true});
    c.push_back({"q1", "de", "ds", m, false});
    c.push_back({"q1", "fr", "ds", m, true});
    c.push_back({"q2", "de", "ds", m, true});  // no English record for q2
  }
  const std::vector<AnnotationSet> ann{{"h", "q1-de", {testing::span(0, 4, "Ziel")}}, {"h", "q1-fr", {}},
                                       {"h", "q2-de", {}}};
  SourceAnomaly anomaly;
  anomaly.segment_id = "q1-de";
  const auto out = assemble(c, corpus, ann, {anomaly});
  REQUIRE(out.rows.size() == 4);
  CHECK(out.dropped.missing_english == 2);
  for (const auto& r : out.rows) {
    CHECK(r.item_id == "q1");
    CHECK(r.y_en == 1);
    CHECK(r.s == 1);
    CHECK(r.t == (r.language == "de" ? 1 : 0));
    CHECK(r.y == (r.language == "fr" ? 1 : 0));
  }

  const auto filtered = assemble(c, corpus, ann, {}, {"other"});
  CHECK(filtered.rows.empty());
  CHECK(filtered.dropped.excluded_dataset == 6);

  const auto partial = assemble(c, corpus, {{"h", "q1-de", {}}}, {});
  CHECK(partial.rows.size() == 2);
  CHECK(partial.dropped.missing_annotation == 2);
  for (const auto& r : partial.rows) CHECK(r.t == 0);

  auto dup = c;
  dup.push_back(c.front());
  CHECK_THROWS_AS(assemble(dup, corpus, ann, {}), ValidationError);
}

TEST_CASE("spec rows and names") {
  std::vector<RegressionRow> rows{{"a", "de", "ds", "m", 1, 0, 1, 0}};
  CHECK_THROWS_WITH_AS(spec_rows(rows, {ModelSpec::Kind::b, true}), "empty Spec B subset", ValidationError);
  CHECK(ModelSpec{ModelSpec::Kind::a, false}.name() == "A¬S");
  CHECK(ModelSpec{ModelSpec::Kind::b, true}.name() == "B");
}

TEST_CASE("overall loss") {
  CHECK(overall_loss(0.63, -6.76) == doctest::Approx(4.2588));
  CHECK(overall_loss(0.5, 0.0) == 0.0);
  std::vector<RegressionRow> none_exposed(5);
  CHECK(overall_loss(none_exposed, -7.0) == 0.0);
}

TEST_CASE("block bootstrap") {
  oracle::Truth truth;
  const auto rows = oracle::simulate(truth, 300, 21);
  SUBCASE("deterministic for a seed and thread count independent") {
    const auto a = block_bootstrap(rows, {}, 40, 9, 1);
    const auto b = block_bootstrap(rows, {}, 40, 9, 3);
    CHECK(a.ame_t.ci.lower == b.ame_t.ci.lower);
    CHECK(a.ame_t.ci.upper == b.ame_t.ci.upper);
    CHECK(a.ame_s->ci.upper == b.ame_s->ci.upper);
    CHECK(a.boot_success + a.boot_fail == 40);
    CHECK(a.n_items == 300);
  }
  SUBCASE("one item collapses the interval") {
    const std::vector<RegressionRow> one{{"x", "de", "ds", "m", 1, 1, 0, 0}, {"x", "de", "ds", "m", 0, 1, 1, 0},
           {"x", "de", "ds", "m", 1, 1, 1, 0}, {"x", "de", "ds", "m", 0, 1, 0, 0},
           {"x", "de", "ds", "m", 1, 1, 0, 0}, {"x", "de", "ds", "m", 0, 0, 1, 0},
           {"x", "de", "ds", "m", 1, 0, 0, 0}};
    const auto r = block_bootstrap(one, {ModelSpec::Kind::a, false}, 20, 3);
    CHECK(r.ame_t.ci.lower == r.ame_t.point);
    CHECK(r.ame_t.ci.upper == r.ame_t.point);
  }
  CHECK_THROWS_AS(block_bootstrap(rows, {}, 0, 1), ParameterError);
}

TEST_CASE("rank statistics") {
  const std::vector<double> x{1, 2, 2, 3};
  CHECK(stats::average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(*stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}) == doctest::Approx(1.0));
  CHECK(*stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  // tau-b with a tie in x: pairs (1,2)c (1,3)c (2,3) tied in x -> 2 / sqrt(2*3)
  CHECK(*stats::kendall_tau_b(std::vector<double>{1, 2, 2}, std::vector<double>{1, 2, 3}) ==
        doctest::Approx(2.0 / std::sqrt(6.0)));
  CHECK_FALSE(stats::spearman(std::vector<double>{1, 1}, std::vector<double>{1, 2}).has_value());
  CHECK(stats::percentile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(stats::percentile({1, 2}, 0.25) == 1.25);
}

namespace {

// Each model sees the same T distribution; y depends on T only through a common slope.
std::vector<RegressionRow> uniform_penalty(double beta_t, std::uint64_t seed, std::size_t items = 1500) {
  oracle::Truth truth;
  truth.beta_t = beta_t;
  truth.model = {{"m1", -0.8}, {"m2", -0.2}, {"m3", 0.3}, {"m4", 0.9}, {"m5", 1.5}};
  return oracle::simulate(truth, items, seed);
}

}  // namespace

TEST_CASE("counterfactual ranking under a uniform penalty") {
  const auto rows = uniform_penalty(-0.5, 41);
  const auto f = impact::fit(rows, ModelSpec{});
  const auto r = counterfactual_ranking(rows, f, 50, 2);
  REQUIRE(r.correlations_available);
  CHECK(r.spearman->point >= 0.99);
  for (const auto& m : r.models) CHECK(m.uplift_pp > 0.0);
  CHECK(r.uplift_ci.size() == r.models.size());
}

TEST_CASE("zero T effect leaves the ranking and accuracies unchanged") {
  // Within every model, T=0 and T=1 rows have identical outcome distributions.
  std::vector<RegressionRow> rows;
  const std::vector<std::pair<std::string, int>> models{{"a", 3}, {"b", 5}, {"c", 7}};
  int item = 0;
  for (int rep = 0; rep < 4; ++rep)
    for (int t = 0; t < 2; ++t)
      for (int k = 0; k < 10; ++k, ++item)
        for (const auto& [model, ones] : models)
          rows.push_back({"i" + std::to_string(item), "de", "ds", model, k < ones ? 1 : 0, 1, t, 0});
  FitOptions o;
  o.regressors = {Regressor::t};
  const auto f = fit(rows, o);
  REQUIRE(f.converged);
  CHECK(std::abs(*f.coefficient(Regressor::t)) < 1e-10);
  const auto r = counterfactual_ranking(rows, f, 20, 4);
  for (const auto& m : r.models) CHECK(std::abs(m.uplift_pp) < 1e-9);
  CHECK(r.spearman->point == doctest::Approx(1.0));
  CHECK(r.kendall->point == doctest::Approx(1.0));
}

TEST_CASE("shifting every linear predictor leaves both rankings unchanged") {
  const auto rows = uniform_penalty(-0.5, 43, 800);
  auto f = impact::fit(rows, ModelSpec{});
  const auto before = model_accuracies(rows, f);
  f.coefficients[0] += 0.7;
  const auto after = model_accuracies(rows, f);
  std::vector<double> cf_before, cf_after, obs_before, obs_after;
  for (std::size_t i = 0; i < before.size(); ++i) {
    cf_before.push_back(before[i].counterfactual);
    cf_after.push_back(after[i].counterfactual);
    obs_before.push_back(before[i].observed);
    obs_after.push_back(after[i].observed);
  }
  CHECK(stats::average_ranks(cf_before) == stats::average_ranks(cf_after));
  CHECK(stats::average_ranks(obs_before) == stats::average_ranks(obs_after));
}

TEST_CASE("a single evaluation model reports uplifts without correlations") {
  oracle::Truth truth;
  truth.model = {{"only", 0.0}};
  const auto rows = oracle::simulate(truth, 400, 3);
  const auto f = impact::fit(rows, ModelSpec{});
  const auto r = counterfactual_ranking(rows, f, 10, 1);
  CHECK_FALSE(r.correlations_available);
  CHECK_FALSE(r.spearman.has_value());
  CHECK(r.models.size() == 1);
  CHECK(r.models[0].uplift_pp > 0.0);
  CHECK_FALSE(r.warnings.empty());
}
