#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/eval.hpp"

using namespace vegrisk;
using namespace vegrisk::eval;
using features::FeatureTable;

namespace {

Date day(int i) { return make_date(2020, 1, 1) + std::chrono::days{i}; }

FeatureTable wind_evi_table(const std::vector<double>& wspd, const std::vector<double>& evi,
                            const std::vector<int>& labels) {
  FeatureTable t;
  t.names = {"wspd", "EVI"};
  for (std::size_t i = 0; i < wspd.size(); ++i) {
    const std::vector<double> row{wspd[i], evi[i]};
    t.append(row, labels[i], day(static_cast<int>(i)));
  }
  return t;
}

HeatmapCell cell(std::size_t count, double actual, double predicted) {
  HeatmapCell c;
  c.count = count;
  c.actual_rate = actual;
  c.predicted_rate = predicted;
  return c;
}

}  // namespace

TEST_CASE("temporal_split: exact 80/20 on ten days") {
  std::vector<double> v(10, 1.0);
  std::vector<int> l(10, 0);
  const auto t = wind_evi_table(v, v, l);
  const auto s = temporal_split(t, 0.8);
  CHECK(s.train.rows() == 8);
  CHECK(s.test.rows() == 2);
  CHECK(s.train.dates.back() == day(7));
  CHECK(s.test.dates.front() == day(8));
  CHECK(s.split_date == day(8));
}

TEST_CASE("temporal_split: boundary property and row counts over many sizes") {
  for (int n = 2; n < 400; n += 7) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<int> l(static_cast<std::size_t>(n), 0);
    const auto t = wind_evi_table(v, v, l);
    for (double f : {0.1, 0.5, 0.8, 0.93}) {
      const auto s = temporal_split(t, f);
      REQUIRE(s.train.rows() + s.test.rows() == t.rows());
      REQUIRE(std::abs(static_cast<double>(s.train.rows()) - f * n) <= 1.0);
      if (s.test.rows() && s.train.rows()) REQUIRE(s.train.dates.back() < s.test.dates.front());
    }
  }
  const auto days = [] {
    std::vector<double> v(3653, 0.0);
    std::vector<int> l(3653, 0);
    return wind_evi_table(v, v, l);
  }();
  CHECK(temporal_split(days, 0.8).test.rows() == 730);
}

TEST_CASE("temporal_split: rejects unsorted input and bad fractions") {
  auto t = wind_evi_table({1, 2, 3}, {1, 2, 3}, {0, 0, 0});
  CHECK_THROWS_AS(temporal_split(t, 1.0), ValidationError);
  CHECK_THROWS_AS(temporal_split(t, 0.0), ValidationError);
  std::swap(t.dates[0], t.dates[2]);
  CHECK_THROWS_AS(temporal_split(t, 0.5), ValidationError);
}

TEST_CASE("classification_metrics: hand cases") {
  // tp=3, fp=1, fn=1, tn=2
  const std::vector<int> labels{1, 1, 1, 0, 1, 0, 0};
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.6, 0.2, 0.1, 0.3};
  const auto m = classification_metrics(labels, scores, 0.5);
  CHECK(m.confusion == ConfusionCounts{3, 1, 2, 1});
  CHECK(*m.precision == 0.75);
  CHECK(*m.recall == 0.75);
  CHECK(*m.f1 == doctest::Approx(0.75));

  const std::vector<double> low(7, 0.1);
  const auto none = classification_metrics(labels, low, 0.5);
  CHECK_FALSE(none.precision.has_value());
  CHECK(*none.recall == 0.0);
  CHECK_FALSE(none.f1.has_value());

  std::vector<double> perfect;
  for (int l : labels) perfect.push_back(l);
  const auto p = classification_metrics(labels, perfect, 0.5);
  CHECK(*p.precision == 1.0);
  CHECK(*p.recall == 1.0);
  CHECK(*p.f1 == 1.0);

  CHECK_THROWS_AS(classification_metrics(labels, std::vector<double>{0.1}, 0.5), ValidationError);
}

TEST_CASE("roc_auc: hand cases") {
  CHECK(*roc_auc(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.9, 0.8, 0.3, 0.1}) == 0.75);
  CHECK(*roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.3, 0.4}) == 1.0);
  CHECK(*roc_auc(std::vector<int>{0, 1, 1, 0}, std::vector<double>(4, 0.3)) == 0.5);
  CHECK_FALSE(roc_auc(std::vector<int>{1, 1}, std::vector<double>{0.3, 0.4}).has_value());
}

TEST_CASE("roc_auc equals pair counting and ignores monotone transforms and order") {
  std::mt19937_64 rng(31);
  for (int fixture = 0; fixture < 50; ++fixture) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng() % 3 == 0);
      scores[i] = static_cast<double>(rng() % 20) / 20.0;  // many ties
    }
    labels[0] = 1;
    labels[1] = 0;
    const double got = *roc_auc(labels, scores);
    REQUIRE(std::abs(got - oracle::pair_count_auc(labels, scores)) <= 1e-12);

    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(3.0 * scores[i]) - 7.0;
    REQUIRE(std::abs(*roc_auc(labels, transformed) - got) <= 1e-12);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pl(n);
    std::vector<double> ps(n);
    for (std::size_t i = 0; i < n; ++i) {
      pl[i] = labels[perm[i]];
      ps[i] = scores[perm[i]];
    }
    REQUIRE(std::abs(*roc_auc(pl, ps) - got) <= 1e-12);
  }
}

TEST_CASE("match_rate: deltas, exact match, zero tolerance, empty cells") {
  const std::vector<HeatmapCell> cells{cell(10, 0.2, 0.21), cell(10, 0.2, 0.16), cell(10, 0.2, 0.30)};
  CHECK(match_rate(cells) == doctest::Approx(2.0 / 3.0));
  const std::vector<HeatmapCell> exact{cell(3, 0.5, 0.5), cell(1, 0.0, 0.0)};
  CHECK(match_rate(exact) == 1.0);
  CHECK(match_rate(cells, 0.0) == 0.0);

  std::vector<HeatmapCell> with_empty = cells;
  with_empty.push_back(HeatmapCell{"x", "y", 0, 0, {}, {}});
  CHECK(match_rate(with_empty) == doctest::Approx(2.0 / 3.0));
  const std::vector<HeatmapCell> empty{HeatmapCell{"x", "y", 0, 0, {}, {}}};
  CHECK_THROWS_AS(match_rate(empty), ValidationError);
  CHECK_THROWS_AS(match_rate(cells, 0.05, 11), ValidationError);
}

TEST_CASE("heatmap cells partition the rows and average scores") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> w(0, 30);
  std::uniform_real_distribution<double> e(0.1, 0.6);
  std::vector<double> wspd(500);
  std::vector<double> evi(500);
  std::vector<int> labels(500);
  std::vector<double> scores(500);
  for (std::size_t i = 0; i < 500; ++i) {
    wspd[i] = w(rng);
    evi[i] = e(rng);
    labels[i] = static_cast<int>(rng() % 5 == 0);
    scores[i] = std::uniform_real_distribution<double>(0, 1)(rng);
  }
  const auto t = wind_evi_table(wspd, evi, labels);
  const auto evi_bins = equal_width_bins(evi, 4);
  const auto cells = heatmap_rates(t, scores, BinSpec::wind_default(), evi_bins);
  CHECK(cells.size() == 24);
  std::size_t total = 0;
  for (const auto& c : cells) {
    total += c.count;
    if (c.count == 0) {
      CHECK_FALSE(c.actual_rate.has_value());
      continue;
    }
    // Recompute the cell by brute force.
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t out = 0;
    const auto wb = BinSpec::wind_default();
    for (std::size_t i = 0; i < 500; ++i) {
      if (wb.label(*wb.find(wspd[i])) == c.wind_bin && evi_bins.label(*evi_bins.find(evi[i])) == c.evi_bin) {
        sum += scores[i];
        ++n;
        out += static_cast<std::size_t>(labels[i]);
      }
    }
    CHECK(n == c.count);
    CHECK(out == c.outages);
    CHECK(*c.predicted_rate == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
  }
  CHECK(total == 500);

  // A single cell reproduces the overall rates.
  const auto one = heatmap_rates(t, scores, BinSpec({0.0}), BinSpec({0.0}));
  REQUIRE(one.size() == 1);
  double mean = 0.0;
  for (double s : scores) mean += s;
  CHECK(*one[0].predicted_rate == doctest::Approx(mean / 500.0));
  CHECK(*one[0].actual_rate ==
        doctest::Approx(std::count(labels.begin(), labels.end(), 1) / 500.0));
}

TEST_CASE("evaluate: report, CSV and JSON outputs") {
  const auto t = wind_evi_table({1, 2, 12, 22}, {0.2, 0.3, 0.4, 0.5}, {0, 0, 1, 1});
  const std::vector<double> scores{0.1, 0.2, 0.7, 0.9};
  EvaluationOptions o;
  const auto r = evaluate(t, scores, o, "m");
  CHECK(r.test_size == 4);
  CHECK(*r.roc_auc == 1.0);
  CHECK(r.match_rate.has_value());
  std::size_t total = 0;
  for (const auto& c : r.heatmap) total += c.count;
  CHECK(total == 4);

  std::ostringstream metrics;
  write_metrics_csv(metrics, std::vector<EvaluationReport>{r});
  CHECK(metrics.str().rfind("model,test_size,threshold,tp,fp,tn,fn,precision,recall,f1,roc_auc,"
                            "match_rate,sample_match_rate,tolerance\nm,4,0.5,2,0,2,0,1,1,1,1,",
                            0) == 0);
  const auto json = report_json(r);
  CHECK(json.find("\"match_rate\"") != std::string::npos);

  const auto single = wind_evi_table({1, 2}, {0.2, 0.3}, {0, 0});
  const auto rs = evaluate(single, std::vector<double>{0.1, 0.2}, o, "m");
  CHECK_FALSE(rs.roc_auc.has_value());
  CHECK(report_json(rs).find("\"roc_auc\": null") != std::string::npos);

  const auto empty = single.empty_like();
  CHECK_THROWS_AS(evaluate(empty, std::vector<double>{}, o), ValidationError);
}

TEST_CASE("external predictions align by date") {
  const auto t = wind_evi_table({1, 2, 3}, {0.2, 0.3, 0.4}, {0, 1, 0});
  std::istringstream in("date,score\n2020-01-03,0.3\n2020-01-01,0.1\n2020-01-02,0.2\n");
  const auto preds = read_predictions_csv(in);
  CHECK(align_predictions(t, preds) == std::vector<double>{0.1, 0.2, 0.3});
  std::istringstream missing("date,score\n2020-01-01,0.1\n");
  CHECK_THROWS_AS(align_predictions(t, read_predictions_csv(missing)), ValidationError);
  std::istringstream bad("date,score\n2020-01-01,1.5\n");
  CHECK_THROWS_AS(read_predictions_csv(bad), ValidationError);
}
