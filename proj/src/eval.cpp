#include "vegrisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"

namespace vegrisk::eval {

SplitResult temporal_split(const FeatureTable& table, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must be in (0, 1)");
  }
  table.validate();
  for (std::size_t r = 1; r < table.rows(); ++r) {
    if (!(table.dates[r - 1] < table.dates[r])) {
      throw ValidationError("temporal_split: rows are not in ascending date order at " +
                            format_date(table.dates[r]));
    }
  }
  const double n = static_cast<double>(table.rows());
  const auto n_train =
      std::min(table.rows(), static_cast<std::size_t>(std::ceil(train_fraction * n - 1e-9)));

  std::vector<std::size_t> train_rows(n_train);
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::vector<std::size_t> test_rows(table.rows() - n_train);
  std::iota(test_rows.begin(), test_rows.end(), n_train);

  SplitResult out{table.subset(train_rows), table.subset(test_rows), {}};
  if (!test_rows.empty()) {
    out.split_date = table.dates[n_train];
  } else if (n_train > 0) {
    out.split_date = table.dates[n_train - 1] + std::chrono::days{1};
  }
  return out;
}

ClassificationMetrics classification_metrics(std::span<const int> labels,
                                             std::span<const double> scores, double threshold) {
  if (labels.size() != scores.size()) {
    throw ValidationError("classification_metrics: labels and scores differ in length");
  }
  ClassificationMetrics m;
  auto& c = m.confusion;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] != 0;
    const bool predicted = scores[i] >= threshold;
    if (actual && predicted) ++c.tp;
    else if (!actual && predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

std::optional<double> roc_auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ValidationError("roc_auc: labels and scores differ in length");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk tied groups in ascending score; positives beat every negative seen
  // in earlier groups and tie with negatives in their own group.
  double wins = 0.0;
  double ties = 0.0;
  std::size_t negatives_below = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos = 0;
    std::size_t neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] != 0) ++pos;
      else ++neg;
      ++j;
    }
    wins += static_cast<double>(pos) * static_cast<double>(negatives_below);
    ties += static_cast<double>(pos) * static_cast<double>(neg);
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) return std::nullopt;
  return (wins + 0.5 * ties) / (static_cast<double>(positives) * static_cast<double>(negatives));
}

BinSpec equal_width_bins(std::span<const double> values, int count) {
  if (values.empty()) throw ValidationError("equal_width_bins: no values");
  if (count < 1) throw ValidationError("equal_width_bins: count must be >= 1");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == *lo) return BinSpec({*lo});
  const double width = (*hi - *lo) / count;
  std::vector<double> edges;
  for (int i = 0; i < count; ++i) edges.push_back(*lo + i * width);
  return BinSpec(std::move(edges));
}

std::vector<HeatmapCell> heatmap_rates(const FeatureTable& raw_test, std::span<const double> scores,
                                       const BinSpec& wind_bins, const BinSpec& evi_bins) {
  if (scores.size() != raw_test.rows()) {
    throw ValidationError("heatmap_rates: one score per test row required");
  }
  const std::size_t c_wind = raw_test.column("wspd");
  const std::size_t c_evi = raw_test.column("EVI");

  std::vector<HeatmapCell> cells;
  for (std::size_t w = 0; w < wind_bins.size(); ++w) {
    for (std::size_t e = 0; e < evi_bins.size(); ++e) {
      cells.push_back({wind_bins.label(w), evi_bins.label(e), 0, 0, {}, {}});
    }
  }
  std::vector<double> score_sums(cells.size(), 0.0);
  for (std::size_t r = 0; r < raw_test.rows(); ++r) {
    const auto w = wind_bins.find(raw_test.at(r, c_wind));
    const auto e = evi_bins.find(raw_test.at(r, c_evi));
    if (!w || !e) {
      throw ValidationError("heatmap_rates: row dated " + format_date(raw_test.dates[r]) +
                            " falls below the first bin edge");
    }
    const std::size_t idx = *w * evi_bins.size() + *e;
    ++cells[idx].count;
    if (raw_test.labels[r] != 0) ++cells[idx].outages;
    score_sums[idx] += scores[r];
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& cell = cells[i];
    if (cell.count == 0) continue;
    const double n = static_cast<double>(cell.count);
    cell.actual_rate = static_cast<double>(cell.outages) / n;
    cell.predicted_rate = score_sums[i] / n;
  }
  return cells;
}

std::vector<HeatmapCell> heatmap_rates(const FeatureTable& raw_test,
                                       const model::LogisticModel& model, const BinSpec& wind_bins,
                                       const BinSpec& evi_bins) {
  const auto scores = model::predict_proba_raw(model, raw_test);
  return heatmap_rates(raw_test, scores, wind_bins, evi_bins);
}

double match_rate(std::span<const HeatmapCell> cells, double tolerance, std::size_t min_count) {
  std::size_t eligible = 0;
  std::size_t matched = 0;
  for (const auto& cell : cells) {
    if (cell.count == 0 || cell.count < min_count || !cell.actual_rate || !cell.predicted_rate) {
      continue;
    }
    ++eligible;
    if (std::abs(*cell.predicted_rate - *cell.actual_rate) <= tolerance) ++matched;
  }
  if (eligible == 0) throw ValidationError("match_rate: no non-empty heatmap cells");
  return static_cast<double>(matched) / static_cast<double>(eligible);
}

double sample_match_rate(std::span<const int> labels, std::span<const double> scores,
                         double tolerance) {
  if (labels.size() != scores.size() || labels.empty()) {
    throw ValidationError("sample_match_rate: need equal-length, non-empty inputs");
  }
  std::size_t matched = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = labels[i] != 0 ? 1.0 : 0.0;
    if (std::abs(scores[i] - y) <= tolerance) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(labels.size());
}

EvaluationReport evaluate(const FeatureTable& raw_test, std::span<const double> scores,
                          const EvaluationOptions& options, std::string model_name) {
  if (raw_test.rows() == 0) throw ValidationError("evaluate: test split is empty");
  if (scores.size() != raw_test.rows()) {
    throw ValidationError("evaluate: one score per test row required");
  }
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw ValidationError("evaluate: threshold must be in (0, 1)");
  }
  if (!(options.tolerance >= 0.0)) throw ValidationError("evaluate: tolerance must be >= 0");

  EvaluationReport report;
  report.model_name = std::move(model_name);
  report.test_size = raw_test.rows();
  report.threshold = options.threshold;
  report.tolerance = options.tolerance;
  report.metrics = classification_metrics(raw_test.labels, scores, options.threshold);
  report.roc_auc = roc_auc(raw_test.labels, scores);

  const BinSpec wind_bins(options.wind_edges);
  const BinSpec evi_bins = options.evi_edges.empty()
                               ? equal_width_bins(raw_test.column_values(raw_test.column("EVI")),
                                                  options.evi_bin_count)
                               : BinSpec(options.evi_edges);
  report.heatmap = heatmap_rates(raw_test, scores, wind_bins, evi_bins);
  try {
    report.match_rate = match_rate(report.heatmap, options.tolerance, options.min_cell_count);
  } catch (const ValidationError&) {
    report.match_rate.reset();
  }
  report.sample_match_rate = sample_match_rate(raw_test.labels, scores, options.tolerance);
  return report;
}

namespace {

nlohmann::ordered_json nullable(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

std::string text_or_na(const std::optional<double>& v) {
  return v ? csv::format_number(*v) : std::string("NA");
}

}  // namespace

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json doc;
  doc["model"] = report.model_name;
  doc["test_size"] = report.test_size;
  doc["threshold"] = report.threshold;
  doc["tolerance"] = report.tolerance;
  const auto& c = report.metrics.confusion;
  doc["confusion"] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
  doc["precision"] = nullable(report.metrics.precision);
  doc["recall"] = nullable(report.metrics.recall);
  doc["f1"] = nullable(report.metrics.f1);
  doc["roc_auc"] = nullable(report.roc_auc);
  doc["match_rate"] = nullable(report.match_rate);
  doc["sample_match_rate"] = report.sample_match_rate;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.heatmap) {
    cells.push_back({{"wind_bin", cell.wind_bin},
                     {"evi_bin", cell.evi_bin},
                     {"count", cell.count},
                     {"outages", cell.outages},
                     {"actual_rate", nullable(cell.actual_rate)},
                     {"predicted_rate", nullable(cell.predicted_rate)}});
  }
  doc["heatmap"] = std::move(cells);
  return doc.dump(2) + "\n";
}

void write_metrics_csv(std::ostream& out, std::span<const EvaluationReport> reports) {
  csv::Writer w(out);
  w.row({"model", "test_size", "threshold", "tp", "fp", "tn", "fn", "precision", "recall", "f1",
         "roc_auc", "match_rate", "sample_match_rate", "tolerance"});
  for (const auto& r : reports) {
    const auto& c = r.metrics.confusion;
    w.field(r.model_name).field(std::to_string(r.test_size)).field(r.threshold);
    w.field(std::to_string(c.tp)).field(std::to_string(c.fp));
    w.field(std::to_string(c.tn)).field(std::to_string(c.fn));
    w.field(text_or_na(r.metrics.precision)).field(text_or_na(r.metrics.recall));
    w.field(text_or_na(r.metrics.f1)).field(text_or_na(r.roc_auc));
    w.field(text_or_na(r.match_rate)).field(r.sample_match_rate).field(r.tolerance);
    w.end_row();
  }
}

void write_heatmap_csv(std::ostream& out, const EvaluationReport& report) {
  csv::Writer w(out);
  w.row({"wind_bin", "evi_bin", "count", "actual_rate", "predicted_rate"});
  for (const auto& cell : report.heatmap) {
    w.field(cell.wind_bin).field(cell.evi_bin).field(std::to_string(cell.count));
    w.field(text_or_na(cell.actual_rate)).field(text_or_na(cell.predicted_rate));
    w.end_row();
  }
}

std::vector<ExternalPrediction> read_predictions_csv(std::istream& in, std::string source) {
  const auto doc = csv::read(in, std::move(source));
  const std::size_t c_date = doc.column("date");
  const std::size_t c_score = doc.column("score");
  std::vector<ExternalPrediction> out;
  std::vector<std::string> issues;
  for (const auto& row : doc.rows) {
    if (row.fields.size() != doc.header.size()) {
      issues.push_back(doc.where(row) + ": wrong field count");
      continue;
    }
    const auto score = csv::parse_number(row.fields[c_score]);
    if (!score || !(*score >= 0.0 && *score <= 1.0)) {
      issues.push_back(doc.where(row) + ": score must be a number in [0, 1]");
      continue;
    }
    try {
      out.push_back({parse_date(csv::trim(row.fields[c_date])), *score});
    } catch (const ValidationError& e) {
      issues.push_back(doc.where(row) + ": " + e.what());
    }
  }
  if (!issues.empty()) throw ParseError(std::move(issues));
  return out;
}

std::vector<double> align_predictions(const FeatureTable& table,
                                      std::span<const ExternalPrediction> predictions) {
  std::unordered_map<long, double> by_day;
  for (const auto& p : predictions) by_day[p.date.time_since_epoch().count()] = p.score;
  std::vector<double> scores;
  scores.reserve(table.rows());
  for (const Date d : table.dates) {
    const auto it = by_day.find(d.time_since_epoch().count());
    if (it == by_day.end()) {
      throw ValidationError("predictions file has no score for " + format_date(d));
    }
    scores.push_back(it->second);
  }
  return scores;
}

}  // namespace vegrisk::eval
