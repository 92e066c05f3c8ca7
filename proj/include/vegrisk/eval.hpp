#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vegrisk/features.hpp"
#include "vegrisk/model.hpp"

namespace vegrisk::eval {

using features::BinSpec;
using features::FeatureTable;

struct SplitResult {
  FeatureTable train;
  FeatureTable test;
  Date split_date;  // first test date (day after the last train date when test is empty)
};

/// First ceil(fraction * N) rows by date go to train, the rest to test.
SplitResult temporal_split(const FeatureTable& table, double train_fraction = 0.8);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassificationMetrics {
  ConfusionCounts confusion;
  std::optional<double> precision;  // empty when undefined
  std::optional<double> recall;
  std::optional<double> f1;
};

/// A score at or above `threshold` predicts positive.
ClassificationMetrics classification_metrics(std::span<const int> labels,
                                             std::span<const double> scores, double threshold);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Empty unless both classes are present.
std::optional<double> roc_auc(std::span<const int> labels, std::span<const double> scores);

struct HeatmapCell {
  std::string wind_bin;
  std::string evi_bin;
  std::size_t count = 0;
  std::size_t outages = 0;
  std::optional<double> actual_rate;     // empty for empty cells
  std::optional<double> predicted_rate;  // mean score over members
};

/// `count` bins of equal width spanning [min, max] of `values`.
BinSpec equal_width_bins(std::span<const double> values, int count);

/// Wind-major grid of cells over the raw `wspd` and `EVI` columns of
/// `raw_test`.
std::vector<HeatmapCell> heatmap_rates(const FeatureTable& raw_test, std::span<const double> scores,
                                       const BinSpec& wind_bins, const BinSpec& evi_bins);
std::vector<HeatmapCell> heatmap_rates(const FeatureTable& raw_test,
                                       const model::LogisticModel& model, const BinSpec& wind_bins,
                                       const BinSpec& evi_bins);

/// Fraction of cells with at least `min_count` members whose predicted and
/// actual rates differ by at most `tolerance`. Throws when no cell qualifies.
double match_rate(std::span<const HeatmapCell> cells, double tolerance = 0.05,
                  std::size_t min_count = 1);

/// Per-sample variant: fraction of rows with |score - label| <= tolerance.
double sample_match_rate(std::span<const int> labels, std::span<const double> scores,
                         double tolerance = 0.05);

struct EvaluationOptions {
  double threshold = 0.5;
  double tolerance = 0.05;
  std::size_t min_cell_count = 1;
  std::vector<double> wind_edges{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  std::vector<double> evi_edges;  // empty: equal-width over the test EVI range
  int evi_bin_count = 4;
};

struct EvaluationReport {
  std::string model_name;
  std::size_t test_size = 0;
  double threshold = 0.5;
  double tolerance = 0.05;
  ClassificationMetrics metrics;
  std::optional<double> roc_auc;
  std::vector<HeatmapCell> heatmap;
  std::optional<double> match_rate;  // empty when no cell qualifies
  double sample_match_rate = 0.0;
};

/// Scores against the labels of `raw_test`. Throws on an empty test set.
EvaluationReport evaluate(const FeatureTable& raw_test, std::span<const double> scores,
                          const EvaluationOptions& options, std::string model_name = "model");

std::string report_json(const EvaluationReport& report);
void write_metrics_csv(std::ostream& out, std::span<const EvaluationReport> reports);
void write_heatmap_csv(std::ostream& out, const EvaluationReport& report);

/// External baseline scores: CSV with columns date,score.
struct ExternalPrediction {
  Date date;
  double score = 0.0;
};
std::vector<ExternalPrediction> read_predictions_csv(std::istream& in,
                                                     std::string source = "<predictions>");

/// Scores for each row of `table`, looked up by date. Throws if any date is
/// missing from `predictions`.
std::vector<double> align_predictions(const FeatureTable& table,
                                      std::span<const ExternalPrediction> predictions);

}  // namespace vegrisk::eval
