#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vegrisk/config.hpp"
#include "vegrisk/eval.hpp"
#include "vegrisk/features.hpp"
#include "vegrisk/ingest.hpp"
#include "vegrisk/model.hpp"

// Pipeline stages behind the CLI subcommands. The *_pipeline functions work
// on in-memory data; the cmd_* functions add file I/O around them.
namespace vegrisk::cli {

using ingest::DailySample;

struct PreparedData {
  std::vector<DailySample> samples;
  std::size_t dropped_outages = 0;
  features::GroupedRateReport rates_by_wind;
  features::GroupedRateReport rates_by_snow;
};

PreparedData prepare_pipeline(std::span<const ingest::RawWeatherRecord> weather,
                              std::span<const ingest::RawEviRecord> evi,
                              std::span<const ingest::RawOutageRecord> outages,
                              const PipelineConfig& config);

struct TrainOutcome {
  model::LogisticModel model;
  Date last_train_date;
  Date first_test_date;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t scaling_rows = 0;         // rows the scaler was fitted on
  std::size_t resample_input_rows = 0;  // rows handed to SMOTEENN (0 when disabled)
  std::size_t fitted_rows = 0;          // rows the model was fitted on
  /// Per-feature mean of the test rows under the training scaler.
  std::vector<std::pair<std::string, double>> test_scaled_means;
};

/// features -> temporal split -> scaling fitted on train -> scale ->
/// SMOTEENN on train -> fit. Test rows never reach the scaler fit or the
/// resampler.
TrainOutcome train_pipeline(std::span<const DailySample> samples, const PipelineConfig& config);

/// Raw feature rows of the temporal test split.
features::FeatureTable test_split(std::span<const DailySample> samples,
                                  const PipelineConfig& config);

eval::EvaluationReport evaluate_pipeline(std::span<const DailySample> samples,
                                         const model::LogisticModel& model,
                                         const PipelineConfig& config);

// ---------------------------------------------------------------------------

struct SynthSummary {
  std::size_t days = 0;
  std::size_t positive_days = 0;
  std::size_t outage_records = 0;
};
SynthSummary cmd_synth(const PipelineConfig& config);

struct PrepareSummary {
  std::size_t days = 0;
  std::size_t positive_days = 0;
  std::size_t dropped_outages = 0;
};
PrepareSummary cmd_prepare(const PipelineConfig& config);

TrainOutcome cmd_train(const PipelineConfig& config);

struct EvaluateRequest {
  std::optional<std::filesystem::path> model_path;   // default <output_dir>/model.json
  std::optional<std::filesystem::path> predictions;  // external date,score CSV
  std::string predictions_name = "external";
};
std::vector<eval::EvaluationReport> cmd_evaluate(const PipelineConfig& config,
                                                 const EvaluateRequest& request,
                                                 std::ostream& console);

struct RawDay {
  Date date;
  double wspd = 0.0;
  double wdir = 0.0;
  double prcp = 0.0;
  double tavg = 0.0;
  double evi = 0.0;
};

/// Range checks on one raw day. Throws ValidationError.
void validate_raw_day(const RawDay& day);

struct ScoreRequest {
  std::optional<std::filesystem::path> model_path;
  std::optional<std::filesystem::path> features_csv;  // raw feature table
  std::optional<RawDay> day;
};
/// Writes "date,score" rows for every input row.
void cmd_score(const PipelineConfig& config, const ScoreRequest& request, std::ostream& out);

/// Probability for one raw day through the full feature path.
double score_day(const model::LogisticModel& model, const RawDay& day,
                 const features::FeatureOptions& options = {});

}  // namespace vegrisk::cli
