#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vegrisk/date.hpp"
#include "vegrisk/eval.hpp"
#include "vegrisk/features.hpp"
#include "vegrisk/model.hpp"
#include "vegrisk/resample.hpp"
#include "vegrisk/synth.hpp"

namespace vegrisk::cli {

struct PipelineConfig {
  /// Root of every random stream; stages draw derived seeds from it.
  std::uint64_t seed = 42;

  std::filesystem::path output_dir = "out";
  // Empty input paths resolve to <output_dir>/<name>.csv, where synth writes.
  std::filesystem::path weather_path;
  std::filesystem::path outages_path;
  std::filesystem::path evi_path;

  std::optional<Date> start_date;  // default: first weather date
  std::optional<Date> end_date;    // default: last weather date
  std::set<std::string> vegetation_causes = ingest::default_vegetation_causes();

  features::FeatureOptions feature_options;
  std::vector<double> wind_bins{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  std::optional<Date> evi_cutoff;                    // default: last composite
  std::optional<std::vector<int>> evi_history_years;  // default: full years before cutoff

  synth::SynthConfig synth;

  bool resample_enabled = true;
  resample::ResampleConfig resample;
  /// After fitting on resampled rows, shift the intercept by
  /// logit(train positive rate) - logit(resampled positive rate) so scores
  /// are probabilities at the real base rate. Slopes are untouched.
  bool prior_correction = true;

  double train_fraction = 0.8;
  model::TrainConfig train;

  eval::EvaluationOptions evaluation;

  [[nodiscard]] std::filesystem::path weather() const;
  [[nodiscard]] std::filesystem::path outages() const;
  [[nodiscard]] std::filesystem::path evi() const;
  [[nodiscard]] std::filesystem::path daily() const { return output_dir / "daily.csv"; }
  [[nodiscard]] std::filesystem::path model_file() const { return output_dir / "model.json"; }

  /// Throws ValidationError on any out-of-range setting.
  void validate() const;
};

/// Parses the JSON configuration document. Unknown keys are rejected.
/// Relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::string_view json_text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace vegrisk::cli
