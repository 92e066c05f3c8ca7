#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vegrisk/features.hpp"
#include "vegrisk/ingest.hpp"

// Synthetic daily datasets with a known outage mechanism: labels are drawn
// from a logistic model over the standardised model features.
namespace vegrisk::synth {

struct SynthConfig {
  std::uint64_t seed = 1;
  int years = 10;
  int start_year = 2015;
  /// Positive days to hit exactly by shifting the intercept. Without a
  /// target, the intercept is logit(base_rate).
  std::optional<std::size_t> target_outages = 149;
  /// Effect sizes on standardised continuous features (z-scores over the
  /// generated days) or on 0/1 dummies.
  std::map<std::string, double> planted_coefficients{
      {"wspd", 1.5}, {"EVI", 0.8}, {"ws_evi", -0.5}, {"snow_type_Wet_Snow", 3.0}};
  /// Outage probability on a reference day (all z-scores 0, spring, dry snow).
  double base_rate = 0.01;
  double missing_fraction = 0.005;  // blanked cells per weather column
  int evi_tail_gap_days = 60;       // trailing days with no EVI composite
  int other_outages_per_year = 12;  // non-vegetation causes, never labelled

  void validate() const;
};

struct SynthDataset {
  DateRange range;
  std::vector<ingest::RawWeatherRecord> weather;  // with blanked cells
  std::vector<ingest::RawEviRecord> evi;          // 16-day composites
  std::vector<ingest::RawOutageRecord> outages;
  std::vector<ingest::DailySample> truth;  // complete days the labels came from
  features::ScalingParams planting_scaling;
  double planted_intercept = 0.0;
};

SynthDataset generate(const SynthConfig& config);

/// Writes weather.csv, evi.csv and outages.csv into `dir` (created if
/// missing).
void write_dataset(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace vegrisk::synth
