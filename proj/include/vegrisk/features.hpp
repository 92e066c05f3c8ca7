#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vegrisk/date.hpp"
#include "vegrisk/ingest.hpp"

namespace vegrisk::features {

using ingest::DailySample;

enum class Season { spring, summer, autumn, winter };
enum class SnowType { no_snow, dry_snow, wet_snow };

std::string_view to_string(Season season);
std::string_view to_string(SnowType snow);  // "No_Snow", "Dry_Snow", "Wet_Snow"
Season parse_season(std::string_view text);
SnowType parse_snow_type(std::string_view text);

/// Meteorological seasons: Dec-Feb winter, Mar-May spring, Jun-Aug summer,
/// Sep-Nov autumn.
Season derive_season(Date date);

/// prcp = 0 is No_Snow; below 0 °C Dry_Snow; 0..2 °C inclusive Wet_Snow;
/// rain above 2 °C folds into No_Snow.
SnowType classify_snow(double prcp_mm, double tavg_c);

struct WindComponents {
  double vx = 0.0;
  double vy = 0.0;
  double cos_dir = 1.0;
  double sin_dir = 0.0;
};

/// Splits a wind vector into orthogonal components. With `meteorological`
/// set, `wdir_deg` is read as a compass "blowing from" bearing and rotated
/// into the mathematical angle first.
WindComponents decompose_wind(double wspd, double wdir_deg, bool meteorological = false);

struct Interactions {
  double ws_evi = 0.0;
  double wind_temp = 0.0;
};

/// Products of raw (unscaled) values.
Interactions build_interactions(double wspd, double evi, double tavg);

// ---------------------------------------------------------------------------
// Bins and grouped outage rates

/// Bins [e0,e1), [e1,e2), ..., [ek, +inf).
class BinSpec {
 public:
  explicit BinSpec(std::vector<double> edges);

  static BinSpec wind_default();  // 0,5,10,15,20,25 m/s

  [[nodiscard]] std::size_t size() const noexcept { return edges_.size(); }
  [[nodiscard]] const std::vector<double>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::optional<std::size_t> find(double value) const;
  [[nodiscard]] std::string label(std::size_t bin) const;

 private:
  std::vector<double> edges_;
};

struct GroupRate {
  std::string group;
  std::size_t total = 0;
  std::size_t outages = 0;
  std::optional<double> rate;  // empty when total == 0

  bool operator==(const GroupRate&) const = default;
};

struct GroupedRateReport {
  std::vector<GroupRate> groups;

  [[nodiscard]] std::size_t total() const;
};

/// Outage rate per bin: outage days over total days in the bin.
GroupedRateReport grouped_outage_rate(std::span<const double> values, std::span<const int> labels,
                                      const BinSpec& bins);

/// Outage rate per category. Groups appear in `group_order`; a key outside
/// it is a ValidationError.
GroupedRateReport grouped_outage_rate(std::span<const std::string> keys, std::span<const int> labels,
                                      std::span<const std::string> group_order);

GroupedRateReport rates_by_wind(std::span<const DailySample> samples, const BinSpec& bins);
GroupedRateReport rates_by_snow(std::span<const DailySample> samples);

void write_rates_csv(std::ostream& out, const GroupedRateReport& report);

// ---------------------------------------------------------------------------
// Feature table

/// Dummy columns in order: season_summer, season_autumn, season_winter,
/// snow_type_No_Snow, snow_type_Wet_Snow. Spring and Dry_Snow are the
/// dropped reference levels.
std::array<double, 5> one_hot_encode(Season season, SnowType snow);
std::array<double, 5> one_hot_encode(std::string_view season, std::string_view snow);

const std::vector<std::string>& continuous_feature_names();
const std::vector<std::string>& dummy_feature_names();
/// Continuous names followed by dummies.
const std::vector<std::string>& model_feature_names();

struct FeatureOptions {
  bool meteorological_direction = false;
};

/// Row-major numeric table with one label and date per row.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<Date> dates;
  std::vector<std::uint8_t> synthetic;  // 1 for rows created by oversampling

  [[nodiscard]] std::size_t rows() const noexcept { return labels.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return names.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  [[nodiscard]] std::vector<double> column_values(std::size_t c) const;

  [[nodiscard]] std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws ValidationError when absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;

  void append(std::span<const double> row_values, int label, Date date, bool is_synthetic = false);

  /// Empty table with the same columns.
  [[nodiscard]] FeatureTable empty_like() const;
  [[nodiscard]] FeatureTable subset(std::span<const std::size_t> row_indices) const;

  /// Throws ValidationError if shapes or names are inconsistent.
  void validate() const;

  bool operator==(const FeatureTable&) const = default;
};

std::vector<double> feature_row(const DailySample& sample, const FeatureOptions& options = {});

/// Raw (unscaled) model features for every sample, in model_feature_names()
/// order.
FeatureTable build_feature_table(std::span<const DailySample> samples,
                                 const FeatureOptions& options = {});

/// Header: feature names, then "label", "date", and "synthetic" when any
/// row is synthetic.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
/// "label" is optional on read (defaults to 0); "synthetic" likewise.
FeatureTable read_feature_csv(std::istream& in, std::string source = "<features>");

// ---------------------------------------------------------------------------
// Standard scaling

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // population (divide by N)

  bool operator==(const Moments&) const = default;
};

struct ScalingParams {
  std::map<std::string, Moments> by_feature;

  [[nodiscard]] bool covers(std::string_view name) const;
  [[nodiscard]] const Moments& at(std::string_view name) const;
  /// sd == 0: the column scales to 0.
  [[nodiscard]] bool degenerate(std::string_view name) const { return at(name).sd == 0.0; }
  [[nodiscard]] std::vector<std::string> degenerate_features() const;

  bool operator==(const ScalingParams&) const = default;
};

/// Fits mean and population sd for each of `continuous` over all rows of
/// `train`. The caller passes training rows only.
ScalingParams fit_scaling(const FeatureTable& train, std::span<const std::string> continuous);
ScalingParams fit_scaling(const FeatureTable& train);

/// Maps every column named in `continuous` to (x - mean) / sd. Other
/// columns are untouched. A continuous column without params is an error.
FeatureTable apply_scaling(FeatureTable table, const ScalingParams& params,
                           std::span<const std::string> continuous);
FeatureTable apply_scaling(FeatureTable table, const ScalingParams& params);

/// Inverse of apply_scaling for sd > 0 columns; degenerate columns map back
/// to their mean.
FeatureTable unscale(FeatureTable table, const ScalingParams& params,
                     std::span<const std::string> continuous);

}  // namespace vegrisk::features
