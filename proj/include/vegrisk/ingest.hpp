#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vegrisk/date.hpp"

// Raw CSV parsing, gap repair, EVI densification and the daily join.
namespace vegrisk::ingest {

struct RawWeatherRecord {
  Date date;
  std::optional<double> tavg;  // °C
  std::optional<double> prcp;  // mm
  std::optional<double> wspd;  // m/s
  std::optional<double> wdir;  // degrees, [0, 360)

  bool operator==(const RawWeatherRecord&) const = default;
};

struct RawOutageRecord {
  Date date;
  std::string cause;
  std::string location;
  double duration_min = 0.0;
  std::int64_t customers = 0;

  bool operator==(const RawOutageRecord&) const = default;
};

struct RawEviRecord {
  Date date;
  double evi = 0.0;

  bool operator==(const RawEviRecord&) const = default;
};

/// One day of the densified EVI series. Empty until a value is known.
struct DailyEvi {
  Date date;
  std::optional<double> evi;

  bool operator==(const DailyEvi&) const = default;
};

/// One calendar day with every field present.
struct DailySample {
  Date date;
  double tavg = 0.0;
  double prcp = 0.0;
  double wspd = 0.0;
  double wdir = 0.0;
  double evi = 0.0;
  int outage = 0;

  bool operator==(const DailySample&) const = default;
};

inline const std::set<std::string>& default_vegetation_causes() {
  static const std::set<std::string> causes{"Tree Fall", "Branch Contact"};
  return causes;
}

// Parsers sort by date. Malformed rows are collected and raised together as
// a ParseError with file:line locations; a missing column is a
// ValidationError.
std::vector<RawWeatherRecord> parse_weather(std::istream& in, std::string source = "<weather>");
std::vector<RawWeatherRecord> parse_weather(const std::filesystem::path& path);
std::vector<RawOutageRecord> parse_outages(std::istream& in, std::string source = "<outages>");
std::vector<RawOutageRecord> parse_outages(const std::filesystem::path& path);
std::vector<RawEviRecord> parse_evi(std::istream& in, std::string source = "<evi>");
std::vector<RawEviRecord> parse_evi(const std::filesystem::path& path);

void write_weather_csv(std::ostream& out, std::span<const RawWeatherRecord> records);
void write_outage_csv(std::ostream& out, std::span<const RawOutageRecord> records);
void write_evi_csv(std::ostream& out, std::span<const RawEviRecord> records);

/// Places records on the contiguous calendar `range`; days absent from the
/// file become all-missing records for impute_weather to fill. Records
/// outside the range are dropped.
std::vector<RawWeatherRecord> reindex_weather(std::span<const RawWeatherRecord> records,
                                              DateRange range);

/// Fills each missing value with the mean of the three preceding records'
/// values in that column (circular mean for wdir). Imputed values feed later
/// gaps. Warns when a column is more than 1% missing.
std::vector<RawWeatherRecord> impute_weather(std::vector<RawWeatherRecord> records);

/// Circular mean of angles in degrees, result in [0, 360). Returns nullopt
/// when the unit vectors cancel.
std::optional<double> circular_mean_deg(std::span<const double> angles);

/// Linear interpolation of 16-day composites onto every day of `range`.
/// Days before the first composite hold its value; days after the last
/// composite stay empty for fill_evi_seasonal.
std::vector<DailyEvi> interpolate_evi(std::span<const RawEviRecord> records, DateRange range);

/// Replaces every day after `cutoff` with the mean EVI of the same
/// month-day across `history_years`. Feb 29 falls back to Feb 28 when no
/// history year has it.
std::vector<DailyEvi> fill_evi_seasonal(std::vector<DailyEvi> daily, Date cutoff,
                                        std::span<const int> history_years);

/// Full calendar years inside `range` that end on or before `cutoff`.
std::vector<int> default_history_years(DateRange range, Date cutoff);

/// interpolate_evi followed by fill_evi_seasonal for days past `cutoff`.
/// The cutoff defaults to the last composite date and the history to
/// default_history_years.
std::vector<DailyEvi> densify_evi(std::span<const RawEviRecord> composites, DateRange range,
                                  std::optional<Date> cutoff = std::nullopt,
                                  std::optional<std::vector<int>> history_years = std::nullopt);

struct JoinResult {
  std::vector<DailySample> samples;
  std::size_t dropped_outages = 0;  // dated outside the weather range
};

/// Aligns complete weather with daily EVI and labels a day 1 iff at least
/// one outage with a vegetation cause falls on it.
JoinResult join_daily(std::span<const RawWeatherRecord> weather, std::span<const DailyEvi> evi,
                      std::span<const RawOutageRecord> outages,
                      const std::set<std::string>& vegetation_causes);

void write_daily_csv(std::ostream& out, std::span<const DailySample> samples);
std::vector<DailySample> read_daily_csv(std::istream& in, std::string source = "<daily>");
std::vector<DailySample> read_daily_csv(const std::filesystem::path& path);

}  // namespace vegrisk::ingest
