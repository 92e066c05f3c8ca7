#include "vegrisk/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"

namespace vegrisk::ingest {

namespace {

using csv::Document;
using csv::Row;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

// Collects per-row problems so a whole file is reported at once.
class RowIssues {
 public:
  explicit RowIssues(const Document& doc) : doc_(doc) {}

  void add(const Row& row, const std::string& message) {
    issues_.push_back(doc_.where(row) + ": " + message);
  }

  bool check_width(const Row& row) {
    if (row.fields.size() == doc_.header.size()) return true;
    add(row, "expected " + std::to_string(doc_.header.size()) + " fields, found " +
                 std::to_string(row.fields.size()));
    return false;
  }

  std::optional<Date> date(const Row& row, std::size_t col) {
    try {
      return parse_date(csv::trim(row.fields[col]));
    } catch (const ValidationError& e) {
      add(row, e.what());
      return std::nullopt;
    }
  }

  // Empty cell is a legitimate missing value; anything unparseable is not.
  bool optional_number(const Row& row, std::size_t col, std::string_view name,
                       std::optional<double>& out) {
    const auto text = csv::trim(row.fields[col]);
    if (text.empty()) {
      out.reset();
      return true;
    }
    auto value = csv::parse_number(text);
    if (!value || !std::isfinite(*value)) {
      add(row, "column '" + std::string(name) + "': not a number '" + std::string(text) + "'");
      return false;
    }
    out = value;
    return true;
  }

  void raise_if_any() {
    if (!issues_.empty()) throw ParseError(std::move(issues_));
  }

 private:
  const Document& doc_;
  std::vector<std::string> issues_;
};

template <typename Record>
void sort_and_check_unique(std::vector<Record>& records, const std::string& source) {
  std::stable_sort(records.begin(), records.end(),
                   [](const Record& a, const Record& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].date == records[i - 1].date) {
      throw ValidationError(source + ": duplicate date " + format_date(records[i].date));
    }
  }
}

double mean3(const std::array<double, 3>& v) { return (v[0] + v[1] + v[2]) / 3.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

std::vector<RawWeatherRecord> parse_weather(std::istream& in, std::string source) {
  const Document doc = csv::read(in, std::move(source));
  const std::size_t c_date = doc.column("date");
  const std::size_t c_tavg = doc.column("tavg");
  const std::size_t c_prcp = doc.column("prcp");
  const std::size_t c_wspd = doc.column("wspd");
  const std::size_t c_wdir = doc.column("wdir");

  RowIssues issues(doc);
  std::vector<RawWeatherRecord> records;
  records.reserve(doc.rows.size());
  for (const Row& row : doc.rows) {
    if (!issues.check_width(row)) continue;
    RawWeatherRecord rec;
    auto date = issues.date(row, c_date);
    bool ok = date.has_value();
    ok &= issues.optional_number(row, c_tavg, "tavg", rec.tavg);
    ok &= issues.optional_number(row, c_prcp, "prcp", rec.prcp);
    ok &= issues.optional_number(row, c_wspd, "wspd", rec.wspd);
    ok &= issues.optional_number(row, c_wdir, "wdir", rec.wdir);
    if (!ok) continue;
    if (rec.wdir && (*rec.wdir < 0.0 || *rec.wdir >= 360.0)) {
      issues.add(row, "wdir " + csv::format_number(*rec.wdir) + " outside [0, 360)");
      continue;
    }
    if (rec.wspd && *rec.wspd < 0.0) {
      issues.add(row, "negative wspd");
      continue;
    }
    if (rec.prcp && *rec.prcp < 0.0) {
      issues.add(row, "negative prcp");
      continue;
    }
    rec.date = *date;
    records.push_back(rec);
  }
  issues.raise_if_any();
  sort_and_check_unique(records, doc.source);
  return records;
}

std::vector<RawWeatherRecord> parse_weather(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_weather(in, path.string());
}

std::vector<RawOutageRecord> parse_outages(std::istream& in, std::string source) {
  const Document doc = csv::read(in, std::move(source));
  const std::size_t c_date = doc.column("date");
  const std::size_t c_cause = doc.column("cause");
  const std::size_t c_location = doc.column("location");
  const std::size_t c_duration = doc.column("duration_min");
  const std::size_t c_customers = doc.column("customers");

  RowIssues issues(doc);
  std::vector<RawOutageRecord> records;
  records.reserve(doc.rows.size());
  for (const Row& row : doc.rows) {
    if (!issues.check_width(row)) continue;
    auto date = issues.date(row, c_date);
    if (!date) continue;
    const auto duration = csv::parse_number(row.fields[c_duration]);
    if (!duration || !std::isfinite(*duration) || *duration < 0.0) {
      issues.add(row, "duration_min must be a non-negative number");
      continue;
    }
    const auto customers = csv::parse_integer(row.fields[c_customers]);
    if (!customers || *customers < 0) {
      issues.add(row, "customers must be a non-negative integer");
      continue;
    }
    records.push_back(RawOutageRecord{*date, std::string(csv::trim(row.fields[c_cause])),
                                      row.fields[c_location], *duration, *customers});
  }
  issues.raise_if_any();
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.date < b.date; });
  return records;
}

std::vector<RawOutageRecord> parse_outages(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_outages(in, path.string());
}

std::vector<RawEviRecord> parse_evi(std::istream& in, std::string source) {
  const Document doc = csv::read(in, std::move(source));
  const std::size_t c_date = doc.column("date");
  const std::size_t c_evi = doc.column("evi");

  RowIssues issues(doc);
  std::vector<RawEviRecord> records;
  for (const Row& row : doc.rows) {
    if (!issues.check_width(row)) continue;
    auto date = issues.date(row, c_date);
    if (!date) continue;
    const auto evi = csv::parse_number(row.fields[c_evi]);
    if (!evi || !(*evi >= -1.0 && *evi <= 1.0)) {
      issues.add(row, "evi must be a number in [-1, 1]");
      continue;
    }
    records.push_back(RawEviRecord{*date, *evi});
  }
  issues.raise_if_any();
  sort_and_check_unique(records, doc.source);
  return records;
}

std::vector<RawEviRecord> parse_evi(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_evi(in, path.string());
}

// ---------------------------------------------------------------------------
// Writers

namespace {

void optional_field(csv::Writer& w, const std::optional<double>& v) {
  if (v) {
    w.field(*v);
  } else {
    w.field(std::string_view{});
  }
}

}  // namespace

void write_weather_csv(std::ostream& out, std::span<const RawWeatherRecord> records) {
  csv::Writer w(out);
  w.row({"date", "tavg", "prcp", "wspd", "wdir"});
  for (const auto& r : records) {
    w.field(format_date(r.date));
    optional_field(w, r.tavg);
    optional_field(w, r.prcp);
    optional_field(w, r.wspd);
    optional_field(w, r.wdir);
    w.end_row();
  }
}

void write_outage_csv(std::ostream& out, std::span<const RawOutageRecord> records) {
  csv::Writer w(out);
  w.row({"date", "cause", "location", "duration_min", "customers"});
  for (const auto& r : records) {
    w.field(format_date(r.date)).field(r.cause).field(r.location).field(r.duration_min);
    w.field(std::to_string(r.customers));
    w.end_row();
  }
}

void write_evi_csv(std::ostream& out, std::span<const RawEviRecord> records) {
  csv::Writer w(out);
  w.row({"date", "evi"});
  for (const auto& r : records) {
    w.field(format_date(r.date)).field(r.evi);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Weather repair

std::vector<RawWeatherRecord> reindex_weather(std::span<const RawWeatherRecord> records,
                                              DateRange range) {
  std::vector<RawWeatherRecord> out(range.days());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].date = range.first + std::chrono::days{static_cast<long>(i)};
  }
  for (const auto& r : records) {
    if (!range.contains(r.date)) continue;
    out[static_cast<std::size_t>((r.date - range.first).count())] = r;
  }
  return out;
}

std::optional<double> circular_mean_deg(std::span<const double> angles) {
  constexpr double kRad = std::numbers::pi / 180.0;
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a * kRad);
    c += std::cos(a * kRad);
  }
  if (std::hypot(s, c) < 1e-9 * static_cast<double>(angles.size())) return std::nullopt;
  double deg = std::atan2(s, c) / kRad;
  if (deg < 0.0) deg += 360.0;
  // Snap round-off at the seam so the result stays in [0, 360).
  if (deg >= 360.0 - 1e-9 || std::abs(deg) < 1e-9) deg = 0.0;
  return deg;
}

std::vector<RawWeatherRecord> impute_weather(std::vector<RawWeatherRecord> records) {
  using Field = std::optional<double> RawWeatherRecord::*;
  struct Column {
    std::string_view name;
    Field field;
    bool circular;
  };
  constexpr std::array<Column, 4> columns{{
      {"tavg", &RawWeatherRecord::tavg, false},
      {"prcp", &RawWeatherRecord::prcp, false},
      {"wspd", &RawWeatherRecord::wspd, false},
      {"wdir", &RawWeatherRecord::wdir, true},
  }};

  for (const Column& col : columns) {
    std::size_t missing = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto& cell = records[i].*col.field;
      if (cell) continue;
      ++missing;
      if (i < 3) {
        throw ValidationError("cannot impute " + std::string(col.name) + " on " +
                              format_date(records[i].date) +
                              ": fewer than 3 prior days with values");
      }
      const std::array<double, 3> prior{*(records[i - 3].*col.field), *(records[i - 2].*col.field),
                                        *(records[i - 1].*col.field)};
      if (col.circular) {
        // Cancelling directions have no mean; carry the latest one forward.
        cell = circular_mean_deg(prior).value_or(prior[2]);
      } else {
        cell = mean3(prior);
      }
    }
    if (!records.empty() && static_cast<double>(missing) > 0.01 * static_cast<double>(records.size())) {
      log::warn("impute: column " + std::string(col.name) + " has " + std::to_string(missing) +
                " of " + std::to_string(records.size()) + " values missing (above 1%)");
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// EVI

std::vector<DailyEvi> interpolate_evi(std::span<const RawEviRecord> records, DateRange range) {
  if (records.empty()) throw ValidationError("interpolate_evi: no EVI composites");
  if (records.size() < 2) throw ValidationError("interpolate_evi: need at least 2 EVI composites");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i - 1].date < records[i].date)) {
      throw ValidationError("interpolate_evi: composites not strictly ascending at " +
                            format_date(records[i].date));
    }
  }

  std::vector<DailyEvi> out;
  out.reserve(range.days());
  std::size_t k = 0;  // records[k].date <= d < records[k + 1].date
  for (Date d = range.first; d <= range.last; d += std::chrono::days{1}) {
    if (d <= records.front().date) {
      out.push_back({d, records.front().evi});
      continue;
    }
    if (d > records.back().date) {
      out.push_back({d, std::nullopt});
      continue;
    }
    while (k + 1 < records.size() && records[k + 1].date <= d) ++k;
    if (records[k].date == d) {
      out.push_back({d, records[k].evi});
      continue;
    }
    const auto& a = records[k];
    const auto& b = records[k + 1];
    const double t = static_cast<double>((d - a.date).count()) /
                     static_cast<double>((b.date - a.date).count());
    out.push_back({d, a.evi + t * (b.evi - a.evi)});
  }
  return out;
}

std::vector<DailyEvi> fill_evi_seasonal(std::vector<DailyEvi> daily, Date cutoff,
                                        std::span<const int> history_years) {
  const std::set<int> years(history_years.begin(), history_years.end());
  std::map<std::pair<unsigned, unsigned>, std::pair<double, std::size_t>> by_month_day;
  for (const auto& day : daily) {
    if (day.date > cutoff || !day.evi || !years.contains(year_of(day.date))) continue;
    auto& [sum, count] = by_month_day[{month_of(day.date), day_of(day.date)}];
    sum += *day.evi;
    ++count;
  }

  auto mean_for = [&](unsigned m, unsigned d) -> std::optional<double> {
    auto it = by_month_day.find({m, d});
    if (it == by_month_day.end() || it->second.second == 0) return std::nullopt;
    return it->second.first / static_cast<double>(it->second.second);
  };

  for (auto& day : daily) {
    if (day.date <= cutoff) continue;
    const unsigned m = month_of(day.date);
    const unsigned d = day_of(day.date);
    auto value = mean_for(m, d);
    if (!value && m == 2 && d == 29) value = mean_for(2, 28);
    if (!value) {
      throw ValidationError("fill_evi_seasonal: no history EVI for " + format_date(day.date));
    }
    day.evi = value;
  }
  return daily;
}

std::vector<int> default_history_years(DateRange range, Date cutoff) {
  std::vector<int> years;
  for (int y = year_of(range.first); y <= year_of(cutoff); ++y) {
    if (make_date(y, 1, 1) >= range.first && make_date(y, 12, 31) <= cutoff) years.push_back(y);
  }
  return years;
}

std::vector<DailyEvi> densify_evi(std::span<const RawEviRecord> composites, DateRange range,
                                  std::optional<Date> cutoff,
                                  std::optional<std::vector<int>> history_years) {
  auto daily = interpolate_evi(composites, range);
  const Date last = cutoff.value_or(composites.back().date);
  if (range.last <= last) return daily;
  const auto years = history_years.value_or(default_history_years(range, last));
  log::info("evi: filling " + std::to_string((range.last - last).count()) + " day(s) after " +
            format_date(last) + " with same-date means over " + std::to_string(years.size()) +
            " history year(s)");
  return fill_evi_seasonal(std::move(daily), last, years);
}

// ---------------------------------------------------------------------------
// Join

JoinResult join_daily(std::span<const RawWeatherRecord> weather, std::span<const DailyEvi> evi,
                      std::span<const RawOutageRecord> outages,
                      const std::set<std::string>& vegetation_causes) {
  if (weather.empty()) throw ValidationError("join_daily: no weather records");
  const DateRange range{weather.front().date, weather.back().date};
  if (weather.size() != range.days()) {
    throw ValidationError("join_daily: weather records are not one per contiguous day");
  }
  if (evi.size() != weather.size() || evi.front().date != range.first ||
      evi.back().date != range.last) {
    throw ValidationError("join_daily: EVI series does not cover the weather date range " +
                          format_date(range.first) + ".." + format_date(range.last));
  }

  JoinResult result;
  result.samples.reserve(weather.size());
  for (std::size_t i = 0; i < weather.size(); ++i) {
    const auto& w = weather[i];
    const Date expected = range.first + std::chrono::days{static_cast<long>(i)};
    if (w.date != expected || evi[i].date != expected) {
      throw ValidationError("join_daily: series misaligned at " + format_date(expected));
    }
    if (!w.tavg || !w.prcp || !w.wspd || !w.wdir) {
      throw ValidationError("join_daily: weather still has missing values on " +
                            format_date(w.date));
    }
    if (!evi[i].evi) {
      throw ValidationError("join_daily: EVI missing on " + format_date(w.date));
    }
    result.samples.push_back({w.date, *w.tavg, *w.prcp, *w.wspd, *w.wdir, *evi[i].evi, 0});
  }

  for (const auto& o : outages) {
    if (!range.contains(o.date)) {
      ++result.dropped_outages;
      continue;
    }
    if (vegetation_causes.contains(o.cause)) {
      result.samples[static_cast<std::size_t>((o.date - range.first).count())].outage = 1;
    }
  }
  if (result.dropped_outages > 0) {
    log::warn("join: dropped " + std::to_string(result.dropped_outages) +
              " outage record(s) dated outside " + format_date(range.first) + ".." +
              format_date(range.last));
  }
  return result;
}

void write_daily_csv(std::ostream& out, std::span<const DailySample> samples) {
  csv::Writer w(out);
  w.row({"date", "tavg", "prcp", "wspd", "wdir", "evi", "outage"});
  for (const auto& s : samples) {
    w.field(format_date(s.date)).field(s.tavg).field(s.prcp).field(s.wspd).field(s.wdir);
    w.field(s.evi).field(std::to_string(s.outage));
    w.end_row();
  }
}

std::vector<DailySample> read_daily_csv(std::istream& in, std::string source) {
  const Document doc = csv::read(in, std::move(source));
  const std::array<std::size_t, 7> cols{doc.column("date"), doc.column("tavg"), doc.column("prcp"),
                                        doc.column("wspd"), doc.column("wdir"), doc.column("evi"),
                                        doc.column("outage")};
  RowIssues issues(doc);
  std::vector<DailySample> samples;
  samples.reserve(doc.rows.size());
  for (const Row& row : doc.rows) {
    if (!issues.check_width(row)) continue;
    auto date = issues.date(row, cols[0]);
    if (!date) continue;
    std::array<double, 5> v{};
    bool ok = true;
    for (std::size_t j = 0; j < v.size(); ++j) {
      auto x = csv::parse_number(row.fields[cols[j + 1]]);
      if (!x || !std::isfinite(*x)) {
        issues.add(row, "column '" + doc.header[cols[j + 1]] + "' must be a number");
        ok = false;
        break;
      }
      v[j] = *x;
    }
    const auto label = csv::parse_integer(row.fields[cols[6]]);
    if (ok && (!label || (*label != 0 && *label != 1))) {
      issues.add(row, "outage must be 0 or 1");
      ok = false;
    }
    if (!ok) continue;
    samples.push_back({*date, v[0], v[1], v[2], v[3], v[4], static_cast<int>(*label)});
  }
  issues.raise_if_any();
  sort_and_check_unique(samples, doc.source);
  return samples;
}

std::vector<DailySample> read_daily_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_daily_csv(in, path.string());
}

}  // namespace vegrisk::ingest
