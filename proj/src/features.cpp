#include "vegrisk/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"

namespace vegrisk::features {

std::string_view to_string(Season season) {
  switch (season) {
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::autumn: return "autumn";
    case Season::winter: return "winter";
  }
  return "spring";
}

std::string_view to_string(SnowType snow) {
  switch (snow) {
    case SnowType::no_snow: return "No_Snow";
    case SnowType::dry_snow: return "Dry_Snow";
    case SnowType::wet_snow: return "Wet_Snow";
  }
  return "No_Snow";
}

Season parse_season(std::string_view text) {
  for (Season s : {Season::spring, Season::summer, Season::autumn, Season::winter}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown season '" + std::string(text) + "'");
}

SnowType parse_snow_type(std::string_view text) {
  for (SnowType s : {SnowType::no_snow, SnowType::dry_snow, SnowType::wet_snow}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown snow type '" + std::string(text) + "'");
}

Season derive_season(Date date) {
  switch (month_of(date)) {
    case 12:
    case 1:
    case 2: return Season::winter;
    case 3:
    case 4:
    case 5: return Season::spring;
    case 6:
    case 7:
    case 8: return Season::summer;
    default: return Season::autumn;
  }
}

SnowType classify_snow(double prcp_mm, double tavg_c) {
  if (!(prcp_mm >= 0.0)) throw ValidationError("classify_snow: negative precipitation");
  if (prcp_mm == 0.0) return SnowType::no_snow;
  if (tavg_c < 0.0) return SnowType::dry_snow;
  if (tavg_c <= 2.0) return SnowType::wet_snow;
  return SnowType::no_snow;
}

WindComponents decompose_wind(double wspd, double wdir_deg, bool meteorological) {
  const double angle = meteorological ? 270.0 - wdir_deg : wdir_deg;
  const double theta = angle * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {wspd * c, wspd * s, c, s};
}

Interactions build_interactions(double wspd, double evi, double tavg) {
  return {wspd * evi, wspd * tavg};
}

// ---------------------------------------------------------------------------

BinSpec::BinSpec(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.empty()) throw ValidationError("BinSpec: no edges");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i])) throw ValidationError("BinSpec: non-finite edge");
    if (i > 0 && !(edges_[i - 1] < edges_[i])) {
      throw ValidationError("BinSpec: edges must be strictly increasing");
    }
  }
}

BinSpec BinSpec::wind_default() { return BinSpec({0.0, 5.0, 10.0, 15.0, 20.0, 25.0}); }

std::optional<std::size_t> BinSpec::find(double value) const {
  if (!(value >= edges_.front())) return std::nullopt;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), value);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

namespace {

// Labels are for people; six significant digits keeps computed edges readable.
std::string edge_text(double edge) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, edge, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string BinSpec::label(std::size_t bin) const {
  if (bin + 1 >= edges_.size()) return edge_text(edges_.back()) + "+";
  return edge_text(edges_[bin]) + "-" + edge_text(edges_[bin + 1]);
}

std::size_t GroupedRateReport::total() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.total;
  return n;
}

namespace {

void finish_rates(GroupedRateReport& report) {
  for (auto& g : report.groups) {
    if (g.total > 0) {
      g.rate = static_cast<double>(g.outages) / static_cast<double>(g.total);
    } else {
      g.rate.reset();
    }
  }
}

void check_label_length(std::size_t n, std::size_t labels) {
  if (n != labels) throw ValidationError("grouped_outage_rate: values and labels differ in length");
  if (n == 0) throw ValidationError("grouped_outage_rate: no samples");
}

}  // namespace

GroupedRateReport grouped_outage_rate(std::span<const double> values, std::span<const int> labels,
                                      const BinSpec& bins) {
  check_label_length(values.size(), labels.size());
  GroupedRateReport report;
  for (std::size_t b = 0; b < bins.size(); ++b) report.groups.push_back({bins.label(b), 0, 0, {}});
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bin = bins.find(values[i]);
    if (!bin) {
      throw ValidationError("grouped_outage_rate: value " + csv::format_number(values[i]) +
                            " below the first bin edge");
    }
    auto& g = report.groups[*bin];
    ++g.total;
    if (labels[i] != 0) ++g.outages;
  }
  finish_rates(report);
  return report;
}

GroupedRateReport grouped_outage_rate(std::span<const std::string> keys, std::span<const int> labels,
                                      std::span<const std::string> group_order) {
  check_label_length(keys.size(), labels.size());
  GroupedRateReport report;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& name : group_order) {
    index.emplace(name, report.groups.size());
    report.groups.push_back({name, 0, 0, {}});
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto it = index.find(keys[i]);
    if (it == index.end()) {
      throw ValidationError("grouped_outage_rate: unknown group '" + keys[i] + "'");
    }
    auto& g = report.groups[it->second];
    ++g.total;
    if (labels[i] != 0) ++g.outages;
  }
  finish_rates(report);
  return report;
}

GroupedRateReport rates_by_wind(std::span<const DailySample> samples, const BinSpec& bins) {
  std::vector<double> wspd;
  std::vector<int> labels;
  wspd.reserve(samples.size());
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    wspd.push_back(s.wspd);
    labels.push_back(s.outage);
  }
  return grouped_outage_rate(wspd, labels, bins);
}

GroupedRateReport rates_by_snow(std::span<const DailySample> samples) {
  std::vector<std::string> keys;
  std::vector<int> labels;
  keys.reserve(samples.size());
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    keys.emplace_back(to_string(classify_snow(s.prcp, s.tavg)));
    labels.push_back(s.outage);
  }
  const std::vector<std::string> order{"No_Snow", "Dry_Snow", "Wet_Snow"};
  return grouped_outage_rate(keys, labels, order);
}

void write_rates_csv(std::ostream& out, const GroupedRateReport& report) {
  csv::Writer w(out);
  w.row({"group", "total", "outages", "rate"});
  for (const auto& g : report.groups) {
    w.field(g.group).field(std::to_string(g.total)).field(std::to_string(g.outages));
    if (g.rate) {
      w.field(*g.rate);
    } else {
      w.field("NA");
    }
    w.end_row();
  }
}

// ---------------------------------------------------------------------------

std::array<double, 5> one_hot_encode(Season season, SnowType snow) {
  std::array<double, 5> out{};
  switch (season) {
    case Season::summer: out[0] = 1.0; break;
    case Season::autumn: out[1] = 1.0; break;
    case Season::winter: out[2] = 1.0; break;
    case Season::spring: break;
  }
  switch (snow) {
    case SnowType::no_snow: out[3] = 1.0; break;
    case SnowType::wet_snow: out[4] = 1.0; break;
    case SnowType::dry_snow: break;
  }
  return out;
}

std::array<double, 5> one_hot_encode(std::string_view season, std::string_view snow) {
  return one_hot_encode(parse_season(season), parse_snow_type(snow));
}

const std::vector<std::string>& continuous_feature_names() {
  static const std::vector<std::string> names{"wspd",     "prcp",     "tavg",   "EVI",
                                              "wind_x",   "wind_y",   "cos_wdir", "sin_wdir",
                                              "ws_evi",   "wind_temp"};
  return names;
}

const std::vector<std::string>& dummy_feature_names() {
  static const std::vector<std::string> names{"season_summer", "season_autumn", "season_winter",
                                              "snow_type_No_Snow", "snow_type_Wet_Snow"};
  return names;
}

const std::vector<std::string>& model_feature_names() {
  static const std::vector<std::string> names = [] {
    auto all = continuous_feature_names();
    const auto& dummies = dummy_feature_names();
    all.insert(all.end(), dummies.begin(), dummies.end());
    return all;
  }();
  return names;
}

// ---------------------------------------------------------------------------

std::vector<double> FeatureTable::column_values(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::optional<std::size_t> FeatureTable::find_column(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t FeatureTable::column(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw ValidationError("feature table has no column '" + std::string(name) + "'");
}

void FeatureTable::append(std::span<const double> row_values, int label, Date date,
                          bool is_synthetic) {
  if (row_values.size() != cols()) throw ValidationError("FeatureTable::append: row width mismatch");
  values.insert(values.end(), row_values.begin(), row_values.end());
  labels.push_back(label);
  dates.push_back(date);
  synthetic.push_back(is_synthetic ? 1 : 0);
}

FeatureTable FeatureTable::empty_like() const {
  FeatureTable t;
  t.names = names;
  return t;
}

FeatureTable FeatureTable::subset(std::span<const std::size_t> row_indices) const {
  FeatureTable t = empty_like();
  t.values.reserve(row_indices.size() * cols());
  for (std::size_t i : row_indices) t.append(row(i), labels[i], dates[i], synthetic[i] != 0);
  return t;
}

void FeatureTable::validate() const {
  if (values.size() != rows() * cols()) throw ValidationError("FeatureTable: row width mismatch");
  if (dates.size() != rows() || synthetic.size() != rows()) {
    throw ValidationError("FeatureTable: per-row vectors differ in length");
  }
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("FeatureTable: duplicate feature names");
  }
}

std::vector<double> feature_row(const DailySample& s, const FeatureOptions& options) {
  const auto wind = decompose_wind(s.wspd, s.wdir, options.meteorological_direction);
  const auto inter = build_interactions(s.wspd, s.evi, s.tavg);
  const auto dummies = one_hot_encode(derive_season(s.date), classify_snow(s.prcp, s.tavg));
  std::vector<double> row{s.wspd,       s.prcp,       s.tavg,        s.evi,
                          wind.vx,      wind.vy,      wind.cos_dir,  wind.sin_dir,
                          inter.ws_evi, inter.wind_temp};
  row.insert(row.end(), dummies.begin(), dummies.end());
  return row;
}

FeatureTable build_feature_table(std::span<const DailySample> samples,
                                 const FeatureOptions& options) {
  FeatureTable table;
  table.names = model_feature_names();
  table.values.reserve(samples.size() * table.names.size());
  for (const auto& s : samples) table.append(feature_row(s, options), s.outage, s.date);
  return table;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  const bool any_synthetic =
      std::any_of(table.synthetic.begin(), table.synthetic.end(), [](auto v) { return v != 0; });
  csv::Writer w(out);
  for (const auto& n : table.names) w.field(n);
  w.field("label").field("date");
  if (any_synthetic) w.field("synthetic");
  w.end_row();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (double v : table.row(r)) w.field(v);
    w.field(std::to_string(table.labels[r])).field(format_date(table.dates[r]));
    if (any_synthetic) w.field(std::to_string(table.synthetic[r]));
    w.end_row();
  }
}

FeatureTable read_feature_csv(std::istream& in, std::string source) {
  const auto doc = csv::read(in, std::move(source));
  const std::size_t c_date = doc.column("date");
  const auto c_label = doc.find_column("label");
  const auto c_synth = doc.find_column("synthetic");

  FeatureTable table;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (c == c_date || (c_label && c == *c_label) || (c_synth && c == *c_synth)) continue;
    table.names.push_back(doc.header[c]);
    feature_cols.push_back(c);
  }

  std::vector<std::string> issues;
  std::vector<double> row(feature_cols.size());
  for (const auto& r : doc.rows) {
    if (r.fields.size() != doc.header.size()) {
      issues.push_back(doc.where(r) + ": wrong field count");
      continue;
    }
    bool ok = true;
    for (std::size_t j = 0; j < feature_cols.size() && ok; ++j) {
      const auto v = csv::parse_number(r.fields[feature_cols[j]]);
      if (!v || !std::isfinite(*v)) {
        issues.push_back(doc.where(r) + ": column '" + table.names[j] + "' is not a number");
        ok = false;
      } else {
        row[j] = *v;
      }
    }
    if (!ok) continue;
    Date date;
    try {
      date = parse_date(csv::trim(r.fields[c_date]));
    } catch (const ValidationError& e) {
      issues.push_back(doc.where(r) + ": " + e.what());
      continue;
    }
    long long label = 0;
    if (c_label) {
      const auto l = csv::parse_integer(r.fields[*c_label]);
      if (!l || (*l != 0 && *l != 1)) {
        issues.push_back(doc.where(r) + ": label must be 0 or 1");
        continue;
      }
      label = *l;
    }
    const bool synth = c_synth && csv::trim(r.fields[*c_synth]) == "1";
    table.append(row, static_cast<int>(label), date, synth);
  }
  if (!issues.empty()) throw ParseError(std::move(issues));
  table.validate();
  return table;
}

// ---------------------------------------------------------------------------

bool ScalingParams::covers(std::string_view name) const {
  return by_feature.find(std::string(name)) != by_feature.end();
}

const Moments& ScalingParams::at(std::string_view name) const {
  const auto it = by_feature.find(std::string(name));
  if (it == by_feature.end()) {
    throw ValidationError("no scaling parameters for feature '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> ScalingParams::degenerate_features() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : by_feature) {
    if (m.sd == 0.0) out.push_back(name);
  }
  return out;
}

ScalingParams fit_scaling(const FeatureTable& train, std::span<const std::string> continuous) {
  if (train.rows() < 2) throw ValidationError("fit_scaling: need at least 2 rows");
  ScalingParams params;
  const double n = static_cast<double>(train.rows());
  for (const auto& name : continuous) {
    const std::size_t c = train.column(name);
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) sum += train.at(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const double d = train.at(r, c) - mean;
      ss += d * d;
    }
    params.by_feature[name] = Moments{mean, std::sqrt(ss / n)};
  }
  return params;
}

ScalingParams fit_scaling(const FeatureTable& train) {
  std::vector<std::string> present;
  for (const auto& name : continuous_feature_names()) {
    if (train.find_column(name)) present.push_back(name);
  }
  return fit_scaling(train, present);
}

FeatureTable apply_scaling(FeatureTable table, const ScalingParams& params,
                           std::span<const std::string> continuous) {
  for (const auto& name : continuous) {
    const auto c = table.find_column(name);
    if (!c) continue;
    const Moments& m = params.at(name);
    for (std::size_t r = 0; r < table.rows(); ++r) {
      double& x = table.values[r * table.cols() + *c];
      x = m.sd > 0.0 ? (x - m.mean) / m.sd : 0.0;
    }
  }
  return table;
}

FeatureTable apply_scaling(FeatureTable table, const ScalingParams& params) {
  return apply_scaling(std::move(table), params, continuous_feature_names());
}

FeatureTable unscale(FeatureTable table, const ScalingParams& params,
                     std::span<const std::string> continuous) {
  for (const auto& name : continuous) {
    const auto c = table.find_column(name);
    if (!c) continue;
    const Moments& m = params.at(name);
    for (std::size_t r = 0; r < table.rows(); ++r) {
      double& z = table.values[r * table.cols() + *c];
      z = m.sd > 0.0 ? z * m.sd + m.mean : m.mean;
    }
  }
  return table;
}

}  // namespace vegrisk::features
