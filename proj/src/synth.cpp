#include "vegrisk/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/rng.hpp"

namespace vegrisk::synth {

namespace {

using ingest::DailySample;
using ingest::RawEviRecord;
using ingest::RawOutageRecord;
using ingest::RawWeatherRecord;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Divides rather than multiplies so the result is the double nearest the
// decimal, which keeps the CSV text short.
double round_to(double x, double scale) { return std::round(x * scale) / scale; }

int day_of_year(Date d) {
  return static_cast<int>((d - make_date(year_of(d), 1, 1)).count()) + 1;
}

// Seasonal climate loosely shaped on inland New England: cold snowy winters,
// mostly light wind with occasional storm days.
struct WeatherModel {
  std::mt19937_64 rng;
  double anomaly = 0.0;

  explicit WeatherModel(std::uint64_t seed) : rng(seed) {}

  RawWeatherRecord next(Date date) {
    const double doy = day_of_year(date);
    const double climatology = 9.5 - 13.0 * std::cos(kTwoPi * (doy - 20.0) / 365.25);
    anomaly = 0.7 * anomaly + std::normal_distribution<double>(0.0, 3.0)(rng);
    const double tavg = round_to(climatology + anomaly, 10.0);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double prcp = 0.0;
    if (unit(rng) < 0.32) prcp = round_to(std::gamma_distribution<double>(0.75, 10.0)(rng), 10.0);

    const bool storm = unit(rng) < 0.06;
    const double wspd =
        round_to(storm ? std::weibull_distribution<double>(2.5, 18.0)(rng)
                       : std::weibull_distribution<double>(2.2, 6.5)(rng),
                 10.0);

    double wdir = unit(rng) < 0.55 ? std::normal_distribution<double>(260.0, 45.0)(rng)
                                   : 360.0 * unit(rng);
    wdir = std::fmod(std::round(wdir), 360.0);
    if (wdir < 0.0) wdir += 360.0;
    return {date, tavg, prcp, wspd, wdir};
  }
};

// 16-day composites on the day-of-year grid 1, 17, 33, ... of each year,
// peaking in mid-summer.
std::vector<RawEviRecord> make_composites(DateRange range, Date last_composite,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<RawEviRecord> out;
  for (int y = year_of(range.first); y <= year_of(range.last); ++y) {
    const double year_shift = noise(rng);
    for (int doy = 1; doy <= 366; doy += 16) {
      const Date d = make_date(y, 1, 1) + std::chrono::days{doy - 1};
      if (year_of(d) != y || !range.contains(d) || d > last_composite) continue;
      const double seasonal = 0.33 + 0.2 * std::cos(kTwoPi * (doy - 196.0) / 365.25);
      const double evi = std::clamp(round_to(seasonal + year_shift + noise(rng), 1e4), -1.0, 1.0);
      out.push_back({d, evi});
    }
  }
  return out;
}

// Number of days whose uniform draw falls under the shifted probability.
std::size_t positives_at(std::span<const double> logits, std::span<const double> draws,
                         double shift) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i] + shift;
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    if (draws[i] < p) ++n;
  }
  return n;
}

double calibrate_shift(std::span<const double> logits, std::span<const double> draws,
                       std::size_t target) {
  double lo = -60.0;
  double hi = 60.0;
  double best = 0.0;
  std::size_t best_gap = logits.size() + 1;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t n = positives_at(logits, draws, mid);
    const std::size_t gap = n > target ? n - target : target - n;
    if (gap < best_gap) {
      best_gap = gap;
      best = mid;
    }
    if (n == target) break;
    if (n < target) lo = mid;
    else hi = mid;
  }
  return best;
}

}  // namespace

void SynthConfig::validate() const {
  if (years < 1) throw ValidationError("synth: years must be >= 1");
  if (!(base_rate > 0.0 && base_rate < 1.0)) throw ValidationError("synth: base_rate must be in (0, 1)");
  if (!(missing_fraction >= 0.0 && missing_fraction <= 0.01)) {
    throw ValidationError("synth: missing_fraction must be in [0, 0.01]");
  }
  if (evi_tail_gap_days < 0) throw ValidationError("synth: evi_tail_gap_days must be >= 0");
  if (other_outages_per_year < 0) throw ValidationError("synth: other_outages_per_year must be >= 0");
  const auto& names = features::model_feature_names();
  for (const auto& [name, beta] : planted_coefficients) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ValidationError("synth: planted coefficient for unknown feature '" + name + "'");
    }
    if (!std::isfinite(beta)) throw ValidationError("synth: non-finite planted coefficient");
  }
}

SynthDataset generate(const SynthConfig& config) {
  config.validate();
  SynthDataset data;
  data.range = {make_date(config.start_year, 1, 1), make_date(config.start_year + config.years - 1, 12, 31)};
  const std::size_t n_days = data.range.days();
  if (config.target_outages && *config.target_outages > n_days) {
    throw ValidationError("synth: target_outages " + std::to_string(*config.target_outages) +
                          " exceeds the " + std::to_string(n_days) + " generated days");
  }

  WeatherModel weather(derive_seed(config.seed, "weather"));
  data.weather.reserve(n_days);
  for (Date d = data.range.first; d <= data.range.last; d += std::chrono::days{1}) {
    data.weather.push_back(weather.next(d));
  }

  // A trailing gap needs at least one full history year before it.
  const int gap = config.years >= 2 ? config.evi_tail_gap_days : 0;
  const Date last_composite = data.range.last - std::chrono::days{gap};
  data.evi = make_composites(data.range, last_composite, derive_seed(config.seed, "evi"));
  const auto daily_evi = ingest::densify_evi(data.evi, data.range);

  data.truth.reserve(n_days);
  for (std::size_t i = 0; i < n_days; ++i) {
    const auto& w = data.weather[i];
    data.truth.push_back({w.date, *w.tavg, *w.prcp, *w.wspd, *w.wdir, *daily_evi[i].evi, 0});
  }

  // Plant the outage mechanism on z-scores of the generated features.
  const auto table = features::build_feature_table(data.truth);
  data.planting_scaling = features::fit_scaling(table);
  const auto scaled = features::apply_scaling(table, data.planting_scaling);
  std::vector<double> betas(scaled.cols(), 0.0);
  for (const auto& [name, beta] : config.planted_coefficients) betas[scaled.column(name)] = beta;

  const double base_logit = std::log(config.base_rate / (1.0 - config.base_rate));
  std::vector<double> logits(n_days, base_logit);
  for (std::size_t r = 0; r < n_days; ++r) {
    const auto x = scaled.row(r);
    for (std::size_t c = 0; c < betas.size(); ++c) logits[r] += betas[c] * x[c];
  }
  std::mt19937_64 label_rng(derive_seed(config.seed, "labels"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> draws(n_days);
  for (double& u : draws) u = unit(label_rng);

  double shift = 0.0;
  if (config.target_outages) {
    shift = *config.target_outages == 0 ? -1e6 : calibrate_shift(logits, draws, *config.target_outages);
  }
  data.planted_intercept = base_logit + shift;
  for (std::size_t r = 0; r < n_days; ++r) {
    const double z = logits[r] + shift;
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    data.truth[r].outage = draws[r] < p ? 1 : 0;
  }

  // Blank a few weather cells after labelling; the first three days stay
  // complete so imputation always has history.
  std::mt19937_64 blank_rng(derive_seed(config.seed, "blanks"));
  if (n_days > 3) {
    const auto per_column =
        static_cast<std::size_t>(std::floor(config.missing_fraction * static_cast<double>(n_days)));
    std::uniform_int_distribution<std::size_t> pick(3, n_days - 1);
    using Field = std::optional<double> RawWeatherRecord::*;
    for (Field f : std::array<Field, 4>{&RawWeatherRecord::tavg, &RawWeatherRecord::prcp,
                                        &RawWeatherRecord::wspd, &RawWeatherRecord::wdir}) {
      for (std::size_t k = 0; k < per_column; ++k) (data.weather[pick(blank_rng)].*f).reset();
    }
  }

  // Outage records: every positive day gets one to three vegetation
  // outages; other causes land on random days and never affect labels.
  std::mt19937_64 outage_rng(derive_seed(config.seed, "outages"));
  const std::array<std::string, 2> vegetation{"Tree Fall", "Branch Contact"};
  const std::array<std::string, 4> other{"Equipment Failure", "Animal Contact", "Lightning",
                                         "Vehicle Accident"};
  std::exponential_distribution<double> duration(1.0 / 180.0);
  std::uniform_int_distribution<int> customers(1, 400);
  std::uniform_int_distribution<int> span(1, 240);
  auto make_record = [&](Date d, const std::string& cause) {
    return RawOutageRecord{d, cause, "Line 3 span " + std::to_string(span(outage_rng)),
                           std::round(duration(outage_rng)), customers(outage_rng)};
  };
  for (const auto& day : data.truth) {
    if (!day.outage) continue;
    const double u = unit(outage_rng);
    const int count = 1 + (u < 0.25 ? 1 : 0) + (u < 0.05 ? 1 : 0);
    for (int k = 0; k < count; ++k) {
      data.outages.push_back(make_record(day.date, vegetation[unit(outage_rng) < 0.5 ? 0 : 1]));
    }
  }
  std::uniform_int_distribution<std::size_t> any_day(0, n_days - 1);
  std::uniform_int_distribution<std::size_t> any_cause(0, other.size() - 1);
  for (int k = 0; k < config.other_outages_per_year * config.years; ++k) {
    const Date d = data.range.first + std::chrono::days{static_cast<long>(any_day(outage_rng))};
    data.outages.push_back(make_record(d, other[any_cause(outage_rng)]));
  }
  std::stable_sort(data.outages.begin(), data.outages.end(),
                   [](const auto& a, const auto& b) { return a.date < b.date; });
  return data;
}

void write_dataset(const SynthDataset& data, const std::filesystem::path& dir) {
  std::ostringstream weather;
  ingest::write_weather_csv(weather, data.weather);
  csv::write_text_file(dir / "weather.csv", weather.str());
  std::ostringstream evi;
  ingest::write_evi_csv(evi, data.evi);
  csv::write_text_file(dir / "evi.csv", evi.str());
  std::ostringstream outages;
  ingest::write_outage_csv(outages, data.outages);
  csv::write_text_file(dir / "outages.csv", outages.str());
}

}  // namespace vegrisk::synth
