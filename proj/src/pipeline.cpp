#include "vegrisk/pipeline.hpp"

#include <cmath>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"
#include "vegrisk/resample.hpp"
#include "vegrisk/rng.hpp"
#include "vegrisk/synth.hpp"

namespace vegrisk::cli {

namespace {

// Logs "<stage>: done in N ms" when it goes out of scope.
class StageTimer {
 public:
  explicit StageTimer(std::string stage)
      : stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;
  ~StageTimer() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    log::info(stage_ + ": done in " + std::to_string(ms) + " ms");
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

std::string text_of(const auto& writer_fn) {
  std::ostringstream out;
  writer_fn(out);
  return out.str();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

double positive_fraction(const features::FeatureTable& table) {
  const auto positives = std::count_if(table.labels.begin(), table.labels.end(),
                                       [](int l) { return l != 0; });
  return static_cast<double>(positives) / static_cast<double>(table.rows());
}

double logit_of(double p) { return std::log(p / (1.0 - p)); }

std::string fixed_or_na(const std::optional<double>& v) { return v ? fixed(*v) : "NA"; }

std::size_t count_positive(std::span<const DailySample> samples) {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.outage != 0; }));
}

}  // namespace

// ---------------------------------------------------------------------------

PreparedData prepare_pipeline(std::span<const ingest::RawWeatherRecord> weather,
                              std::span<const ingest::RawEviRecord> evi,
                              std::span<const ingest::RawOutageRecord> outages,
                              const PipelineConfig& config) {
  if (weather.empty()) throw ValidationError("prepare: weather file has no rows");
  const DateRange range{config.start_date.value_or(weather.front().date),
                        config.end_date.value_or(weather.back().date)};
  if (range.days() == 0) throw ValidationError("prepare: empty date range");

  auto complete = ingest::impute_weather(ingest::reindex_weather(weather, range));
  const auto daily_evi =
      ingest::densify_evi(evi, range, config.evi_cutoff, config.evi_history_years);
  auto joined = ingest::join_daily(complete, daily_evi, outages, config.vegetation_causes);

  PreparedData out;
  out.dropped_outages = joined.dropped_outages;
  out.samples = std::move(joined.samples);
  out.rates_by_wind = features::rates_by_wind(out.samples, features::BinSpec(config.wind_bins));
  out.rates_by_snow = features::rates_by_snow(out.samples);
  return out;
}

features::FeatureTable test_split(std::span<const DailySample> samples,
                                  const PipelineConfig& config) {
  const auto table = features::build_feature_table(samples, config.feature_options);
  return eval::temporal_split(table, config.train_fraction).test;
}

TrainOutcome train_pipeline(std::span<const DailySample> samples, const PipelineConfig& config) {
  config.validate();
  TrainOutcome out;

  features::FeatureTable raw;
  {
    StageTimer t("train/features");
    raw = features::build_feature_table(samples, config.feature_options);
  }
  auto split = eval::temporal_split(raw, config.train_fraction);
  if (split.train.rows() == 0 || split.test.rows() == 0) {
    throw ValidationError("train: temporal split left an empty train or test set");
  }
  out.train_rows = split.train.rows();
  out.test_rows = split.test.rows();
  out.last_train_date = split.train.dates.back();
  out.first_test_date = split.test.dates.front();
  if (!(out.last_train_date < out.first_test_date)) {
    throw std::logic_error("train: temporal split overlaps in time");
  }
  log::info("train: split " + std::to_string(out.train_rows) + " train rows (" +
            format_date(split.train.dates.front()) + ".." + format_date(out.last_train_date) +
            ") / " + std::to_string(out.test_rows) + " test rows (" +
            format_date(out.first_test_date) + ".." + format_date(split.test.dates.back()) + ")");

  features::ScalingParams scaling;
  features::FeatureTable train_scaled;
  {
    StageTimer t("train/scaling");
    scaling = features::fit_scaling(split.train);
    out.scaling_rows = split.train.rows();
    train_scaled = features::apply_scaling(split.train, scaling);
  }
  log::info("train: scaling fitted on " + std::to_string(out.scaling_rows) +
            " train rows only (test rows excluded)");
  for (const auto& name : scaling.degenerate_features()) {
    log::warn("train: feature " + name + " is constant on the train split; it scales to 0");
  }

  const auto test_scaled = features::apply_scaling(split.test, scaling);
  std::string means = "train: test-set means under train scaling:";
  for (const auto& name : features::continuous_feature_names()) {
    const auto values = test_scaled.column_values(test_scaled.column(name));
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    out.test_scaled_means.emplace_back(name, mean);
    means += " " + name + "=" + fixed(mean);
  }
  log::info(means);

  features::FeatureTable fit_table;
  if (config.resample_enabled) {
    StageTimer t("train/resample");
    auto rc = config.resample;
    rc.seed = derive_seed(config.seed, "resample");
    out.resample_input_rows = train_scaled.rows();
    fit_table = resample::smoteenn(train_scaled, rc);
    log::info("train: SMOTEENN applied to " + std::to_string(out.resample_input_rows) +
              " train rows only; test rows untouched");
  } else {
    log::info("train: resampling disabled");
    fit_table = std::move(train_scaled);
  }

  {
    StageTimer t("train/fit");
    auto tc = config.train;
    tc.seed = derive_seed(config.seed, "train");
    out.fitted_rows = fit_table.rows();
    out.model = model::fit(fit_table, tc);
    out.model.scaling = scaling;
  }
  if (config.resample_enabled && config.prior_correction) {
    const double shift = logit_of(positive_fraction(split.train)) -
                         logit_of(positive_fraction(fit_table));
    out.model.intercept += shift;
    log::info("train: prior correction shifted the intercept by " + fixed(shift, 6) +
              " to the train base rate");
  }
  log::info("train: fitted on " + std::to_string(out.fitted_rows) + " rows in " +
            std::to_string(out.model.metadata.iterations) + " iterations, loss " +
            fixed(out.model.metadata.final_loss, 6));
  return out;
}

eval::EvaluationReport evaluate_pipeline(std::span<const DailySample> samples,
                                         const model::LogisticModel& model,
                                         const PipelineConfig& config) {
  const auto test = test_split(samples, config);
  if (test.rows() == 0) throw ValidationError("evaluate: test split is empty");
  const auto scores = model::predict_proba_raw(model, test);
  return eval::evaluate(test, scores, config.evaluation, "logistic_regression");
}

// ---------------------------------------------------------------------------

SynthSummary cmd_synth(const PipelineConfig& config) {
  StageTimer t("synth");
  auto sc = config.synth;
  sc.seed = derive_seed(config.seed, "synth");
  const auto data = synth::generate(sc);
  synth::write_dataset(data, config.output_dir);
  SynthSummary summary{data.truth.size(), count_positive(data.truth), data.outages.size()};
  log::info("synth: wrote " + std::to_string(summary.days) + " days, " +
            std::to_string(summary.positive_days) + " outage days, " +
            std::to_string(summary.outage_records) + " outage records to " +
            config.output_dir.string());
  return summary;
}

PrepareSummary cmd_prepare(const PipelineConfig& config) {
  StageTimer t("prepare");
  const auto weather = ingest::parse_weather(config.weather());
  const auto evi = ingest::parse_evi(config.evi());
  const auto outages = ingest::parse_outages(config.outages());
  const auto data = prepare_pipeline(weather, evi, outages, config);

  const auto& dir = config.output_dir;
  csv::write_text_file(dir / "daily.csv",
                       text_of([&](std::ostream& o) { ingest::write_daily_csv(o, data.samples); }));
  csv::write_text_file(dir / "rates_by_wind.csv", text_of([&](std::ostream& o) {
                         features::write_rates_csv(o, data.rates_by_wind);
                       }));
  csv::write_text_file(dir / "rates_by_snow.csv", text_of([&](std::ostream& o) {
                         features::write_rates_csv(o, data.rates_by_snow);
                       }));
  const auto table = features::build_feature_table(data.samples, config.feature_options);
  csv::write_text_file(dir / "features.csv",
                       text_of([&](std::ostream& o) { features::write_feature_csv(o, table); }));

  PrepareSummary summary{data.samples.size(), count_positive(data.samples), data.dropped_outages};
  log::info("prepare: " + std::to_string(summary.days) + " days, " +
            std::to_string(summary.positive_days) + " outage days -> " + (dir / "daily.csv").string());
  return summary;
}

TrainOutcome cmd_train(const PipelineConfig& config) {
  const auto samples = ingest::read_daily_csv(config.daily());
  auto outcome = train_pipeline(samples, config);
  model::save(outcome.model, config.model_file());
  const auto report = model::coefficient_report(outcome.model);
  csv::write_text_file(config.output_dir / "coefficients.csv", text_of([&](std::ostream& o) {
                         model::write_coefficients_csv(o, report);
                       }));
  log::info("train: wrote " + config.model_file().string());
  return outcome;
}

std::vector<eval::EvaluationReport> cmd_evaluate(const PipelineConfig& config,
                                                 const EvaluateRequest& request,
                                                 std::ostream& console) {
  StageTimer t("evaluate");
  const auto model = model::load(request.model_path.value_or(config.model_file()));
  const auto samples = ingest::read_daily_csv(config.daily());
  const auto test = test_split(samples, config);
  if (test.rows() == 0) throw ValidationError("evaluate: test split is empty");

  auto options = config.evaluation;
  if (options.evi_edges.empty()) {
    options.evi_edges =
        eval::equal_width_bins(test.column_values(test.column("EVI")), options.evi_bin_count).edges();
  }

  std::vector<eval::EvaluationReport> reports;
  reports.push_back(
      eval::evaluate(test, model::predict_proba_raw(model, test), options, "logistic_regression"));
  if (request.predictions) {
    std::ifstream in(*request.predictions, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + request.predictions->string() + "'");
    const auto external = eval::read_predictions_csv(in, request.predictions->string());
    reports.push_back(eval::evaluate(test, eval::align_predictions(test, external), options,
                                     request.predictions_name));
  }

  const auto& dir = config.output_dir;
  csv::write_text_file(dir / "metrics.csv",
                       text_of([&](std::ostream& o) { eval::write_metrics_csv(o, reports); }));
  for (const auto& r : reports) {
    const std::string suffix = &r == &reports.front() ? "" : "_" + r.model_name;
    csv::write_text_file(dir / ("heatmap" + suffix + ".csv"),
                         text_of([&](std::ostream& o) { eval::write_heatmap_csv(o, r); }));
    csv::write_text_file(dir / ("report" + suffix + ".json"), eval::report_json(r));
  }
  csv::write_text_file(dir / "coefficients.csv", text_of([&](std::ostream& o) {
                         model::write_coefficients_csv(o, model::coefficient_report(model));
                       }));

  console << std::left << std::setw(22) << "model" << std::setw(11) << "precision"
          << std::setw(9) << "recall" << std::setw(9) << "f1" << std::setw(9) << "roc_auc"
          << "match_rate\n";
  for (const auto& r : reports) {
    console << std::left << std::setw(22) << r.model_name << std::setw(11)
            << fixed_or_na(r.metrics.precision) << std::setw(9) << fixed_or_na(r.metrics.recall)
            << std::setw(9) << fixed_or_na(r.metrics.f1) << std::setw(9) << fixed_or_na(r.roc_auc)
            << fixed_or_na(r.match_rate) << '\n';
  }
  console << "test rows: " << test.rows() << ", threshold " << options.threshold
          << ", match tolerance +/-" << options.tolerance << '\n';
  return reports;
}

void validate_raw_day(const RawDay& day) {
  if (!(day.wspd >= 0.0)) throw ValidationError("score: wspd must be >= 0");
  if (!(day.prcp >= 0.0)) throw ValidationError("score: prcp must be >= 0");
  if (!(day.wdir >= 0.0 && day.wdir < 360.0)) throw ValidationError("score: wdir must be in [0, 360)");
  if (!(day.evi >= -1.0 && day.evi <= 1.0)) throw ValidationError("score: evi must be in [-1, 1]");
  if (!std::isfinite(day.tavg)) throw ValidationError("score: tavg must be finite");
}

double score_day(const model::LogisticModel& model, const RawDay& day,
                 const features::FeatureOptions& options) {
  validate_raw_day(day);
  const DailySample sample{day.date, day.tavg, day.prcp, day.wspd, day.wdir, day.evi, 0};
  const auto table = features::build_feature_table(std::span(&sample, 1), options);
  return model::predict_proba_raw(model, table).front();
}

void cmd_score(const PipelineConfig& config, const ScoreRequest& request, std::ostream& out) {
  if (request.features_csv.has_value() == request.day.has_value()) {
    throw ValidationError("score: give either a feature CSV or one day's raw values");
  }
  const auto model = model::load(request.model_path.value_or(config.model_file()));
  csv::Writer w(out);
  w.row({"date", "score"});
  if (request.day) {
    w.field(format_date(request.day->date)).field(score_day(model, *request.day, config.feature_options));
    w.end_row();
    return;
  }
  std::ifstream in(*request.features_csv, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + request.features_csv->string() + "'");
  const auto table = features::read_feature_csv(in, request.features_csv->string());
  const auto scores = model::predict_proba_raw(model, table);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    w.field(format_date(table.dates[r])).field(scores[r]);
    w.end_row();
  }
}

}  // namespace vegrisk::cli
