// vegrisk: outage-risk pipeline driver.
//
//   vegrisk --config run.json synth
//   vegrisk --config run.json prepare
//   vegrisk --config run.json train
//   vegrisk --config run.json evaluate [--predictions baseline.csv --name xgb]
//   vegrisk --config run.json score --date 2023-11-05 --wspd 30 --wdir 270 --prcp 2 --tavg 1 --evi 0.6
//
// Exit codes: 0 success, 1 validation error, 2 runtime or numeric error.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vegrisk/config.hpp"
#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"
#include "vegrisk/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace vegrisk;

constexpr int kValidationExit = 1;
constexpr int kRuntimeExit = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vegetation-related outage risk: synthetic data, features, SMOTEENN, logistic model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Root random seed (overrides the config)");
  app.add_option("--output", output_dir, "Output directory (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Generate synthetic weather, EVI and outage CSVs");
  auto* prepare = app.add_subcommand("prepare", "Ingest, repair and join inputs into daily.csv");
  auto* train = app.add_subcommand("train", "Fit the logistic risk model from daily.csv");

  auto* evaluate = app.add_subcommand("evaluate", "Score the temporal test split and write reports");
  cli::EvaluateRequest eval_request;
  std::string eval_model;
  std::string predictions;
  evaluate->add_option("--model", eval_model, "Model JSON (default <output>/model.json)");
  evaluate->add_option("--predictions", predictions, "External date,score CSV to compare");
  evaluate->add_option("--name", eval_request.predictions_name, "Label for the external scores");

  auto* score = app.add_subcommand("score", "Outage probability for a feature CSV or one day");
  std::string score_model;
  std::string features_csv;
  std::string out_path;
  std::string day_date;
  cli::RawDay day;
  score->add_option("--model", score_model, "Model JSON (default <output>/model.json)");
  score->add_option("--features", features_csv, "Raw feature CSV (features.csv schema)");
  score->add_option("--out", out_path, "Write scores here instead of stdout");
  score->add_option("--date", day_date, "Day to score (YYYY-MM-DD)");
  score->add_option("--wspd", day.wspd, "Wind speed, m/s");
  score->add_option("--wdir", day.wdir, "Wind direction, degrees");
  score->add_option("--prcp", day.prcp, "Precipitation, mm");
  score->add_option("--tavg", day.tavg, "Average temperature, C");
  score->add_option("--evi", day.evi, "Enhanced vegetation index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  try {
    cli::PipelineConfig config =
        config_path.empty() ? cli::PipelineConfig{} : cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!output_dir.empty()) config.output_dir = output_dir;
    config.validate();

    if (synth->parsed()) {
      cli::cmd_synth(config);
    } else if (prepare->parsed()) {
      cli::cmd_prepare(config);
    } else if (train->parsed()) {
      cli::cmd_train(config);
    } else if (evaluate->parsed()) {
      if (!eval_model.empty()) eval_request.model_path = eval_model;
      if (!predictions.empty()) eval_request.predictions = predictions;
      cli::cmd_evaluate(config, eval_request, std::cout);
    } else if (score->parsed()) {
      cli::ScoreRequest request;
      if (!score_model.empty()) request.model_path = score_model;
      if (!features_csv.empty()) request.features_csv = features_csv;
      if (!day_date.empty()) {
        day.date = parse_date(day_date);
        request.day = day;
      }
      if (out_path.empty()) {
        cli::cmd_score(config, request, std::cout);
      } else {
        std::ostringstream text;
        cli::cmd_score(config, request, text);
        csv::write_text_file(out_path, text.str());
      }
    }
  } catch (const ValidationError& e) {
    log::error(e.what());
    return kValidationExit;
  } catch (const std::exception& e) {
    log::error(e.what());
    return kRuntimeExit;
  }
  return 0;
}
