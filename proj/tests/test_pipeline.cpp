#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "vegrisk/config.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/ingest.hpp"
#include "vegrisk/log.hpp"
#include "vegrisk/pipeline.hpp"
#include "vegrisk/synth.hpp"

using namespace vegrisk;
using namespace vegrisk::cli;
namespace fs = std::filesystem;

namespace {

struct CaptureLog {
  std::vector<std::string> lines;
  log::Sink previous;
  CaptureLog() {
    previous = log::set_sink([this](log::Level, std::string_view m) { lines.emplace_back(m); });
  }
  ~CaptureLog() { log::set_sink(previous); }
  [[nodiscard]] bool contains(std::string_view needle) const {
    for (const auto& l : lines) {
      if (l.find(needle) != std::string::npos) return true;
    }
    return false;
  }
};

int run_cli(const std::string& args, const fs::path& log_file) {
  const std::string cmd = std::string("\"") + VEGRISK_CLI + "\" " + args + " > \"" +
                          log_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig c;
  c.output_dir = out;
  c.synth.years = 3;
  c.synth.target_outages = 60;
  return c;
}

}  // namespace

TEST_CASE("config: defaults, overrides, path resolution and rejection") {
  const auto c = parse_config(R"({"seed": 9, "paths": {"output_dir": "o"},
      "train": {"train_fraction": 0.7, "l2": 0.5},
      "resample": {"enabled": false, "smote_k": 3},
      "features": {"direction_convention": "meteorological", "wind_bins": [0, 10, 20]},
      "synth": {"years": 2, "target_outages": null},
      "evaluate": {"min_cell_count": 30}})",
                              "/base");
  CHECK(c.seed == 9);
  CHECK(c.output_dir == fs::path("/base/o"));
  CHECK(c.weather() == fs::path("/base/o/weather.csv"));
  CHECK(c.train_fraction == 0.7);
  CHECK(c.train.l2 == 0.5);
  CHECK_FALSE(c.resample_enabled);
  CHECK(c.resample.smote_k == 3);
  CHECK(c.feature_options.meteorological_direction);
  CHECK(c.wind_bins == std::vector<double>{0, 10, 20});
  CHECK_FALSE(c.synth.target_outages.has_value());
  CHECK(c.evaluation.min_cell_count == 30);

  const auto d = parse_config("{}", "/base");
  CHECK(d.output_dir == fs::path("/base/out"));
  CHECK(d.seed == 42);

  CHECK_THROWS_AS(parse_config(R"({"train": {"train_fraction": 1.0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"trian": {}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"resample": {"enn_k": 4}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"seed": "x"})"), ValidationError);
  CHECK_THROWS_AS(parse_config("not json"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"features": {"direction_convention": "sideways"}})"),
                  ValidationError);
}

TEST_CASE("train_pipeline keeps the test split out of scaling and resampling") {
  CaptureLog log;
  const auto data = synth::generate([] {
    synth::SynthConfig s;
    s.years = 3;
    s.target_outages = 60;
    return s;
  }());
  const auto prepared = prepare_pipeline(data.weather, data.evi, data.outages, small_config("unused"));
  const auto& samples = prepared.samples;
  REQUIRE(samples.size() == data.range.days());

  const auto out = train_pipeline(samples, small_config("unused"));
  CHECK(out.last_train_date < out.first_test_date);
  CHECK(out.train_rows + out.test_rows == samples.size());
  CHECK(out.scaling_rows == out.train_rows);
  CHECK(out.resample_input_rows == out.train_rows);

  // Scaling statistics equal the moments of the train rows alone.
  const auto table = features::build_feature_table(samples);
  const auto split = eval::temporal_split(table, 0.8);
  const auto train_only = features::fit_scaling(split.train);
  CHECK(out.model.scaling == train_only);
  CHECK_FALSE(out.model.scaling == features::fit_scaling(table));

  // Test-set means under train scaling are not forced to zero.
  bool any_nonzero = false;
  for (const auto& [name, mean] : out.test_scaled_means) any_nonzero |= std::abs(mean) > 1e-6;
  CHECK(any_nonzero);

  CHECK(log.contains("scaling fitted on " + std::to_string(out.train_rows) + " train rows only"));
  CHECK(log.contains("SMOTEENN applied to " + std::to_string(out.train_rows) + " train rows only"));
  CHECK(log.contains("train/fit: done in"));
}

TEST_CASE("prepare_pipeline rates match a brute-force recount") {
  CaptureLog log;
  synth::SynthConfig s;
  s.years = 2;
  s.target_outages = 40;
  const auto data = synth::generate(s);
  const auto prepared = prepare_pipeline(data.weather, data.evi, data.outages, small_config("unused"));
  std::vector<double> speeds;
  std::vector<int> labels;
  for (const auto& d : prepared.samples) {
    speeds.push_back(d.wspd);
    labels.push_back(d.outage);
  }
  const auto want = oracle::tally_bins(speeds, labels, {0, 5, 10, 15, 20, 25});
  for (std::size_t b = 0; b < want.size(); ++b) {
    CHECK(prepared.rates_by_wind.groups[b].total == want[b].total);
    CHECK(prepared.rates_by_wind.groups[b].outages == want[b].outages);
  }
  CHECK(log.contains("evi: filling"));
}

TEST_CASE("score_day: validation and risk ordering under a fitted model") {
  CaptureLog log;
  const auto dir = oracle::temp_dir("score");
  auto c = small_config(dir);
  cmd_synth(c);
  cmd_prepare(c);
  const auto trained = cmd_train(c);
  const auto& m = trained.model;

  const RawDay storm{parse_date("2023-11-05"), 30, 270, 2, 1, 0.6};
  const RawDay calm{parse_date("2023-11-05"), 1, 270, 3, -8, 0.2};
  CHECK(score_day(m, storm) > score_day(m, calm));
  CHECK(score_day(m, storm) == score_day(m, storm));

  RawDay bad = storm;
  bad.wdir = 360;
  CHECK_THROWS_AS(validate_raw_day(bad), ValidationError);
  bad = storm;
  bad.evi = 1.5;
  CHECK_THROWS_AS(validate_raw_day(bad), ValidationError);
  bad = storm;
  bad.prcp = -1;
  CHECK_THROWS_AS(validate_raw_day(bad), ValidationError);

  ScoreRequest r;
  r.day = storm;
  std::ostringstream out;
  cmd_score(c, r, out);
  CHECK(out.str().rfind("date,score\n2023-11-05,", 0) == 0);

  // Model/feature mismatch names the missing feature.
  std::ofstream(dir / "bad_features.csv") << "wspd,label,date\n3,0,2020-01-01\n";
  ScoreRequest fr;
  fr.features_csv = dir / "bad_features.csv";
  try {
    std::ostringstream sink;
    cmd_score(c, fr, sink);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("EVI") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli: exit codes for usage, validation and runtime errors") {
  const auto dir = oracle::temp_dir("cli_codes");
  CHECK(run_cli("--help", dir / "log.txt") == 0);
  CHECK(run_cli("", dir / "log.txt") == 1);
  CHECK(run_cli("frobnicate", dir / "log.txt") == 1);

  std::ofstream(dir / "bad.json") << R"({"train": {"train_fraction": 1.0}})";
  CHECK(run_cli("--config \"" + (dir / "bad.json").string() + "\" synth", dir / "log.txt") == 1);
  CHECK(oracle::slurp(dir / "log.txt").find("train_fraction") != std::string::npos);

  // prepare with no inputs on disk: a validation error naming the file.
  CHECK(run_cli("--output \"" + (dir / "empty").string() + "\" prepare", dir / "log.txt") == 1);
  CHECK(oracle::slurp(dir / "log.txt").find("weather.csv") != std::string::npos);

  // Out-of-range single-day input.
  CHECK(run_cli("--output \"" + (dir / "empty").string() +
                    "\" score --date 2023-11-05 --wspd 30 --wdir 400 --prcp 2 --tavg 1 --evi 0.6",
                dir / "log.txt") == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli: default synthetic run end to end, flags after the subcommand") {
  const auto dir = oracle::temp_dir("cli_e2e");
  const std::string out = "--output \"" + (dir / "out").string() + "\"";
  const auto log_file = dir / "log.txt";
  REQUIRE(run_cli("synth " + out, log_file) == 0);
  for (const char* f : {"weather.csv", "evi.csv", "outages.csv"}) CHECK(fs::exists(dir / "out" / f));

  REQUIRE(run_cli(out + " prepare", log_file) == 0);
  for (const char* f : {"daily.csv", "rates_by_wind.csv", "rates_by_snow.csv", "features.csv"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  std::ifstream daily(dir / "out" / "daily.csv");
  std::size_t lines = 0;
  for (std::string l; std::getline(daily, l);) ++lines;
  CHECK(lines == 3653 + 1);

  REQUIRE(run_cli(out + " train", log_file) == 0);
  const auto train_log = oracle::slurp(log_file);
  CHECK(train_log.find("train/fit: done in") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "model.json"));
  CHECK(fs::exists(dir / "out" / "coefficients.csv"));

  REQUIRE(run_cli(out + " evaluate", log_file) == 0);
  const auto console = oracle::slurp(log_file);
  CHECK(console.find("logistic_regression") != std::string::npos);
  const auto report = nlohmann::json::parse(oracle::slurp(dir / "out" / "report.json"));
  for (const char* key : {"precision", "recall", "f1", "roc_auc", "match_rate"}) {
    CHECK_MESSAGE(report.at(key).is_number(), key);  // every metric defined
  }

  // Cell match rate on the default run.
  std::istringstream metrics(oracle::slurp(dir / "out" / "metrics.csv"));
  std::string header;
  std::string row;
  std::getline(metrics, header);
  std::getline(metrics, row);
  std::vector<std::string> fields;
  std::stringstream ss(row);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 14);
  CHECK(std::stod(fields[11]) >= 0.6);

  // External predictions reuse the same report schema.
  std::ofstream preds(dir / "preds.csv");
  preds << "date,score\n";
  for (auto d = parse_date("2023-01-01"); d <= parse_date("2024-12-31"); d += std::chrono::days{1}) {
    preds << format_date(d) << ",0.04\n";
  }
  preds.close();
  REQUIRE(run_cli(out + " evaluate --predictions \"" + (dir / "preds.csv").string() +
                      "\" --name constant",
                  log_file) == 0);
  CHECK(fs::exists(dir / "out" / "heatmap_constant.csv"));
  CHECK(oracle::slurp(dir / "out" / "metrics.csv").find("\nconstant,") != std::string::npos);

  REQUIRE(run_cli(out + " score --date 2023-11-05 --wspd 30 --wdir 270 --prcp 2 --tavg 1 --evi 0.6",
                  log_file) == 0);
  const auto first = oracle::slurp(log_file);
  REQUIRE(run_cli(out + " score --date 2023-11-05 --wspd 30 --wdir 270 --prcp 2 --tavg 1 --evi 0.6",
                  log_file) == 0);
  CHECK(oracle::slurp(log_file) == first);
  CHECK(first.find("2023-11-05,") != std::string::npos);

  REQUIRE(run_cli(out + " score --features \"" + (dir / "out" / "features.csv").string() +
                      "\" --out \"" + (dir / "scores.csv").string() + "\"",
                  log_file) == 0);
  std::ifstream scores(dir / "scores.csv");
  lines = 0;
  for (std::string l; std::getline(scores, l);) ++lines;
  CHECK(lines == 3653 + 1);
  fs::remove_all(dir);
}
