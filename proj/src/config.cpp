#include "vegrisk/config.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "vegrisk/errors.hpp"

namespace vegrisk::cli {

using json = nlohmann::json;

std::filesystem::path PipelineConfig::weather() const {
  return weather_path.empty() ? output_dir / "weather.csv" : weather_path;
}
std::filesystem::path PipelineConfig::outages() const {
  return outages_path.empty() ? output_dir / "outages.csv" : outages_path;
}
std::filesystem::path PipelineConfig::evi() const {
  return evi_path.empty() ? output_dir / "evi.csv" : evi_path;
}

void PipelineConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("config: train_fraction must be in (0, 1), got " +
                          std::to_string(train_fraction));
  }
  if (start_date && end_date && *end_date < *start_date) {
    throw ValidationError("config: end date precedes start date");
  }
  if (vegetation_causes.empty()) throw ValidationError("config: vegetation_causes is empty");
  features::BinSpec{wind_bins};
  features::BinSpec{evaluation.wind_edges};
  if (!evaluation.evi_edges.empty()) features::BinSpec{evaluation.evi_edges};
  if (evaluation.evi_bin_count < 1) throw ValidationError("config: evi_bin_count must be >= 1");
  if (!(evaluation.threshold > 0.0 && evaluation.threshold < 1.0)) {
    throw ValidationError("config: threshold must be in (0, 1)");
  }
  if (!(evaluation.tolerance >= 0.0)) throw ValidationError("config: tolerance must be >= 0");
  synth.validate();
  resample.validate();
  train.validate();
}

namespace {

// Reads known keys from one JSON object and rejects anything else.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError("config: '" + path_ + "' must be an object");
  }

  ~Section() = default;

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: '" + path_ + key + "' has the wrong type");
    }
  }

  void read_date(const char* key, std::optional<Date>& out) {
    std::string text;
    read(key, text);
    if (!text.empty()) out = parse_date(text);
  }

  void read_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string text;
    read(key, text);
    if (text.empty()) return;
    const std::filesystem::path p(text);
    out = p.is_absolute() || base.empty() ? p : base / p;
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return std::nullopt;
    return Section(*it, path_ + key + ".");
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) throw ValidationError("config: unknown key '" + path_ + key + "'");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }

  PipelineConfig cfg;
  if (!base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
  Section root(doc, "");
  root.read("seed", cfg.seed);

  if (auto s = root.child("paths")) {
    s->read_path("output_dir", cfg.output_dir, base_dir);
    s->read_path("weather", cfg.weather_path, base_dir);
    s->read_path("outages", cfg.outages_path, base_dir);
    s->read_path("evi", cfg.evi_path, base_dir);
    s->finish();
  }

  if (auto s = root.child("date_range")) {
    s->read_date("start", cfg.start_date);
    s->read_date("end", cfg.end_date);
    s->finish();
  }

  std::vector<std::string> causes;
  root.read("vegetation_causes", causes);
  if (!causes.empty()) cfg.vegetation_causes = {causes.begin(), causes.end()};

  if (auto s = root.child("features")) {
    s->read("wind_bins", cfg.wind_bins);
    std::string convention = "math";
    s->read("direction_convention", convention);
    if (convention == "meteorological") {
      cfg.feature_options.meteorological_direction = true;
    } else if (convention != "math") {
      throw ValidationError("config: direction_convention must be 'math' or 'meteorological'");
    }
    std::string season_rule = "meteorological";
    s->read("season_rule", season_rule);
    if (season_rule != "meteorological") {
      throw ValidationError("config: only the 'meteorological' season rule is supported");
    }
    s->read_date("evi_cutoff", cfg.evi_cutoff);
    std::vector<int> years;
    s->read("evi_history_years", years);
    if (!years.empty()) cfg.evi_history_years = years;
    s->finish();
  }

  if (auto s = root.child("synth")) {
    auto& sc = cfg.synth;
    s->read("years", sc.years);
    s->read("start_year", sc.start_year);
    if (const json* t = s->raw("target_outages")) {
      if (t->is_null()) {
        sc.target_outages.reset();
      } else if (t->is_number_unsigned()) {
        sc.target_outages = t->get<std::size_t>();
      } else {
        throw ValidationError("config: 'synth.target_outages' must be a count or null");
      }
    }
    std::map<std::string, double> planted;
    s->read("planted_coefficients", planted);
    if (!planted.empty()) sc.planted_coefficients = planted;
    s->read("base_rate", sc.base_rate);
    s->read("missing_fraction", sc.missing_fraction);
    s->read("evi_tail_gap_days", sc.evi_tail_gap_days);
    s->read("other_outages_per_year", sc.other_outages_per_year);
    s->finish();
  }

  if (auto s = root.child("resample")) {
    s->read("enabled", cfg.resample_enabled);
    s->read("smote_k", cfg.resample.smote_k);
    s->read("enn_k", cfg.resample.enn_k);
    s->read("target_ratio", cfg.resample.target_ratio);
    s->read("enn_both_classes", cfg.resample.enn_both_classes);
    s->read("prior_correction", cfg.prior_correction);
    s->finish();
  }

  if (auto s = root.child("train")) {
    s->read("train_fraction", cfg.train_fraction);
    s->read("learning_rate", cfg.train.learning_rate);
    s->read("max_iterations", cfg.train.max_iterations);
    s->read("tolerance", cfg.train.tolerance);
    s->read("l2", cfg.train.l2);
    s->finish();
  }

  if (auto s = root.child("evaluate")) {
    auto& ev = cfg.evaluation;
    s->read("threshold", ev.threshold);
    s->read("tolerance", ev.tolerance);
    s->read("min_cell_count", ev.min_cell_count);
    s->read("wind_bins", ev.wind_edges);
    s->read("evi_bins", ev.evi_edges);
    s->read("evi_bin_count", ev.evi_bin_count);
    s->finish();
  }
  root.finish();

  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_config(text, path.parent_path());
}

}  // namespace vegrisk::cli
