#include "vegrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vegrisk/csv.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"

namespace vegrisk::model {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("train: learning_rate must be > 0");
  if (!(tolerance > 0.0)) throw ValidationError("train: tolerance must be > 0");
  if (!(l2 >= 0.0)) throw ValidationError("train: l2 must be >= 0");
  if (max_iterations < 1) throw ValidationError("train: max_iterations must be >= 1");
}

double LogisticModel::coefficient(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return coefficients[i];
  }
  throw ValidationError("model has no feature '" + std::string(name) + "'");
}

double LogisticModel::logit(std::span<const double> scaled_row) const {
  if (scaled_row.size() != coefficients.size()) {
    throw ValidationError("row has " + std::to_string(scaled_row.size()) + " features, model has " +
                          std::to_string(coefficients.size()));
  }
  double z = intercept;
  for (std::size_t i = 0; i < coefficients.size(); ++i) z += coefficients[i] * scaled_row[i];
  return z;
}

LogisticModel zero_model(std::vector<std::string> names) {
  LogisticModel m;
  m.coefficients.assign(names.size(), 0.0);
  m.feature_names = std::move(names);
  return m;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

namespace {

void require_same_features(const LogisticModel& model, const FeatureTable& table) {
  if (table.names != model.feature_names) {
    throw ValidationError("feature mismatch between table and model");
  }
}

double penalised_loss(const LogisticModel& model, const FeatureTable& table, double l2,
                      std::vector<double>* residuals) {
  const double n = static_cast<double>(table.rows());
  double loss = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const double z = model.logit(table.row(r));
    const double y = table.labels[r] != 0 ? 1.0 : 0.0;
    loss += softplus(z) - y * z;
    if (residuals) (*residuals)[r] = sigmoid(z) - y;
  }
  double norm2 = 0.0;
  for (double b : model.coefficients) norm2 += b * b;
  return loss / n + l2 / (2.0 * n) * norm2;
}

}  // namespace

LossGradient loss_and_gradient(const LogisticModel& model, const FeatureTable& table, double l2) {
  require_same_features(model, table);
  if (table.rows() == 0) throw ValidationError("loss_and_gradient: empty table");
  const double n = static_cast<double>(table.rows());
  std::vector<double> residuals(table.rows());

  LossGradient out;
  out.loss = penalised_loss(model, table, l2, &residuals);
  out.d_coefficients.assign(model.coefficients.size(), 0.0);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const double e = residuals[r];
    out.d_intercept += e;
    const auto x = table.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) out.d_coefficients[j] += e * x[j];
  }
  out.d_intercept /= n;
  for (std::size_t j = 0; j < out.d_coefficients.size(); ++j) {
    out.d_coefficients[j] = out.d_coefficients[j] / n + l2 / n * model.coefficients[j];
  }
  return out;
}

LogisticModel fit(const FeatureTable& scaled, const TrainConfig& config,
                  std::vector<double>* loss_trace) {
  config.validate();
  scaled.validate();
  if (scaled.rows() < 2) throw ValidationError("fit: need at least 2 rows");
  const auto positives = std::count_if(scaled.labels.begin(), scaled.labels.end(),
                                       [](int l) { return l != 0; });
  if (positives == 0 || static_cast<std::size_t>(positives) == scaled.rows()) {
    throw ValidationError("fit: training labels are all " + std::string(positives ? "1" : "0") +
                          "; both classes are required");
  }

  LogisticModel model = zero_model(scaled.names);
  model.metadata.seed = config.seed;
  model.metadata.training_rows = scaled.rows();
  if (loss_trace) loss_trace->clear();

  auto step = loss_and_gradient(model, scaled, config.l2);
  model.metadata.initial_loss = step.loss;
  double previous = step.loss;
  int iteration = 0;
  bool converged = false;
  while (iteration < config.max_iterations) {
    if (loss_trace) loss_trace->push_back(step.loss);
    model.intercept -= config.learning_rate * step.d_intercept;
    for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
      model.coefficients[j] -= config.learning_rate * step.d_coefficients[j];
    }
    ++iteration;
    step = loss_and_gradient(model, scaled, config.l2);
    if (!std::isfinite(step.loss) || !std::isfinite(model.intercept)) {
      throw NumericError("fit: loss became non-finite after " + std::to_string(iteration) +
                         " iterations; lower the learning rate");
    }
    if (std::abs(previous - step.loss) < config.tolerance) {
      converged = true;
      break;
    }
    previous = step.loss;
  }
  if (loss_trace) loss_trace->push_back(step.loss);
  if (!converged) {
    log::warn("fit: stopped at max_iterations=" + std::to_string(config.max_iterations) +
              " before the loss change fell below tolerance");
  }
  model.metadata.iterations = iteration;
  model.metadata.final_loss = step.loss;
  model.metadata.converged = converged;
  return model;
}

std::vector<std::size_t> align_features(const LogisticModel& model,
                                        std::span<const std::string> names) {
  std::vector<std::size_t> positions;
  std::vector<std::string> missing;
  for (const auto& f : model.feature_names) {
    const auto it = std::find(names.begin(), names.end(), f);
    if (it == names.end()) {
      missing.push_back(f);
    } else {
      positions.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }
  if (!missing.empty()) {
    std::string text = "input is missing model feature(s):";
    for (const auto& m : missing) text += " " + m;
    throw ValidationError(text);
  }
  return positions;
}

double predict_proba(const LogisticModel& model, std::span<const double> scaled_row) {
  return sigmoid(model.logit(scaled_row));
}

int predict_label(const LogisticModel& model, std::span<const double> scaled_row,
                  double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("threshold must be in (0, 1)");
  }
  return predict_proba(model, scaled_row) >= threshold ? 1 : 0;
}

std::vector<double> predict_proba(const LogisticModel& model, const FeatureTable& scaled) {
  const auto positions = align_features(model, scaled.names);
  std::vector<double> out(scaled.rows());
  std::vector<double> row(positions.size());
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    const auto src = scaled.row(r);
    for (std::size_t j = 0; j < positions.size(); ++j) row[j] = src[positions[j]];
    out[r] = predict_proba(model, row);
  }
  return out;
}

std::vector<double> predict_proba_raw(const LogisticModel& model, const FeatureTable& raw) {
  std::vector<std::string> scaled_names;
  for (const auto& name : raw.names) {
    if (model.scaling.covers(name)) scaled_names.push_back(name);
  }
  auto scaled = features::apply_scaling(raw, model.scaling, scaled_names);
  return predict_proba(model, scaled);
}

RawSpaceModel to_raw_space(const LogisticModel& model) {
  RawSpaceModel raw{model.intercept, model.coefficients};
  for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
    if (!model.scaling.covers(model.feature_names[j])) continue;
    const auto& m = model.scaling.at(model.feature_names[j]);
    if (m.sd > 0.0) {
      raw.coefficients[j] = model.coefficients[j] / m.sd;
      raw.intercept -= model.coefficients[j] * m.mean / m.sd;
    } else {
      raw.coefficients[j] = 0.0;  // degenerate columns always scale to 0
    }
  }
  return raw;
}

CoefficientReport coefficient_report(const LogisticModel& model) {
  CoefficientReport report;
  report.intercept = model.intercept;
  for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
    report.rows.push_back(
        {model.feature_names[j], model.coefficients[j], std::abs(model.coefficients[j])});
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.abs_coefficient != b.abs_coefficient) return a.abs_coefficient > b.abs_coefficient;
    return a.feature < b.feature;
  });
  return report;
}

void write_coefficients_csv(std::ostream& out, const CoefficientReport& report) {
  csv::Writer w(out);
  w.row({"rank", "feature", "coefficient", "abs_coefficient"});
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    w.field(std::to_string(i + 1)).field(r.feature).field(r.coefficient).field(r.abs_coefficient);
    w.end_row();
  }
  w.field(std::string_view{}).field("intercept").field(report.intercept).field(std::string_view{});
  w.end_row();
}

// ---------------------------------------------------------------------------
// JSON persistence. nlohmann emits the shortest round-trip form for doubles,
// so read(write(m)) == m bit for bit.

std::string to_json(const LogisticModel& model) {
  json doc;
  doc["alpha"] = model.intercept;
  json coefficients = json::object();
  for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
    coefficients[model.feature_names[j]] = model.coefficients[j];
  }
  doc["coefficients"] = std::move(coefficients);
  json scaling = json::object();
  for (const auto& [name, m] : model.scaling.by_feature) {
    scaling[name] = {{"mu", m.mean}, {"sigma", m.sd}};
  }
  doc["scaling"] = std::move(scaling);
  const auto& md = model.metadata;
  doc["metadata"] = {{"seed", md.seed},
                     {"iterations", md.iterations},
                     {"initial_loss", md.initial_loss},
                     {"final_loss", md.final_loss},
                     {"converged", md.converged},
                     {"training_rows", md.training_rows}};
  return doc.dump(2) + "\n";
}

LogisticModel from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    LogisticModel model;
    model.intercept = doc.at("alpha").get<double>();
    for (const auto& [name, value] : doc.at("coefficients").items()) {
      model.feature_names.push_back(name);
      model.coefficients.push_back(value.get<double>());
    }
    for (const auto& [name, value] : doc.at("scaling").items()) {
      model.scaling.by_feature[name] = {value.at("mu").get<double>(),
                                        value.at("sigma").get<double>()};
    }
    const auto& md = doc.at("metadata");
    model.metadata.seed = md.at("seed").get<std::uint64_t>();
    model.metadata.iterations = md.at("iterations").get<int>();
    model.metadata.initial_loss = md.at("initial_loss").get<double>();
    model.metadata.final_loss = md.at("final_loss").get<double>();
    model.metadata.converged = md.at("converged").get<bool>();
    model.metadata.training_rows = md.at("training_rows").get<std::size_t>();
    if (!std::isfinite(model.intercept) ||
        !std::all_of(model.coefficients.begin(), model.coefficients.end(),
                     [](double b) { return std::isfinite(b); })) {
      throw ValidationError("model JSON contains non-finite parameters");
    }
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
}

void save(const LogisticModel& model, const std::filesystem::path& path) {
  csv::write_text_file(path, to_json(model));
}

LogisticModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return from_json(text);
}

}  // namespace vegrisk::model
