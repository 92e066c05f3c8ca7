#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vegrisk/features.hpp"

namespace vegrisk::model {

using features::FeatureTable;
using features::ScalingParams;

struct TrainConfig {
  double learning_rate = 0.1;
  int max_iterations = 200000;
  double tolerance = 1e-8;  // stop when the loss changes by less than this
  double l2 = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool converged = false;
  std::size_t training_rows = 0;

  bool operator==(const TrainingMetadata&) const = default;
};

/// log(P / (1 - P)) = intercept + sum(coefficients[i] * x[i]) over scaled
/// features, with the scaling that maps raw inputs into that space.
struct LogisticModel {
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;
  ScalingParams scaling;
  TrainingMetadata metadata;

  [[nodiscard]] double coefficient(std::string_view name) const;
  [[nodiscard]] double logit(std::span<const double> scaled_row) const;

  bool operator==(const LogisticModel&) const = default;
};

/// Zero-parameter model over `names`.
LogisticModel zero_model(std::vector<std::string> names);

/// 1 / (1 + exp(-z)) without overflow for any finite z.
double sigmoid(double z);

/// log(1 + exp(z)) without overflow.
double softplus(double z);

struct LossGradient {
  double loss = 0.0;
  double d_intercept = 0.0;
  std::vector<double> d_coefficients;
};

/// Mean binary cross-entropy plus (l2 / 2N) * |beta|^2; the intercept is not
/// penalised. Table columns must match the model's features exactly.
LossGradient loss_and_gradient(const LogisticModel& model, const FeatureTable& table, double l2);

/// Full-batch gradient descent from zero. `loss_trace`, when given,
/// receives the loss before each step and the final loss.
LogisticModel fit(const FeatureTable& scaled, const TrainConfig& config,
                  std::vector<double>* loss_trace = nullptr);

/// Column positions of the model's features within `names`. Throws
/// ValidationError listing every missing feature.
std::vector<std::size_t> align_features(const LogisticModel& model,
                                        std::span<const std::string> names);

double predict_proba(const LogisticModel& model, std::span<const double> scaled_row);
int predict_label(const LogisticModel& model, std::span<const double> scaled_row,
                  double threshold = 0.5);

/// Scores an already scaled table (columns matched by name).
std::vector<double> predict_proba(const LogisticModel& model, const FeatureTable& scaled);
/// Scores a raw table through the model's stored scaling.
std::vector<double> predict_proba_raw(const LogisticModel& model, const FeatureTable& raw);

/// Same predictions expressed on raw features:
/// beta_raw = beta / sd, intercept_raw = intercept - sum(beta * mean / sd).
struct RawSpaceModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
};
RawSpaceModel to_raw_space(const LogisticModel& model);

struct CoefficientRow {
  std::string feature;
  double coefficient = 0.0;
  double abs_coefficient = 0.0;
};

struct CoefficientReport {
  std::vector<CoefficientRow> rows;  // by |beta| descending, ties alphabetical
  double intercept = 0.0;
};

CoefficientReport coefficient_report(const LogisticModel& model);
void write_coefficients_csv(std::ostream& out, const CoefficientReport& report);

std::string to_json(const LogisticModel& model);
LogisticModel from_json(std::string_view text);
void save(const LogisticModel& model, const std::filesystem::path& path);
LogisticModel load(const std::filesystem::path& path);

}  // namespace vegrisk::model
