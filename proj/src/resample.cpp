#include "vegrisk/resample.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"

namespace vegrisk::resample {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

std::pair<std::size_t, std::size_t> class_counts(const FeatureTable& table) {
  std::size_t positives = 0;
  for (int l : table.labels) positives += l != 0 ? 1 : 0;
  return {table.rows() - positives, positives};
}

}  // namespace

void ResampleConfig::validate() const {
  if (smote_k < 1) throw ValidationError("resample: smote_k must be >= 1");
  if (enn_k < 1 || enn_k % 2 == 0) throw ValidationError("resample: enn_k must be odd and >= 1");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw ValidationError("resample: target_ratio must be in (0, 1]");
  }
}

std::vector<std::size_t> nearest_neighbors(const FeatureTable& table, std::size_t query,
                                           std::span<const std::size_t> candidates,
                                           std::size_t k) {
  // Sorted (distance, index) buffer of the best k seen so far.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k + 1);
  const auto q = table.row(query);
  for (std::size_t idx : candidates) {
    if (idx == query) continue;
    const std::pair<double, std::size_t> entry{squared_distance(q, table.row(idx)), idx};
    if (best.size() == k && !(entry < best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), entry), entry);
    if (best.size() > k) best.pop_back();
  }
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (const auto& [d, idx] : best) out.push_back(idx);
  return out;
}

int minority_label(const FeatureTable& table) {
  const auto [negatives, positives] = class_counts(table);
  return positives <= negatives ? 1 : 0;
}

FeatureTable smote(const FeatureTable& table, const ResampleConfig& config) {
  config.validate();
  table.validate();
  const int minority = minority_label(table);
  const auto [negatives, positives] = class_counts(table);
  const std::size_t n_min = minority == 1 ? positives : negatives;
  const std::size_t n_maj = table.rows() - n_min;
  if (n_min < 2) {
    throw ValidationError("smote: minority class has " + std::to_string(n_min) +
                          " row(s); need at least 2");
  }

  const double wanted = std::ceil(config.target_ratio * static_cast<double>(n_maj) - 1e-9);
  const std::size_t n_synthetic =
      wanted > static_cast<double>(n_min) ? static_cast<std::size_t>(wanted) - n_min : 0;

  FeatureTable out = table;
  if (n_synthetic == 0) return out;

  std::size_t k = static_cast<std::size_t>(config.smote_k);
  if (k > n_min - 1) {
    log::warn("smote: smote_k=" + std::to_string(k) + " exceeds minority size - 1; using " +
              std::to_string(n_min - 1));
    k = n_min - 1;
  }

  std::vector<std::size_t> minority_rows;
  minority_rows.reserve(n_min);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if ((table.labels[r] != 0 ? 1 : 0) == minority) minority_rows.push_back(r);
  }
  std::vector<std::vector<std::size_t>> neighbors(minority_rows.size());
  for (std::size_t i = 0; i < minority_rows.size(); ++i) {
    neighbors[i] = nearest_neighbors(table, minority_rows[i], minority_rows, k);
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick_base(0, minority_rows.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neighbor(0, k - 1);
  std::uniform_real_distribution<double> gap(0.0, 1.0);

  out.values.reserve(out.values.size() + n_synthetic * table.cols());
  std::vector<double> row(table.cols());
  for (std::size_t s = 0; s < n_synthetic; ++s) {
    const std::size_t base_pos = pick_base(rng);
    const std::size_t base = minority_rows[base_pos];
    const std::size_t other = neighbors[base_pos][pick_neighbor(rng)];
    const double u = gap(rng);
    const auto a = table.row(base);
    const auto b = table.row(other);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = a[c] + u * (b[c] - a[c]);
    out.append(row, minority, table.dates[base], true);
  }
  return out;
}

FeatureTable enn(const FeatureTable& table, const ResampleConfig& config,
                 std::optional<int> edit_label) {
  config.validate();
  table.validate();
  const std::size_t k = static_cast<std::size_t>(config.enn_k);
  if (table.rows() < k + 1) {
    throw ValidationError("enn: need at least enn_k + 1 = " + std::to_string(k + 1) + " rows");
  }
  if (!edit_label) {
    const auto [negatives, positives] = class_counts(table);
    edit_label = positives > negatives ? 1 : 0;
  }

  std::vector<std::size_t> all(table.rows());
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;

  std::vector<std::size_t> kept;
  kept.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const int own = table.labels[r] != 0 ? 1 : 0;
    if (!config.enn_both_classes && own != *edit_label) {
      kept.push_back(r);
      continue;
    }
    std::size_t agree = 0;
    for (std::size_t n : nearest_neighbors(table, r, all, k)) {
      agree += (table.labels[n] != 0 ? 1 : 0) == own ? 1 : 0;
    }
    if (2 * agree > k) kept.push_back(r);
  }
  return table.subset(kept);
}

FeatureTable smoteenn(const FeatureTable& table, const ResampleConfig& config) {
  const int majority = 1 - minority_label(table);
  auto oversampled = smote(table, config);
  auto cleaned = enn(oversampled, config, majority);
  log::info("resample: " + std::to_string(table.rows()) + " rows -> smote " +
            std::to_string(oversampled.rows()) + " -> enn " + std::to_string(cleaned.rows()));
  return cleaned;
}

}  // namespace vegrisk::resample
