#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vegrisk/features.hpp"

// SMOTE oversampling, Edited-Nearest-Neighbours cleaning, and the two
// chained. All searches are exact Euclidean over every column of the table,
// with distance ties broken by the lower row index.
namespace vegrisk::resample {

using features::FeatureTable;

struct ResampleConfig {
  int smote_k = 5;
  int enn_k = 3;
  double target_ratio = 1.0;  // minority / majority after SMOTE
  std::uint64_t seed = 0;
  bool enn_both_classes = false;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

/// Indices of the `k` rows in `candidates` nearest to row `query`, nearest
/// first. `query` itself is never returned.
std::vector<std::size_t> nearest_neighbors(const FeatureTable& table, std::size_t query,
                                           std::span<const std::size_t> candidates, std::size_t k);

/// Label with fewer rows; label 1 when the classes are the same size.
int minority_label(const FeatureTable& table);

/// Appends synthetic minority rows on segments between a minority row and
/// one of its smote_k nearest minority neighbours until the minority count
/// reaches ceil(target_ratio * majority). Original rows come first,
/// unmodified.
FeatureTable smote(const FeatureTable& table, const ResampleConfig& config);

/// Removes rows of `edit_label` whose enn_k nearest neighbours vote against
/// their label. Without `edit_label` the more frequent class is edited
/// (label 0 on a tie); enn_both_classes edits every row.
FeatureTable enn(const FeatureTable& table, const ResampleConfig& config,
                 std::optional<int> edit_label = std::nullopt);

/// enn(smote(table)), editing the class that was the majority before
/// oversampling.
FeatureTable smoteenn(const FeatureTable& table, const ResampleConfig& config);

}  // namespace vegrisk::resample
