#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library code it is used to check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// Linear scan: for each value, walk the edges by hand and tally.
struct Tally {
  std::size_t total = 0;
  std::size_t outages = 0;
};

inline std::vector<Tally> tally_bins(const std::vector<double>& values, const std::vector<int>& labels,
                                     const std::vector<double>& edges) {
  std::vector<Tally> out(edges.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < edges[0]) continue;
    std::size_t bin = edges.size() - 1;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      if (values[i] >= edges[b] && values[i] < edges[b + 1]) {
        bin = b;
        break;
      }
    }
    ++out[bin].total;
    if (labels[i] != 0) ++out[bin].outages;
  }
  return out;
}

inline std::map<std::string, Tally> tally_keys(const std::vector<std::string>& keys,
                                               const std::vector<int>& labels) {
  std::map<std::string, Tally> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto& t = out[keys[i]];
    ++t.total;
    if (labels[i] != 0) ++t.outages;
  }
  return out;
}

/// O(n^2) pair counting: wins + half ties over positive/negative pairs.
inline double pair_count_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

/// Mean penalised cross-entropy written directly from the definition, with
/// log1p/exp chosen per sign so it stays finite.
inline double logistic_loss(double intercept, const std::vector<double>& beta,
                            const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            double l2) {
  double total = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    double z = intercept;
    for (std::size_t j = 0; j < beta.size(); ++j) z += beta[j] * x[r][j];
    // -[y log p + (1-y) log(1-p)] with p = 1/(1+e^-z)
    const double log1pexp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += y[r] != 0 ? log1pexp - z : log1pexp;
  }
  const double n = static_cast<double>(x.size());
  double sq = 0.0;
  for (double b : beta) sq += b * b;
  return total / n + l2 / (2.0 * n) * sq;
}

/// Central differences with step h for the intercept (index 0) and each
/// coefficient.
inline std::vector<double> finite_difference_gradient(double intercept, std::vector<double> beta,
                                                      const std::vector<std::vector<double>>& x,
                                                      const std::vector<int>& y, double l2,
                                                      double h) {
  std::vector<double> grad;
  grad.push_back((logistic_loss(intercept + h, beta, x, y, l2) -
                  logistic_loss(intercept - h, beta, x, y, l2)) /
                 (2.0 * h));
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double keep = beta[j];
    beta[j] = keep + h;
    const double up = logistic_loss(intercept, beta, x, y, l2);
    beta[j] = keep - h;
    const double down = logistic_loss(intercept, beta, x, y, l2);
    beta[j] = keep;
    grad.push_back((up - down) / (2.0 * h));
  }
  return grad;
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

/// Indices of the k nearest rows to rows[query] among `pool` (query
/// excluded), ties by lower index. Full sort, no partial selection.
inline std::vector<std::size_t> knn(const std::vector<std::vector<double>>& rows, std::size_t query,
                                    const std::vector<std::size_t>& pool, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t idx : pool) {
    if (idx == query) continue;
    d.emplace_back(squared_distance(rows[query], rows[idx]), idx);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size() && i < k; ++i) out.push_back(d[i].second);
  return out;
}

/// Distance from p to the segment [a, b] and the clamped parameter.
inline std::pair<double, double> segment_distance(const std::vector<double>& p,
                                                  const std::vector<double>& a,
                                                  const std::vector<double>& b) {
  double dot = 0.0;
  double len2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += (p[i] - a[i]) * (b[i] - a[i]);
    len2 += (b[i] - a[i]) * (b[i] - a[i]);
  }
  double u = len2 > 0 ? dot / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  double d2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = a[i] + u * (b[i] - a[i]);
    d2 += (p[i] - q) * (p[i] - q);
  }
  return {std::sqrt(d2), u};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vegrisk_test_" + name + "_" +
                    std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace oracle
