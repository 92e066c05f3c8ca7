#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "vegrisk/errors.hpp"
#include "vegrisk/log.hpp"
#include "vegrisk/resample.hpp"

using namespace vegrisk;
using namespace vegrisk::resample;
using features::FeatureTable;

namespace {

Date day(int i) { return make_date(2020, 1, 1) + std::chrono::days{i}; }

FeatureTable table_2d(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  FeatureTable t;
  t.names = {"x", "y"};
  for (std::size_t i = 0; i < rows.size(); ++i) t.append(rows[i], labels[i], day(static_cast<int>(i)));
  return t;
}

struct Quiet {
  log::Sink previous = log::set_sink([](log::Level, std::string_view) {});
  ~Quiet() { log::set_sink(previous); }
};

// Two well-separated Gaussian blobs: label 0 around (0,0), label 1 around (10,10).
FeatureTable blobs(std::size_t n0, std::size_t n1, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n0; ++i) {
    rows.push_back({g(rng), g(rng)});
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < n1; ++i) {
    rows.push_back({10 + g(rng), 10 + g(rng)});
    labels.push_back(1);
  }
  return table_2d(rows, labels);
}

std::size_t count_label(const FeatureTable& t, int label) {
  return static_cast<std::size_t>(std::count(t.labels.begin(), t.labels.end(), label));
}

}  // namespace

TEST_CASE("config validation") {
  ResampleConfig c;
  CHECK_NOTHROW(c.validate());
  c.enn_k = 2;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.target_ratio = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.smote_k = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("nearest_neighbors matches brute force with index tie-breaks") {
  const auto t = table_2d({{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {5, 5}}, {0, 0, 0, 0, 0});
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  CHECK(nearest_neighbors(t, 0, all, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK(nearest_neighbors(t, 0, all, 2) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("smote: balanced input is a no-op") {
  const auto t = blobs(20, 20, 1);
  ResampleConfig c;
  CHECK(smote(t, c) == t);
}

TEST_CASE("smote: two minority points on the diagonal give diagonal synthetics") {
  Quiet q;
  std::vector<std::vector<double>> rows{{0, 0}, {1, 1}};
  std::vector<int> labels{1, 1};
  for (int i = 0; i < 10; ++i) {
    rows.push_back({5.0 + i, -3.0});
    labels.push_back(0);
  }
  const auto t = table_2d(rows, labels);
  ResampleConfig c;
  c.smote_k = 1;
  const auto out = smote(t, c);
  CHECK(out.rows() == 20);
  for (std::size_t r = t.rows(); r < out.rows(); ++r) {
    CHECK(out.labels[r] == 1);
    CHECK(out.synthetic[r] == 1);
    CHECK(out.at(r, 0) == out.at(r, 1));
    CHECK(out.at(r, 0) >= 0.0);
    CHECK(out.at(r, 0) <= 1.0);
  }
}

TEST_CASE("smote: originals preserved, synthetic count, determinism, minority guard") {
  Quiet q;
  const auto t = blobs(100, 9, 2);
  ResampleConfig c;
  c.seed = 77;
  c.target_ratio = 0.5;
  const auto out = smote(t, c);
  CHECK(out.rows() == t.rows() + (50 - 9));
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto a = t.row(r);
    const auto b = out.row(r);
    REQUIRE(std::equal(a.begin(), a.end(), b.begin()));
    REQUIRE(out.synthetic[r] == 0);
  }
  CHECK(smote(t, c) == out);
  c.seed = 78;
  CHECK_FALSE(smote(t, c) == out);

  const auto lonely = blobs(10, 1, 3);
  CHECK_THROWS_AS(smote(lonely, ResampleConfig{}), ValidationError);
}

TEST_CASE("smote: every synthetic row lies on a segment to a k-nearest minority neighbour") {
  Quiet q;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 8 == 0 ? 1 : 0;
    rows.push_back({g(rng) + 2.0 * label, g(rng), g(rng) - label});
    labels.push_back(label);
  }
  FeatureTable t;
  t.names = {"a", "b", "c"};
  for (std::size_t i = 0; i < rows.size(); ++i) t.append(rows[i], labels[i], day(static_cast<int>(i)));

  ResampleConfig c;
  c.seed = 5;
  const auto out = smote(t, c);
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] == 1) minority.push_back(i);
  }
  REQUIRE(out.rows() > t.rows());
  for (std::size_t r = t.rows(); r < out.rows(); ++r) {
    const std::vector<double> p(out.row(r).begin(), out.row(r).end());
    bool found = false;
    for (std::size_t a : minority) {
      for (std::size_t b : oracle::knn(rows, a, minority, 5)) {
        if (oracle::segment_distance(p, rows[a], rows[b]).first <= 1e-9) found = true;
      }
    }
    REQUIRE(found);
  }
}

TEST_CASE("enn: separated clusters lose nothing; a planted noisy point is removed") {
  const auto clean = blobs(30, 10, 4);
  ResampleConfig c;
  CHECK(enn(clean, c) == clean);

  auto noisy = clean;
  const std::vector<double> intruder{10.0, 10.0};
  noisy.append(intruder, 0, day(99));
  const auto out = enn(noisy, c);
  CHECK(out.rows() == clean.rows());
  CHECK(out == clean);
}

TEST_CASE("enn: single-class tables are unchanged; minority rows are kept by default") {
  const auto one = blobs(15, 0, 5);
  CHECK(enn(one, ResampleConfig{}) == one);

  // A minority point inside the majority cluster survives majority-only
  // editing and is removed when both classes are edited.
  auto t = blobs(30, 10, 6);
  const std::vector<double> stray{0.0, 0.0};
  t.append(stray, 1, day(98));
  ResampleConfig c;
  CHECK(enn(t, c).rows() == t.rows());
  c.enn_both_classes = true;
  CHECK(enn(t, c).rows() == t.rows() - 1);
}

TEST_CASE("enn never removes a row whose neighbours all agree with it") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 150; ++i) {
    rows.push_back({g(rng), g(rng)});
    labels.push_back(rows.back()[0] + 0.5 * g(rng) > 0.8 ? 1 : 0);
  }
  const auto t = table_2d(rows, labels);
  ResampleConfig c;
  c.enn_both_classes = true;
  const auto out = enn(t, c);
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto nn = oracle::knn(rows, i, all, 3);
    int agree = 0;
    for (std::size_t j : nn) agree += labels[j] == labels[i];
    const bool survives = agree >= 2;
    if (survives) ++kept;
    if (agree == 3) {
      bool present = false;
      for (std::size_t r = 0; r < out.rows(); ++r) {
        if (out.at(r, 0) == rows[i][0] && out.at(r, 1) == rows[i][1]) present = true;
      }
      REQUIRE(present);
    }
  }
  CHECK(out.rows() == kept);
}

TEST_CASE("smoteenn rebalances a 4% positive table and is deterministic") {
  Quiet q;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 1000; ++i) {
    const int label = i % 25 == 0 ? 1 : 0;
    rows.push_back({g(rng) + 1.5 * label, g(rng) + 1.5 * label});
    labels.push_back(label);
  }
  const auto t = table_2d(rows, labels);
  ResampleConfig c;
  c.seed = 3;
  const auto out = smoteenn(t, c);
  const double frac = static_cast<double>(count_label(out, 1)) / static_cast<double>(out.rows());
  CHECK(frac >= 0.3);
  CHECK(frac <= 0.7);
  CHECK(smoteenn(t, c) == out);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    if (out.synthetic[r]) REQUIRE(out.labels[r] == 1);
  }

  const auto balanced = blobs(25, 25, 9);
  CHECK(smoteenn(balanced, c) == balanced);
}
