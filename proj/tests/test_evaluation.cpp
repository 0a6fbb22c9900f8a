/*
 * Copyright 2026 The ckernel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "ckernel/evaluation.hpp"
#include "json.hpp"

using namespace ckernel;

namespace {

// Brute-force ranks: count strictly better entries, then average over ties.
Eigen::VectorXd oracle_ranks(const AccuracyTable& t) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(t.cols());
  for (Eigen::Index d = 0; d < t.rows(); ++d) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      int better = 0, equal = 0;
      for (Eigen::Index o = 0; o < t.cols(); ++o) {
        if (t(d, o) > t(d, c)) ++better;
        if (t(d, o) == t(d, c)) ++equal;
      }
      sum(c) += better + (equal + 1) / 2.0;
    }
  }
  return sum / static_cast<double>(t.rows());
}

TabularDataset toy(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TabularDataset d;
  d.rows.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
    d.labels.push_back(y);
    d.rows(static_cast<Eigen::Index>(i), 0) = y + 0.1 * static_cast<double>(rng() % 10);
    d.rows(static_cast<Eigen::Index>(i), 1) = static_cast<double>(rng() % 7);
  }
  d.class_count = classes;
  return d;
}

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<int>{1, 2}, std::vector<int>{1, 2}).accuracy == 1.0);
  CHECK(accuracy(std::vector<int>{0, 0}, std::vector<int>{1, 2}).accuracy == 0.0);
  const auto r = accuracy(std::vector<int>{1, 2, 3, 4}, std::vector<int>{1, 2, 3, 0});
  CHECK(r.accuracy == 0.75);
  CHECK(r.correct == 3);
  CHECK(r.total == 4);
  CHECK_THROWS_AS(accuracy(std::vector<int>{1}, std::vector<int>{1, 2}), Error);
}

TEST_CASE("Clopper-Pearson") {
  const auto all = clopper_pearson(60, 60, 0.95);
  // Closed form for k = n: lower bound (alpha/2)^(1/n).
  CHECK(all.lo == doctest::Approx(std::pow(0.025, 1.0 / 60)).epsilon(1e-9));
  CHECK(std::abs(all.lo - 0.9404) < 5e-5);
  CHECK(all.hi == 1.0);
  const auto half = clopper_pearson(1, 2, 0.95);
  // Symmetric case: lo = 1 - sqrt(1 - alpha/2), hi = 1 - lo.
  CHECK(half.lo == doctest::Approx(1.0 - std::sqrt(0.975)).epsilon(1e-9));
  CHECK(half.hi == doctest::Approx(std::sqrt(0.975)).epsilon(1e-9));
  CHECK(std::abs(half.lo - 0.0126) < 5e-5);
  CHECK(clopper_pearson(0, 10).lo == 0.0);
  for (std::size_t k = 1; k < 20; ++k) {
    const auto a = clopper_pearson(k, 20, 0.9);
    const auto b = clopper_pearson(k, 20, 0.99);
    const double p = static_cast<double>(k) / 20;
    CHECK(a.lo < p);
    CHECK(p < a.hi);
    CHECK(b.lo < a.lo);
    CHECK(b.hi > a.hi);
  }
}

TEST_CASE("Friedman rank") {
  AccuracyTable t(1, 2);
  t << 0.9, 0.8;
  CHECK(friedman_rank(t) == Eigen::Vector2d(1, 2));
  t << 0.9, 0.9;
  CHECK(friedman_rank(t) == Eigen::Vector2d(1.5, 1.5));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    AccuracyTable r(2, 3);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = static_cast<double>(rng() % 4) / 4;
    const auto got = friedman_rank(r);
    CHECK((got - oracle_ranks(r)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(got.sum() == doctest::Approx(6.0));
    CHECK(got.minCoeff() >= 1.0);
    CHECK(got.maxCoeff() <= 3.0);
  }
}

TEST_CASE("P90, P95 and PMA") {
  AccuracyTable single(3, 1);
  single << 0.5, 0.7, 0.9;
  CHECK(p_at(0.9, single)(0) == 100.0);
  CHECK(p_at(0.95, single)(0) == 100.0);
  CHECK(pma(single)[0].mean == 100.0);
  AccuracyTable t(1, 2);
  t << 0.9, 1.0;
  CHECK(p_at(0.9, t) == Eigen::Vector2d(100, 100));
  CHECK(p_at(0.95, t) == Eigen::Vector2d(0, 100));
  t << 0.8, 1.0;
  const auto m = pma(t);
  CHECK(m[0].mean == doctest::Approx(80.0));
  CHECK(m[1].mean == 100.0);
  AccuracyTable pair(2, 2);
  pair << 0.4, 0.8, 0.5, 0.5;
  const auto p = pma(pair);
  CHECK(p[0].mean == doctest::Approx(75.0));
  CHECK(p[0].std == doctest::Approx(std::sqrt(2 * 25.0 * 25.0 / 1)));
}

TEST_CASE("performance profile") {
  AccuracyTable t(4, 2);
  t << 0.90, 0.85,   // gap 0.05 for classifier 1
      0.70, 0.72,    // gap 0.02 for classifier 0
      0.60, 0.60,    // tie
      0.50, 0.40;    // gap 0.10 for classifier 1
  const auto prof = performance_profile(t);
  CHECK(prof[0].front().tau == 0.0);
  CHECK(prof[0].front().fraction == 0.75);
  CHECK(prof[1].front().fraction == 0.5);
  for (const auto& pt : prof[0]) CHECK(pt.fraction == (pt.tau + 1e-12 >= 0.02 ? 1.0 : 0.75));
  for (const auto& pt : prof[1]) {
    const double expected = 0.5 + (pt.tau + 1e-12 >= 0.05 ? 0.25 : 0.0) + (pt.tau + 1e-12 >= 0.10 ? 0.25 : 0.0);
    CHECK(pt.fraction == expected);
  }
  for (const auto& c : prof)
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].fraction >= c[i - 1].fraction);
  CHECK(prof[1].back().fraction == 1.0);
  const auto grid = default_tau_grid();
  CHECK(grid.size() == 101);
  CHECK(grid.back() == doctest::Approx(0.2));
}

TEST_CASE("stratified folds") {
  std::vector<int> labels;
  for (int i = 0; i < 22; ++i) labels.push_back(i < 13 ? 0 : 1);
  const auto f = stratified_folds(labels, 2, 4, 9);
  CHECK(f == stratified_folds(labels, 2, 4, 9));
  std::vector<int> size(4, 0), ones(4, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++size[static_cast<std::size_t>(f[i])];
    if (labels[i] == 1) ++ones[static_cast<std::size_t>(f[i])];
  }
  for (int s : size) CHECK((s == 5 || s == 6));
  for (int o : ones) CHECK((o == 2 || o == 3));
  const auto split = fold_split(f, 1);
  CHECK(split.train.size() + split.validation.size() == labels.size());
}

TEST_CASE("UCI protocol") {
  const auto data = toy(40, 2, 4);
  const FoldClassifier<int> constant = [](const TabularDataset&, const FoldSplit& s, const int& label) {
    return std::vector<int>(s.validation.size(), label);
  };
  const auto one = uci_protocol<int>(data, constant, {1}, 7);
  double sum = 0;
  for (double a : one.folds[0]) sum += a;
  CHECK(one.accuracy == doctest::Approx(sum / 4));
  CHECK(one.accuracy == doctest::Approx(0.5));  // base rate of balanced folds

  const FoldClassifier<int> oracle = [](const TabularDataset& d, const FoldSplit& s, const int& good) {
    std::vector<int> out;
    for (auto i : s.validation) out.push_back(good ? d.labels[i] : 1 - d.labels[i]);
    return out;
  };
  const auto pick = uci_protocol<int>(data, oracle, {0, 1, 1}, 7);
  CHECK(pick.chosen == 1);
  CHECK(pick.accuracy == 1.0);
  const auto again = uci_protocol<int>(data, oracle, {0, 1, 1}, 7);
  CHECK(again.folds == pick.folds);
  CHECK_THROWS_AS(uci_protocol<int>(toy(7, 2, 1), constant, {0}, 1), Error);
}

TEST_CASE("report export") {
  std::vector<DatasetResult> rows{{"a", "k1", 9, 10}, {"a", "k2", 10, 10}, {"b", "k1", 5, 10}, {"b", "k2", 4, 10}};
  const auto report = build_report(rows);
  CHECK(report.rows[0].accuracy == 0.9);
  CHECK(report.rows[0].ci.lo < 0.9);
  CHECK(report.classifiers.size() == 2);
  CHECK(report.classifiers[0].friedman_rank == 1.5);
  CHECK(report.classifiers[0].p90 >= report.classifiers[0].p95);
  const auto csv = report_csv(report);
  CHECK(csv.find("90.0") != std::string::npos);
  const auto json = nlohmann::json::parse(report_json(report));
  CHECK(json["classifiers"].size() == 2);
  const auto dir = std::filesystem::temp_directory_path() / "ckernel_report_test";
  write_report(dir, report);
  CHECK(std::filesystem::exists(dir / "report.csv"));
  CHECK(std::filesystem::exists(dir / "report.json"));
}
