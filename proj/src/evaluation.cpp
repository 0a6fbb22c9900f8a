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

#include "ckernel/evaluation.hpp"

#include <boost/math/special_functions/beta.hpp>
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "ckernel/binary_io.hpp"

namespace ckernel {

AccuracyResult accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::ShapeMismatch, "prediction count " + std::to_string(predicted.size()) +
                                              " differs from label count " + std::to_string(truth.size()));
  }
  AccuracyResult r;
  r.total = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) r.correct += predicted[i] == truth[i] ? 1 : 0;
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

namespace {

// x with I_x(a, b) = p; I_x is increasing in x.
double beta_quantile(double p, double a, double b) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::ibeta(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Interval clopper_pearson(std::size_t k, std::size_t n, double conf) {
  if (k > n || n == 0) throw Error(ErrorKind::InvalidArgument, "clopper_pearson needs 0 <= k <= n, n > 0");
  if (!(conf > 0.0 && conf < 1.0)) throw Error(ErrorKind::InvalidArgument, "confidence must lie in (0, 1)");
  const double alpha = 1.0 - conf;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  Interval ci;
  ci.lo = k == 0 ? 0.0 : beta_quantile(alpha / 2, kd, nd - kd + 1);
  ci.hi = k == n ? 1.0 : beta_quantile(1 - alpha / 2, kd + 1, nd - kd);
  return ci;
}

Eigen::VectorXd friedman_rank(const AccuracyTable& table) {
  const Eigen::Index d = table.rows(), c = table.cols();
  Eigen::VectorXd ranks = Eigen::VectorXd::Zero(c);
  if (d == 0) return ranks;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
  for (Eigen::Index r = 0; r < d; ++r) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return table(r, a) > table(r, b); });
    for (std::size_t start = 0; start < order.size();) {
      std::size_t stop = start + 1;
      while (stop < order.size() && table(r, order[stop]) == table(r, order[start])) ++stop;
      const double mean_rank = 0.5 * static_cast<double>(start + 1 + stop);
      for (std::size_t q = start; q < stop; ++q) ranks(order[q]) += mean_rank;
      start = stop;
    }
  }
  return ranks / static_cast<double>(d);
}

Eigen::VectorXd p_at(double theta, const AccuracyTable& table) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(table.cols());
  if (table.rows() == 0) return out;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const double best = table.row(r).maxCoeff();
    for (Eigen::Index c = 0; c < table.cols(); ++c) out(c) += table(r, c) >= theta * best ? 1.0 : 0.0;
  }
  return out * (100.0 / static_cast<double>(table.rows()));
}

namespace {

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

}  // namespace

std::vector<MeanStd> pma(const AccuracyTable& table) {
  std::vector<MeanStd> out;
  for (Eigen::Index c = 0; c < table.cols(); ++c) {
    std::vector<double> pct;
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      const double best = table.row(r).maxCoeff();
      if (!(best > 0.0)) throw Error(ErrorKind::InvalidArgument, "dataset with zero maximum accuracy");
      pct.push_back(100.0 * table(r, c) / best);
    }
    out.push_back(mean_std(pct));
  }
  return out;
}

std::vector<MeanStd> mean_accuracy(const AccuracyTable& table) {
  std::vector<MeanStd> out;
  for (Eigen::Index c = 0; c < table.cols(); ++c) {
    std::vector<double> col(table.col(c).data(), table.col(c).data() + table.rows());
    out.push_back(mean_std(col));
  }
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int i = 0; i <= 100; ++i) taus.push_back(0.002 * i);
  return taus;
}

std::vector<std::vector<ProfilePoint>> performance_profile(const AccuracyTable& table,
                                                           const std::vector<double>& taus) {
  // Gaps are compared with a small slack so that a gap of exactly tau
  // (0.1 - 0.09 vs 0.01) is not lost to rounding.
  constexpr double kSlack = 1e-12;
  std::vector<std::vector<ProfilePoint>> out(static_cast<std::size_t>(table.cols()));
  for (Eigen::Index c = 0; c < table.cols(); ++c) {
    for (double tau : taus) {
      std::size_t hits = 0;
      for (Eigen::Index r = 0; r < table.rows(); ++r) {
        hits += table.row(r).maxCoeff() - table(r, c) <= tau + kSlack ? 1 : 0;
      }
      const double frac = table.rows() == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(table.rows());
      out[static_cast<std::size_t>(c)].push_back({tau, frac});
    }
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int class_count, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least two folds");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) throw Error(ErrorKind::InvalidArgument, "label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<int> fold_of(labels.size(), 0);
  std::size_t deal = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
    for (auto i : by_class[c]) fold_of[i] = static_cast<int>(deal++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

FoldSplit fold_split(std::span<const int> fold_of, int fold) {
  FoldSplit s;
  for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == fold ? s.validation : s.train).push_back(i);
  if (s.validation.empty() || s.train.empty()) throw Error(ErrorKind::InvalidArgument, "empty fold");
  return s;
}

void log_degenerate_fold(int fold, int label) {
  std::cerr << "warning: validation fold " << fold << " holds only class " << label << '\n';
}

EvalReport build_report(std::vector<DatasetResult> rows, double conf) {
  std::vector<std::string> datasets, classifiers;
  auto index_of = [](std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<Eigen::Index>(it - names.begin());
    names.push_back(name);
    return static_cast<Eigen::Index>(names.size() - 1);
  };
  for (auto& r : rows) {
    index_of(datasets, r.dataset);
    index_of(classifiers, r.classifier);
    if (r.n_eval == 0 || r.correct > r.n_eval) throw Error(ErrorKind::InvalidArgument, "bad counts for " + r.dataset);
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n_eval);
    r.ci = clopper_pearson(r.correct, r.n_eval, conf);
  }
  AccuracyTable table = AccuracyTable::Constant(static_cast<Eigen::Index>(datasets.size()),
                                                static_cast<Eigen::Index>(classifiers.size()), std::nan(""));
  for (const auto& r : rows) table(index_of(datasets, r.dataset), index_of(classifiers, r.classifier)) = r.accuracy;
  if (table.hasNaN()) throw Error(ErrorKind::InvalidArgument, "accuracy table has missing cells");

  EvalReport report;
  report.rows = std::move(rows);
  const auto ranks = friedman_rank(table);
  const auto p90 = p_at(0.90, table), p95 = p_at(0.95, table);
  const auto pm = pma(table);
  const auto acc = mean_accuracy(table * 100.0);
  const auto prof = performance_profile(table);
  for (std::size_t c = 0; c < classifiers.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    report.classifiers.push_back({classifiers[c], ranks(ci), p90(ci), p95(ci), pm[c], acc[c], prof[c]});
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

double round_to(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "dataset,classifier,accuracy_pct,ci_lo_pct,ci_hi_pct,n_eval\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.dataset) << ',' << csv_field(r.classifier) << ',' << fixed(100 * r.accuracy, 1) << ','
        << fixed(100 * r.ci.lo, 2) << ',' << fixed(100 * r.ci.hi, 2) << ',' << r.n_eval << '\n';
  }
  return out.str();
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json root;
  root["classifiers"] = nlohmann::ordered_json::array();
  for (const auto& c : report.classifiers) {
    nlohmann::ordered_json j;
    j["classifier"] = c.classifier;
    j["friedman_rank"] = round_to(c.friedman_rank, 3);
    j["p90"] = round_to(c.p90, 1);
    j["p95"] = round_to(c.p95, 1);
    j["pma"] = {{"mean", round_to(c.pma.mean, 1)}, {"std", round_to(c.pma.std, 1)}};
    j["accuracy"] = {{"mean", round_to(c.accuracy.mean, 1)}, {"std", round_to(c.accuracy.std, 1)}};
    auto& prof = j["profile"] = nlohmann::ordered_json::array();
    for (const auto& p : c.profile) prof.push_back({round_to(p.tau, 3), round_to(p.fraction, 6)});
    root["classifiers"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::filesystem::create_directories(dir);
  const auto csv = report_csv(report);
  const auto json = report_json(report);
  write_file_atomic(dir / "report.csv", std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  write_file_atomic(dir / "report.json", std::span(reinterpret_cast<const std::uint8_t*>(json.data()), json.size()));
}

}  // namespace ckernel
