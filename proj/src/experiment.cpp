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

#include "ckernel/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ckernel/arch.hpp"
#include "ckernel/binary_io.hpp"
#include "ckernel/engine.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/gram.hpp"
#include "ckernel/tile_cache.hpp"

namespace ckernel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  auto idx = all_indices(n);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Eigen::MatrixXd sub_matrix(const Eigen::MatrixXd& m, std::span<const std::size_t> rows,
                           std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          m(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
  return out;
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

std::vector<std::uint32_t> ids_of(const ImageDataset& d) {
  if (d.ids.size() == d.size()) return d.ids;
  std::vector<std::uint32_t> ids(d.size());
  std::iota(ids.begin(), ids.end(), 0u);
  return ids;
}

Split load_or_prepare(const ExperimentConfig& config, std::uint64_t seed, std::optional<ImagePools>& pools,
                      std::ostream& out) {
  const auto dir = trial_dir(config, seed);
  if (std::filesystem::exists(dir / "train.ckds") && std::filesystem::exists(dir / "test.ckds")) {
    return {read_dataset(dir / "train.ckds"), read_dataset(dir / "test.ckds"), seed};
  }
  if (!pools) pools = load_pools(config.dataset);
  auto split = prepare_split(config.dataset, *pools, seed);
  std::filesystem::create_directories(dir);
  write_dataset(dir / "train.ckds", split.train);
  write_dataset(dir / "test.ckds", split.test);
  out << "seed " << seed << ": prepared " << split.train.size() << " train / " << split.test.size()
      << " test examples\n";
  return split;
}

int solve_tabular(const ExperimentConfig& config, std::ostream& out);

}  // namespace

ImagePools load_pools(const DatasetConfig& config) {
  ImagePools pools;
  switch (config.type) {
    case DatasetType::Cifar10:
      pools.train = load_cifar10(config.path, CifarSplit::Train);
      pools.test = load_cifar10(config.path, CifarSplit::Test);
      break;
    case DatasetType::Mnist:
      pools.train = load_mnist_idx(config.images, config.labels);
      if (!config.test_images.empty()) pools.test = load_mnist_idx(config.test_images, config.test_labels);
      break;
    case DatasetType::Csv:
      throw Error(ErrorKind::InvalidArgument, "csv datasets are tabular; image pools are not available");
  }
  return pools;
}

Split prepare_split(const DatasetConfig& config, const ImagePools& pools, std::uint64_t seed) {
  const auto& pool = pools.train;
  const auto train_idx = config.train_n > 0
                             ? balanced_indices(pool.labels, pool.class_count, config.train_n, derive_seed(seed, 0))
                             : all_indices(pool.size());
  Split split;
  split.seed = seed;
  split.train = select(pool, train_idx);
  split.train.append_provenance("subsample(n=" + std::to_string(train_idx.size()) + ",seed=" + std::to_string(seed) + ")");
  if (pools.test) {
    const auto& tp = *pools.test;
    const auto test_idx = config.test_n > 0 ? balanced_indices(tp.labels, tp.class_count, config.test_n,
                                                               derive_seed(seed, 1))
                                            : all_indices(tp.size());
    split.test = select(tp, test_idx);
  } else {
    std::vector<std::size_t> test_idx;
    if (config.test_n > 0) {
      test_idx = balanced_indices(pool.labels, pool.class_count, config.test_n, derive_seed(seed, 1), train_idx);
    } else {
      std::vector<bool> used(pool.size(), false);
      for (auto i : train_idx) used[i] = true;
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (!used[i]) test_idx.push_back(i);
    }
    split.test = select(pool, test_idx);
  }
  split.test.append_provenance("subsample(n=" + std::to_string(split.test.size()) + ",seed=" + std::to_string(seed) + ")");

  for (const auto& step : config.preprocess) {
    if (step == "standardize") {
      const auto m = fit_moments(split.train);
      split.train = apply_moments(m, std::move(split.train));
      split.test = apply_moments(m, std::move(split.test));
    } else if (step == "zca") {
      const auto zca = zca_fit(split.train, config.zca_epsilon);
      split.train = zca_apply(zca, std::move(split.train));
      split.test = zca_apply(zca, std::move(split.test));
    } else if (step == "flip") {
      split.train = flip_augment(split.train);
    }
  }
  if (config.pad > 0) {
    split.train = pad_to(split.train, {config.pad, config.pad});
    split.test = pad_to(split.test, {config.pad, config.pad});
  }
  return split;
}

std::vector<std::uint64_t> trial_seeds(const ExperimentConfig& config) {
  return config.dataset.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : config.dataset.seeds;
}

std::filesystem::path trial_dir(const ExperimentConfig& config, std::uint64_t seed) {
  return config.out_dir / config.name / ("seed_" + std::to_string(seed));
}

BandwidthChoice tune_gaussian_bandwidth(const Eigen::MatrixXd& x, std::span<const int> labels, int class_count,
                                        std::size_t tuning_n, const std::vector<double>& lambdas,
                                        std::uint64_t seed, unsigned threads) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "bandwidth tuning needs at least three rows");
  auto perm = seeded_permutation(n, derive_seed(seed, 2));
  perm.resize(std::min(n, std::max<std::size_t>(tuning_n, 3)));
  const std::size_t fit_n = perm.size() * 2 / 3;
  const std::vector<std::size_t> fit(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(fit_n));
  const std::vector<std::size_t> val(perm.begin() + static_cast<std::ptrdiff_t>(fit_n), perm.end());
  Eigen::MatrixXd xf(static_cast<Eigen::Index>(fit.size()), x.cols()), xv(static_cast<Eigen::Index>(val.size()), x.cols());
  for (std::size_t i = 0; i < fit.size(); ++i) xf.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(fit[i]));
  for (std::size_t i = 0; i < val.size(); ++i) xv.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(val[i]));
  const auto fit_labels = pick(labels, fit);
  const auto val_labels = pick(labels, val);
  const Eigen::MatrixXd y = one_hot(fit_labels, class_count);
  const Eigen::MatrixXd d_fit = squared_distances(xf, xf);
  const Eigen::MatrixXd d_val = squared_distances(xv, xf);

  BandwidthChoice best;
  best.median = median_heuristic(x, seed);
  bool found = false;
  for (double gamma : bandwidth_grid(best.median)) {
    const double s = -1.0 / (2.0 * gamma * gamma);
    Eigen::MatrixXd k_fit = (d_fit * s).array().exp().matrix();
    const Eigen::MatrixXd k_val = (d_val * s).array().exp().matrix();
    k_fit = 0.5 * (k_fit + k_fit.transpose()).eval();
    SweepResult sweep;
    try {
      sweep = lambda_sweep(k_fit, y, fit_labels, HoldoutValidation{&k_val, val_labels}, lambdas, threads);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailed) throw;
      continue;
    }
    if (!found || sweep.best_accuracy > best.accuracy) {
      best.gamma = gamma;
      best.lambda = sweep.best_lambda;
      best.accuracy = sweep.best_accuracy;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::FactorizationFailed, "no bandwidth in the grid could be fitted");
  return best;
}

SolveOutcome solve_grams(const Eigen::MatrixXd& k_train, std::span<const int> train_labels,
                         const Eigen::MatrixXd& k_test, std::span<const int> test_labels, int class_count,
                         const SolveConfig& config, std::uint64_t seed, unsigned threads) {
  if (static_cast<std::size_t>(k_train.rows()) != train_labels.size() ||
      static_cast<std::size_t>(k_test.rows()) != test_labels.size() || k_test.cols() != k_train.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "Gram shapes do not match the label counts");
  }
  const Eigen::MatrixXd y = one_hot(train_labels, class_count);
  SolveOutcome out;
  if (config.validation == Validation::Loo) {
    out.sweep = lambda_sweep(k_train, y, train_labels, std::nullopt, config.lambdas, threads);
  } else {
    const auto n = train_labels.size();
    if (config.holdout_n == 0 || config.holdout_n >= n) {
      throw Error(ErrorKind::InvalidArgument, "holdout_n must be between 1 and the training size - 1");
    }
    const auto perm = seeded_permutation(n, derive_seed(seed, 3));
    std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(config.holdout_n));
    std::vector<std::size_t> fit(perm.begin() + static_cast<std::ptrdiff_t>(config.holdout_n), perm.end());
    std::sort(val.begin(), val.end());
    std::sort(fit.begin(), fit.end());
    const Eigen::MatrixXd k_fit = sub_matrix(k_train, fit, fit);
    const Eigen::MatrixXd k_val = sub_matrix(k_train, val, fit);
    const auto fit_labels = pick(train_labels, fit);
    const auto val_labels = pick(train_labels, val);
    out.sweep = lambda_sweep(k_fit, one_hot(fit_labels, class_count), fit_labels,
                             HoldoutValidation{&k_val, val_labels}, config.lambdas, threads);
  }
  out.model = tilted_fit(k_train, y, out.sweep.best_lambda, config.tilt);
  out.prediction = predict(out.model, k_test);
  out.accuracy = accuracy(out.prediction.labels, test_labels);
  if (out.accuracy.total > 0) out.ci = clopper_pearson(out.accuracy.correct, out.accuracy.total);
  return out;
}

int cmd_prep(const ExperimentConfig& config, std::ostream& out) {
  validate_config(config);
  if (config.dataset.type == DatasetType::Csv) {
    const auto data = load_csv_tabular(config.dataset.path, {config.dataset.csv_header, config.dataset.csv_label_column});
    out << "csv: " << data.size() << " rows, " << data.rows.cols() << " features, " << data.class_count
        << " classes (no preparation needed)\n";
    return 0;
  }
  const auto pools = load_pools(config.dataset);
  for (auto seed : trial_seeds(config)) {
    const auto split = prepare_split(config.dataset, pools, seed);
    const auto dir = trial_dir(config, seed);
    std::filesystem::create_directories(dir);
    write_dataset(dir / "train.ckds", split.train);
    write_dataset(dir / "test.ckds", split.test);
    out << "seed " << seed << ": " << split.train.size() << " train / " << split.test.size() << " test, "
        << split.train.dims.rows << "x" << split.train.dims.cols << "x" << split.train.channels << " -> " << dir.string()
        << "\n";
  }
  return 0;
}

int cmd_kernel(const ExperimentConfig& config, std::ostream& out, const std::atomic<bool>* cancel) {
  validate_config(config);
  if (config.dataset.type == DatasetType::Csv) {
    out << "csv datasets build their Gaussian kernels per fold inside `solve`\n";
    return 0;
  }
  std::optional<ArchSpec> arch;
  if (config.kernel.kind == KernelKind::Arch) arch = load_arch_file(config.kernel.arch.string());
  std::optional<ImagePools> pools;
  std::optional<TileCache> cache;
  if (arch) cache.emplace(config.cache_dir);

  for (auto seed : trial_seeds(config)) {
    const auto split = load_or_prepare(config, seed, pools, out);
    const auto dir = trial_dir(config, seed);
    const auto started = Clock::now();
    GramMatrix k_train, k_test;
    Digest tag{};
    nlohmann::ordered_json info;
    info["kind"] = to_string(config.kernel.kind);
    if (arch) {
      validate_arch(*arch, split.train.dims);  // surfaces PoolIndivisible before any work
      tag = sha256(render_arch(*arch));
      info["arch"] = render_arch(*arch);
      ComposeOptions options;
      options.tile = config.tile;
      options.threads = config.threads;
      options.cache = &*cache;
      options.cancel = cancel;
      options.on_progress = [&](const ComposeProgress& p) {
        std::cerr << "\r  tiles " << p.tiles_done << "/" << p.tiles_total << " (" << p.tiles_cached << " cached)"
                  << std::flush;
        if (p.tiles_done == p.tiles_total) std::cerr << "\n";
      };
      ComposeStats stats;
      k_train = compose_kernel(split.train, split.train, *arch, options, &stats);
      out << "seed " << seed << " train x train: " << stats.tiles_cached << " tiles cached, " << stats.tiles_computed
          << " computed, " << fmt("%.2f", stats.seconds) << " s\n";
      k_test = compose_kernel(split.test, split.train, *arch, options, &stats);
      out << "seed " << seed << " test x train: " << stats.tiles_cached << " tiles cached, " << stats.tiles_computed
          << " computed, " << fmt("%.2f", stats.seconds) << " s\n";
    } else {
      const Eigen::MatrixXd xa = flatten(split.train), xb = flatten(split.test);
      if (config.kernel.kind == KernelKind::Linear) {
        tag = sha256(std::string_view("linear"));
        k_train.values = linear_gram(xa, xa);
        k_test.values = linear_gram(xb, xa);
      } else {
        double gamma = 0.0;
        if (config.kernel.gamma) {
          gamma = *config.kernel.gamma;
        } else {
          const auto choice = tune_gaussian_bandwidth(xa, split.train.labels, split.train.class_count,
                                                      config.kernel.tuning_n, config.solve.lambdas, seed,
                                                      config.threads);
          gamma = choice.gamma;
          info["median_distance"] = choice.median;
          info["tuning_accuracy"] = choice.accuracy;
        }
        info["gamma"] = gamma;
        tag = sha256("gaussian:" + fmt("%.17g", gamma));
        k_train.values = gaussian_gram(xa, xa, gamma);
        k_test.values = gaussian_gram(xb, xa, gamma);
      }
      k_train.symmetric = true;
      out << "seed " << seed << " " << to_string(config.kernel.kind) << " kernel: " << fmt("%.2f", seconds_since(started))
          << " s\n";
    }
    k_train.row_ids = k_train.col_ids = ids_of(split.train);
    k_test.row_ids = ids_of(split.test);
    k_test.col_ids = ids_of(split.train);
    write_gram(dir / "train.ckgm", k_train, tag);
    write_gram(dir / "test.ckgm", k_test, tag);
    write_text(dir / "kernel.json", info.dump(2) + "\n");
  }
  return 0;
}

int cmd_solve(const ExperimentConfig& config, std::ostream& out) {
  validate_config(config);
  if (config.dataset.type == DatasetType::Csv) return solve_tabular(config, out);
  std::vector<double> accs;
  std::ostringstream summary;
  summary << "seed,lambda,tilt,correct,n_eval,accuracy_pct,ci_lo_pct,ci_hi_pct\n";
  const std::string classifier =
      config.kernel.kind == KernelKind::Arch ? config.kernel.arch.stem().string() : to_string(config.kernel.kind);
  std::ostringstream results;
  results << "dataset,classifier,correct,n_eval\n";
  for (auto seed : trial_seeds(config)) {
    const auto dir = trial_dir(config, seed);
    const auto train = read_dataset(dir / "train.ckds");
    const auto test = read_dataset(dir / "test.ckds");
    const auto k_train = read_gram(dir / "train.ckgm");
    const auto k_test = read_gram(dir / "test.ckgm");
    if (k_train.row_ids != ids_of(train) || k_train.col_ids != ids_of(train) || k_test.row_ids != ids_of(test) ||
        k_test.col_ids != ids_of(train)) {
      throw Error(ErrorKind::ShapeMismatch, "Gram ids in " + dir.string() + " do not match the dataset files");
    }
    const auto r = solve_grams(k_train.values, train.labels, k_test.values, test.labels, train.class_count,
                               config.solve, seed, config.threads);
    write_model(dir / "model.ckrm", r.model);
    std::ostringstream preds, sweep;
    preds << "id,label,predicted\n";
    for (std::size_t i = 0; i < test.size(); ++i) {
      preds << ids_of(test)[i] << ',' << test.labels[i] << ',' << r.prediction.labels[i] << '\n';
    }
    sweep << "lambda,ok,accuracy\n";
    for (const auto& e : r.sweep.entries) {
      sweep << fmt("%.6e", e.lambda) << ',' << (e.ok ? 1 : 0) << ',' << fmt("%.6f", e.accuracy) << '\n';
    }
    write_text(dir / "predictions.csv", preds.str());
    write_text(dir / "sweep.csv", sweep.str());
    summary << seed << ',' << fmt("%.6e", r.model.lambda) << ',' << fmt("%.3f", r.model.tilt) << ','
            << r.accuracy.correct << ',' << r.accuracy.total << ',' << fmt("%.2f", 100 * r.accuracy.accuracy) << ','
            << fmt("%.2f", 100 * r.ci.lo) << ',' << fmt("%.2f", 100 * r.ci.hi) << '\n';
    results << config.name << "_seed" << seed << ',' << classifier << ',' << r.accuracy.correct << ','
            << r.accuracy.total << '\n';
    out << "seed " << seed << ": lambda " << fmt("%.1e", r.model.lambda) << ", accuracy "
        << fmt("%.2f", 100 * r.accuracy.accuracy) << "% [" << fmt("%.2f", 100 * r.ci.lo) << ", "
        << fmt("%.2f", 100 * r.ci.hi) << "] on " << r.accuracy.total << " examples\n";
    accs.push_back(100 * r.accuracy.accuracy);
  }
  const auto root = config.out_dir / config.name;
  write_text(root / "summary.csv", summary.str());
  write_text(root / "results.csv", results.str());
  const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  double ss = 0.0;
  for (double a : accs) ss += (a - mean) * (a - mean);
  const double sd = accs.size() > 1 ? std::sqrt(ss / static_cast<double>(accs.size() - 1)) : 0.0;
  out << "mean accuracy " << fmt("%.2f", mean) << " +- " << fmt("%.2f", sd) << " over " << accs.size() << " trial(s)\n";
  return 0;
}

namespace {

struct TabularSetting {
  double gamma = 0.0;
  double lambda = 0.0;
};

int solve_tabular(const ExperimentConfig& config, std::ostream& out) {
  const auto data = standardize(
      load_csv_tabular(config.dataset.path, {config.dataset.csv_header, config.dataset.csv_label_column}));
  const double nu = median_heuristic(data.rows, config.seed);
  std::vector<TabularSetting> grid;
  const std::vector<double> gammas = config.kernel.gamma ? std::vector<double>{*config.kernel.gamma} : bandwidth_grid(nu);
  for (double g : gammas)
    for (double l : config.solve.lambdas) grid.push_back({g, l});

  FoldClassifier<TabularSetting> classifier = [](const TabularDataset& d, const FoldSplit& split,
                                                 const TabularSetting& s) {
    Eigen::MatrixXd xf(static_cast<Eigen::Index>(split.train.size()), d.rows.cols());
    Eigen::MatrixXd xv(static_cast<Eigen::Index>(split.validation.size()), d.rows.cols());
    for (std::size_t i = 0; i < split.train.size(); ++i)
      xf.row(static_cast<Eigen::Index>(i)) = d.rows.row(static_cast<Eigen::Index>(split.train[i]));
    for (std::size_t i = 0; i < split.validation.size(); ++i)
      xv.row(static_cast<Eigen::Index>(i)) = d.rows.row(static_cast<Eigen::Index>(split.validation[i]));
    const auto labels = pick(d.labels, split.train);
    try {
      const auto model = ridge_fit(gaussian_gram(xf, xf, s.gamma), one_hot(labels, d.class_count), s.lambda);
      return predict(model, gaussian_gram(xv, xf, s.gamma)).labels;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FactorizationFailed) throw;
      return std::vector<int>(split.validation.size(), -1);  // counts as all wrong
    }
  };
  const auto result = uci_protocol(data, classifier, grid, config.seed);
  const auto root = config.out_dir / config.name;
  std::filesystem::create_directories(root);
  nlohmann::ordered_json j;
  j["dataset"] = config.dataset.path.filename().string();
  j["classifier"] = "gaussian_ridge";
  j["accuracy"] = result.accuracy;
  j["gamma"] = result.setting.gamma;
  j["lambda"] = result.setting.lambda;
  j["median_distance"] = nu;
  j["degenerate_folds"] = result.degenerate_folds;
  write_text(root / "summary.json", j.dump(2) + "\n");
  const auto n = data.size();
  const auto correct = static_cast<std::size_t>(std::llround(result.accuracy * static_cast<double>(n)));
  write_text(root / "results.csv", "dataset,classifier,correct,n_eval\n" + config.dataset.path.stem().string() +
                                       ",gaussian_ridge," + std::to_string(correct) + "," + std::to_string(n) + "\n");
  out << "4-fold accuracy " << fmt("%.2f", 100 * result.accuracy) << "% at gamma " << fmt("%.4g", result.setting.gamma)
      << ", lambda " << fmt("%.1e", result.setting.lambda) << "\n";
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

int cmd_eval(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
             std::ostream& out) {
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "eval needs at least one results file");
  std::vector<DatasetResult> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto cells = split_csv_line(line);
      if (line_no == 1 && !cells.empty() && cells[0] == "dataset") continue;
      if (cells.size() != 4) {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected 4 columns", line_no);
      }
      DatasetResult r;
      r.dataset = cells[0];
      r.classifier = cells[1];
      try {
        r.correct = std::stoull(cells[2]);
        r.n_eval = std::stoull(cells[3]);
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": bad count", line_no);
      }
      rows.push_back(std::move(r));
    }
  }
  const auto report = build_report(std::move(rows));
  write_report(out_dir, report);
  for (const auto& c : report.classifiers) {
    out << c.classifier << ": rank " << fmt("%.2f", c.friedman_rank) << ", P90 " << fmt("%.1f", c.p90) << ", P95 "
        << fmt("%.1f", c.p95) << ", PMA " << fmt("%.1f", c.pma.mean) << " +- " << fmt("%.1f", c.pma.std) << "\n";
  }
  out << "report written to " << out_dir.string() << "\n";
  return 0;
}

}  // namespace ckernel
