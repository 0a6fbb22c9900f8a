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

#include "ckernel/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "ckernel/errors.hpp"
#include "ckernel/regression.hpp"

namespace ckernel {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorKind::Parse, "config key '" + key + "' = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) bad_value(key, v, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "not a number");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    bad_value(key, v, "expected a non-negative integer");
  }
  try {
    return std::stoull(v);
  } catch (const std::out_of_range&) {
    bad_value(key, v, "out of range");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "expected true or false");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name, std::set<std::string> allowed)
      : name_(std::move(name)), allowed_(std::move(allowed)) {
    if (auto child = tree.get_child_optional(name_)) node_ = &*child;
    if (node_ == nullptr) return;
    for (const auto& [key, value] : *node_) {
      if (!allowed_.contains(key)) throw Error(ErrorKind::Parse, "unknown key '" + key + "' in [" + name_ + "]");
      if (!value.empty()) throw Error(ErrorKind::Parse, "nested keys are not supported in [" + name_ + "]");
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    if (node_ == nullptr) return std::nullopt;
    auto v = node_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  std::set<std::string> allowed_;
  const pt::ptree* node_ = nullptr;
};

}  // namespace

std::string to_string(DatasetType type) {
  switch (type) {
    case DatasetType::Cifar10: return "cifar10";
    case DatasetType::Mnist: return "mnist";
    case DatasetType::Csv: return "csv";
  }
  return "?";
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Arch: return "arch";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Linear: return "linear";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Parse, "config: " + e.message(), e.line());
  }
  static const std::set<std::string> sections{"experiment", "dataset", "kernel", "solve"};
  for (const auto& [name, child] : tree) {
    if (!sections.contains(name)) throw Error(ErrorKind::Parse, "unknown config section [" + name + "]");
  }

  ExperimentConfig c;
  const Section ex(tree, "experiment", {"name", "seed", "threads", "tile", "out_dir", "cache_dir"});
  if (auto v = ex.get("name")) c.name = *v;
  if (auto v = ex.get("seed")) c.seed = to_uint(ex.qualified("seed"), *v);
  if (auto v = ex.get("threads")) c.threads = static_cast<unsigned>(to_uint(ex.qualified("threads"), *v));
  if (auto v = ex.get("tile")) c.tile = to_uint(ex.qualified("tile"), *v);
  if (auto v = ex.get("out_dir")) c.out_dir = resolve(base_dir, *v);
  else c.out_dir = resolve(base_dir, "out");
  if (auto v = ex.get("cache_dir")) c.cache_dir = resolve(base_dir, *v);
  else c.cache_dir = resolve(base_dir, "cache");

  const Section ds(tree, "dataset",
                   {"type", "path", "images", "labels", "test_images", "test_labels", "train_n", "test_n", "seeds",
                    "preprocess", "pad", "zca_epsilon", "csv_header", "csv_label_column"});
  auto& d = c.dataset;
  const std::string type = ds.get("type").value_or("cifar10");
  if (type == "cifar10") d.type = DatasetType::Cifar10;
  else if (type == "mnist") d.type = DatasetType::Mnist;
  else if (type == "csv") d.type = DatasetType::Csv;
  else bad_value(ds.qualified("type"), type, "expected cifar10, mnist or csv");
  if (auto v = ds.get("path")) d.path = resolve(base_dir, *v);
  if (auto v = ds.get("images")) d.images = resolve(base_dir, *v);
  if (auto v = ds.get("labels")) d.labels = resolve(base_dir, *v);
  if (auto v = ds.get("test_images")) d.test_images = resolve(base_dir, *v);
  if (auto v = ds.get("test_labels")) d.test_labels = resolve(base_dir, *v);
  if (auto v = ds.get("train_n")) d.train_n = to_uint(ds.qualified("train_n"), *v);
  if (auto v = ds.get("test_n")) d.test_n = to_uint(ds.qualified("test_n"), *v);
  if (auto v = ds.get("seeds")) {
    for (const auto& s : split_list(*v)) d.seeds.push_back(to_uint(ds.qualified("seeds"), s));
  }
  if (auto v = ds.get("preprocess")) {
    for (const auto& step : split_list(*v)) {
      if (step != "standardize" && step != "zca" && step != "flip") {
        bad_value(ds.qualified("preprocess"), step, "expected standardize, zca or flip");
      }
      d.preprocess.push_back(step);
    }
  }
  if (auto v = ds.get("pad")) d.pad = static_cast<int>(to_uint(ds.qualified("pad"), *v));
  if (auto v = ds.get("zca_epsilon")) d.zca_epsilon = to_double(ds.qualified("zca_epsilon"), *v);
  if (auto v = ds.get("csv_header")) d.csv_header = to_bool(ds.qualified("csv_header"), *v);
  if (auto v = ds.get("csv_label_column")) {
    d.csv_label_column = *v == "-1" ? -1 : static_cast<int>(to_uint(ds.qualified("csv_label_column"), *v));
  }

  const Section ks(tree, "kernel", {"kind", "arch", "gamma", "tuning_n"});
  auto& k = c.kernel;
  const std::string kind = ks.get("kind").value_or("arch");
  if (kind == "arch") k.kind = KernelKind::Arch;
  else if (kind == "gaussian") k.kind = KernelKind::Gaussian;
  else if (kind == "linear") k.kind = KernelKind::Linear;
  else bad_value(ks.qualified("kind"), kind, "expected arch, gaussian or linear");
  if (auto v = ks.get("arch")) k.arch = resolve(base_dir, *v);
  if (auto v = ks.get("gamma")) {
    k.gamma = to_double(ks.qualified("gamma"), *v);
    if (!(*k.gamma > 0)) bad_value(ks.qualified("gamma"), *v, "must be positive");
  }
  if (auto v = ks.get("tuning_n")) k.tuning_n = to_uint(ks.qualified("tuning_n"), *v);

  const Section ss(tree, "solve", {"lambdas", "tilt", "validation", "holdout_n"});
  auto& s = c.solve;
  const std::string lambdas = ss.get("lambdas").value_or("default");
  if (lambdas == "default") {
    s.lambdas = default_lambda_grid();
  } else {
    for (const auto& item : split_list(lambdas)) {
      const double l = to_double(ss.qualified("lambdas"), item);
      if (!(l >= 0)) bad_value(ss.qualified("lambdas"), item, "must be >= 0");
      s.lambdas.push_back(l);
    }
    if (s.lambdas.empty()) bad_value(ss.qualified("lambdas"), lambdas, "empty grid");
  }
  if (auto v = ss.get("tilt")) {
    s.tilt = to_double(ss.qualified("tilt"), *v);
    if (!(s.tilt >= 0 && s.tilt < 1)) bad_value(ss.qualified("tilt"), *v, "must lie in [0, 1)");
  }
  const std::string validation = ss.get("validation").value_or("loo");
  if (validation == "loo") s.validation = Validation::Loo;
  else if (validation == "holdout") s.validation = Validation::Holdout;
  else bad_value(ss.qualified("validation"), validation, "expected loo or holdout");
  if (auto v = ss.get("holdout_n")) s.holdout_n = to_uint(ss.qualified("holdout_n"), *v);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    auto c = parse_config(buf.str(), path.parent_path());
    c.source = path;
    return c;
  } catch (const Error& e) {
    const std::string where = e.location() ? ":" + std::to_string(*e.location()) : "";
    throw Error(e.kind(), path.string() + where + ": " + e.what(), e.location());
  }
}

void validate_config(const ExperimentConfig& c) {
  auto need = [](const std::filesystem::path& p, const std::string& what) {
    if (p.empty()) throw Error(ErrorKind::InvalidArgument, what + " is not set");
    if (!std::filesystem::exists(p)) throw Error(ErrorKind::InvalidArgument, what + " not found: " + p.string());
  };
  const auto& d = c.dataset;
  switch (d.type) {
    case DatasetType::Cifar10: need(d.path, "dataset.path"); break;
    case DatasetType::Csv: need(d.path, "dataset.path"); break;
    case DatasetType::Mnist:
      need(d.images, "dataset.images");
      need(d.labels, "dataset.labels");
      if (!d.test_images.empty() || !d.test_labels.empty()) {
        need(d.test_images, "dataset.test_images");
        need(d.test_labels, "dataset.test_labels");
      }
      break;
  }
  if (c.kernel.kind == KernelKind::Arch) {
    if (d.type == DatasetType::Csv) throw Error(ErrorKind::InvalidArgument, "arch kernels need image data");
    need(c.kernel.arch, "kernel.arch");
  }
  if (c.solve.validation == Validation::Holdout && c.solve.holdout_n == 0) {
    throw Error(ErrorKind::InvalidArgument, "solve.holdout_n must be set for holdout validation");
  }
}

}  // namespace ckernel
