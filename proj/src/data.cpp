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

#include "ckernel/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include "ckernel/errors.hpp"

namespace ckernel {

ImageView ImageDataset::view(BatchRange range) const {
  if (range.end > size() || range.begin > range.end) throw Error(ErrorKind::InvalidArgument, "view out of range");
  ImageView v;
  v.pixels = std::span(pixels).subspan(range.begin * image_size(), range.size() * image_size());
  v.dims = dims;
  v.channels = channels;
  v.range = range;
  return v;
}

Digest ImageDataset::content_hash() const {
  Sha256 h;
  h.update("ckernel-images-v1");
  h.update_pod(static_cast<std::uint64_t>(size()));
  h.update_pod(static_cast<std::int32_t>(dims.rows));
  h.update_pod(static_cast<std::int32_t>(dims.cols));
  h.update_pod(static_cast<std::int32_t>(channels));
  h.update(std::span(reinterpret_cast<const std::uint8_t*>(labels.data()), labels.size() * sizeof(int)));
  h.update(std::span(reinterpret_cast<const std::uint8_t*>(pixels.data()), pixels.size() * sizeof(float)));
  return h.finish();
}

void ImageDataset::validate() const {
  if (dims.rows < 1 || dims.cols < 1 || channels < 1) throw Error(ErrorKind::Format, "non-positive image shape");
  if (pixels.size() != size() * image_size()) throw Error(ErrorKind::Format, "pixel count does not match shape");
  if (!ids.empty() && ids.size() != size()) throw Error(ErrorKind::Format, "id count does not match label count");
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw Error(ErrorKind::Format, "label " + std::to_string(y) + " out of range");
  }
  for (float p : pixels) {
    if (!std::isfinite(p)) throw Error(ErrorKind::Format, "non-finite pixel value");
  }
}

void ImageDataset::append_provenance(const std::string& step) {
  provenance += provenance.empty() ? step : "|" + step;
}

// ---- loaders ---------------------------------------------------------------

namespace {

constexpr std::size_t kCifarRecord = 3073;

std::uint32_t be32(std::span<const std::uint8_t> b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void sequential_ids(ImageDataset& d) {
  d.ids.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) d.ids[i] = static_cast<std::uint32_t>(i);
}

}  // namespace

ImageDataset load_cifar10_file(const std::filesystem::path& file) {
  const auto bytes = read_file(file);
  if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
    throw Error(ErrorKind::Format, file.string() + ": size " + std::to_string(bytes.size()) +
                                       " is not a whole number of 3073-byte records (truncated record?)");
  }
  const std::size_t n = bytes.size() / kCifarRecord;
  ImageDataset d;
  d.dims = {32, 32};
  d.channels = 3;
  d.class_count = 10;
  d.labels.resize(n);
  d.pixels.resize(n * 32 * 32 * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kCifarRecord;
    if (rec[0] > 9) throw Error(ErrorKind::Format, file.string() + ": record " + std::to_string(i) + " has label " +
                                                       std::to_string(rec[0]));
    d.labels[i] = rec[0];
    float* out = d.pixels.data() + i * 3072;
    for (int c = 0; c < 3; ++c) {
      for (int p = 0; p < 1024; ++p) out[p * 3 + c] = static_cast<float>(rec[1 + c * 1024 + p]) / 255.0f;
    }
  }
  sequential_ids(d);
  d.provenance = "cifar10:" + file.filename().string();
  return d;
}

ImageDataset load_cifar10(const std::filesystem::path& dir, CifarSplit split) {
  std::vector<std::filesystem::path> files;
  if (split == CifarSplit::Test) {
    files.push_back(dir / "test_batch.bin");
  } else {
    for (int b = 1; b <= 5; ++b) files.push_back(dir / ("data_batch_" + std::to_string(b) + ".bin"));
  }
  ImageDataset all;
  for (const auto& f : files) {
    auto part = load_cifar10_file(f);
    if (all.size() == 0) {
      all = std::move(part);
      continue;
    }
    all.pixels.insert(all.pixels.end(), part.pixels.begin(), part.pixels.end());
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  sequential_ids(all);
  all.provenance = std::string("cifar10:") + (split == CifarSplit::Test ? "test" : "train");
  return all;
}

ImageDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  if (img.size() < 16) throw Error(ErrorKind::Format, images.string() + ": header truncated");
  if (lab.size() < 8) throw Error(ErrorKind::Format, labels.string() + ": header truncated");
  const std::span<const std::uint8_t> is(img), ls(lab);
  if (be32(is.subspan(0, 4)) != 0x00000803) throw Error(ErrorKind::Format, images.string() + ": bad magic");
  if (be32(ls.subspan(0, 4)) != 0x00000801) throw Error(ErrorKind::Format, labels.string() + ": bad magic");
  const std::size_t n = be32(is.subspan(4, 4));
  const int rows = static_cast<int>(be32(is.subspan(8, 4)));
  const int cols = static_cast<int>(be32(is.subspan(12, 4)));
  const std::size_t nl = be32(ls.subspan(4, 4));
  if (n != nl) {
    throw Error(ErrorKind::Format, "image count " + std::to_string(n) + " != label count " + std::to_string(nl));
  }
  const std::size_t per = static_cast<std::size_t>(rows) * cols;
  if (img.size() != 16 + n * per) throw Error(ErrorKind::Format, images.string() + ": payload size mismatch");
  if (lab.size() != 8 + n) throw Error(ErrorKind::Format, labels.string() + ": payload size mismatch");
  ImageDataset d;
  d.dims = {rows, cols};
  d.channels = 1;
  d.class_count = 10;
  d.labels.resize(n);
  d.pixels.resize(n * per);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] > 9) throw Error(ErrorKind::Format, "label out of range at record " + std::to_string(i));
    d.labels[i] = lab[8 + i];
  }
  for (std::size_t i = 0; i < n * per; ++i) d.pixels[i] = static_cast<float>(img[16 + i]) / 255.0f;
  sequential_ids(d);
  d.provenance = "mnist:" + images.filename().string();
  return d;
}

namespace {

// RFC-4180 subset: quoted fields, "" escapes, CRLF tolerated.
std::vector<std::vector<std::string>> split_csv(std::string_view text, std::vector<std::size_t>& line_numbers) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  auto end_record = [&] {
    if (field_started || !record.empty() || !field.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
      line_numbers.push_back(record_line);
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted field", line);
  end_record();
  return records;
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

TabularDataset parse_csv_tabular(std::string_view text, const CsvOptions& options) {
  std::vector<std::size_t> lines;
  auto records = split_csv(text, lines);
  std::size_t first = options.header ? 1 : 0;
  if (records.size() <= first) throw Error(ErrorKind::Parse, "no data rows");
  const std::size_t width = records[first].size();
  if (width < 2) throw Error(ErrorKind::Parse, "need at least one feature and one label column", lines[first]);
  const int lc = options.label_column < 0 ? static_cast<int>(width) + options.label_column : options.label_column;
  if (lc < 0 || lc >= static_cast<int>(width)) throw Error(ErrorKind::InvalidArgument, "label column out of range");
  if (options.header && records[0].size() != width) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(lines[0]) + ": header width differs from data", lines[0]);
  }

  TabularDataset d;
  const std::size_t n = records.size() - first;
  d.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - 1));
  d.labels.reserve(n);
  std::map<std::string, int, std::less<>> label_ids;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t line = lines[r];
    if (rec.size() != width) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": expected " + std::to_string(width) +
                                        " fields, got " + std::to_string(rec.size()) + " (ragged row)",
                  line);
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      auto cell = trim_view(rec[c]);
      if (static_cast<int>(c) == lc) {
        auto [it, inserted] = label_ids.try_emplace(std::string(cell), static_cast<int>(label_ids.size()));
        if (inserted) d.class_names.emplace_back(cell);
        d.labels.push_back(it->second);
        continue;
      }
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(c + 1) +
                                          ": non-numeric feature '" + std::string(cell) + "'",
                    line);
      }
      d.rows(static_cast<Eigen::Index>(r - first), col++) = value;
    }
  }
  d.class_count = static_cast<int>(label_ids.size());
  return d;
}

TabularDataset load_csv_tabular(const std::filesystem::path& path, const CsvOptions& options) {
  const auto bytes = read_file(path);
  try {
    return parse_csv_tabular(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), options);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what(), e.location());
  }
}

// ---- preprocessing ---------------------------------------------------------

Moments fit_moments(const ImageDataset& data) {
  const int ch = data.channels;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(ch), sq = Eigen::VectorXd::Zero(ch);
  const std::size_t count = data.size() * data.dims.rows * data.dims.cols;
  for (std::size_t p = 0; p < count; ++p) {
    for (int c = 0; c < ch; ++c) {
      const double v = data.pixels[p * ch + c];
      sum[c] += v;
    }
  }
  Moments m;
  m.mean = sum / std::max<double>(1.0, static_cast<double>(count));
  for (std::size_t p = 0; p < count; ++p) {
    for (int c = 0; c < ch; ++c) {
      const double v = data.pixels[p * ch + c] - m.mean[c];
      sq[c] += v * v;
    }
  }
  m.stddev = (sq / std::max<double>(1.0, static_cast<double>(count))).cwiseSqrt().cwiseMax(kStdFloor);
  return m;
}

Moments fit_moments(const TabularDataset& data) {
  Moments m;
  const double n = std::max<double>(1.0, static_cast<double>(data.rows.rows()));
  m.mean = data.rows.colwise().sum().transpose() / n;
  const Eigen::MatrixXd centered = data.rows.rowwise() - m.mean.transpose();
  m.stddev = (centered.array().square().colwise().sum().transpose() / n).sqrt().max(kStdFloor);
  return m;
}

ImageDataset apply_moments(const Moments& m, ImageDataset data) {
  const int ch = data.channels;
  if (m.mean.size() != ch) throw Error(ErrorKind::ShapeMismatch, "moments channel count mismatch");
  const std::size_t count = data.size() * data.dims.rows * data.dims.cols;
  for (std::size_t p = 0; p < count; ++p) {
    for (int c = 0; c < ch; ++c) {
      auto& v = data.pixels[p * ch + c];
      v = static_cast<float>((v - m.mean[c]) / m.stddev[c]);
    }
  }
  data.append_provenance("standardize");
  return data;
}

TabularDataset apply_moments(const Moments& m, TabularDataset data) {
  if (m.mean.size() != data.rows.cols()) throw Error(ErrorKind::ShapeMismatch, "moments feature count mismatch");
  data.rows = ((data.rows.rowwise() - m.mean.transpose()).array().rowwise() / m.stddev.transpose().array()).matrix();
  return data;
}

ImageDataset standardize(ImageDataset data) {
  const auto m = fit_moments(data);
  return apply_moments(m, std::move(data));
}

TabularDataset standardize(TabularDataset data) {
  const auto m = fit_moments(data);
  return apply_moments(m, std::move(data));
}

Eigen::MatrixXd flatten(const ImageDataset& data) {
  const auto d = static_cast<Eigen::Index>(data.image_size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto img = data.image(i);
    for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), k) = img[static_cast<std::size_t>(k)];
  }
  return x;
}

Eigen::MatrixXd one_hot(std::span<const int> labels, int class_count) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) throw Error(ErrorKind::InvalidArgument, "label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

ZcaTransform zca_fit(const ImageDataset& data, std::optional<double> epsilon) {
  if (data.size() < 2) throw Error(ErrorKind::InvalidArgument, "zca_fit needs at least 2 examples");
  Eigen::MatrixXd x = flatten(data);
  ZcaTransform z;
  z.mean = x.colwise().mean().transpose();
  x.rowwise() -= z.mean.transpose();
  const Eigen::Index d = x.cols(), n = x.rows();
  const auto inv_sqrt = [](double lam) { return lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0; };
  if (n < d) {
    // Fewer examples than features: the covariance has rank < n, so work with
    // the n x n Gram matrix and treat the null space analytically.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(n));
    gram = gram.selfadjointView<Eigen::Lower>();
    z.epsilon = epsilon.value_or(1e-5 * gram.trace() / static_cast<double>(d));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::FactorizationFailed, "Gram eigendecomposition failed");
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i)
      if (lam[i] > cutoff) kept.push_back(i);
    const auto r = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd u(d, r);
    Eigen::VectorXd delta(r);
    const double null_scale = inv_sqrt(z.epsilon);
    z.eigenvalues = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < r; ++j) {
      const Eigen::Index i = kept[static_cast<std::size_t>(j)];
      u.col(j) = x.transpose() * eig.eigenvectors().col(i) / std::sqrt(lam[i] * static_cast<double>(n));
      delta[j] = inv_sqrt(lam[i] + z.epsilon) - null_scale;
      z.eigenvalues[d - r + j] = lam[i];
    }
    z.whitening = u * delta.asDiagonal() * u.transpose();
    z.whitening.diagonal().array() += null_scale;
    z.whitening = 0.5 * (z.whitening + z.whitening.transpose()).eval();
    return z;
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(n));
  cov = cov.selfadjointView<Eigen::Lower>();
  z.epsilon = epsilon.value_or(1e-5 * cov.trace() / static_cast<double>(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::FactorizationFailed, "covariance eigendecomposition failed");
  z.eigenvalues = eig.eigenvalues();
  Eigen::VectorXd scale(d);
  for (Eigen::Index i = 0; i < d; ++i) scale[i] = inv_sqrt(std::max(0.0, z.eigenvalues[i]) + z.epsilon);
  const auto& u = eig.eigenvectors();
  z.whitening = u * scale.asDiagonal() * u.transpose();
  z.whitening = 0.5 * (z.whitening + z.whitening.transpose()).eval();
  return z;
}

ImageDataset zca_apply(const ZcaTransform& zca, ImageDataset data) {
  if (static_cast<std::size_t>(zca.mean.size()) != data.image_size()) {
    throw Error(ErrorKind::ShapeMismatch, "ZCA dimension does not match image size");
  }
  Eigen::MatrixXd x = flatten(data);
  x.rowwise() -= zca.mean.transpose();
  const Eigen::MatrixXd w = x * zca.whitening;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto img = data.image(i);
    for (std::size_t k = 0; k < img.size(); ++k) {
      img[k] = static_cast<float>(w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
  }
  data.append_provenance("zca");
  return data;
}

ImageDataset flip_horizontal(const ImageDataset& data) {
  ImageDataset out = data;
  const int rows = data.dims.rows, cols = data.dims.cols, ch = data.channels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto src = data.image(i);
    auto dst = out.image(i);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        for (int k = 0; k < ch; ++k) {
          dst[(static_cast<std::size_t>(r) * cols + c) * ch + k] =
              src[(static_cast<std::size_t>(r) * cols + (cols - 1 - c)) * ch + k];
        }
      }
    }
  }
  out.append_provenance("hflip");
  return out;
}

ImageDataset flip_augment(const ImageDataset& data) {
  ImageDataset out = data;
  const auto mirrored = flip_horizontal(data);
  out.pixels.insert(out.pixels.end(), mirrored.pixels.begin(), mirrored.pixels.end());
  out.labels.insert(out.labels.end(), data.labels.begin(), data.labels.end());
  out.ids.insert(out.ids.end(), data.ids.begin(), data.ids.end());
  out.append_provenance("flip_augment");
  return out;
}

ImageDataset pad_to(const ImageDataset& data, Spatial target) {
  if (target.rows < data.dims.rows || target.cols < data.dims.cols) {
    throw Error(ErrorKind::InvalidArgument, "pad target smaller than current dims");
  }
  ImageDataset out = data;
  out.dims = target;
  out.pixels.assign(data.size() * out.image_size(), 0.0f);
  const int top = (target.rows - data.dims.rows) / 2;
  const int left = (target.cols - data.dims.cols) / 2;
  const int ch = data.channels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto src = data.image(i);
    auto dst = out.image(i);
    for (int r = 0; r < data.dims.rows; ++r) {
      const auto s = src.subspan(static_cast<std::size_t>(r) * data.dims.cols * ch,
                                 static_cast<std::size_t>(data.dims.cols) * ch);
      std::copy(s.begin(), s.end(), dst.begin() + (static_cast<std::size_t>(r + top) * target.cols + left) * ch);
    }
  }
  out.append_provenance("pad" + std::to_string(target.rows) + "x" + std::to_string(target.cols));
  return out;
}

std::vector<std::size_t> balanced_indices(std::span<const int> labels, int class_count, std::size_t n,
                                          std::uint64_t seed, std::span<const std::size_t> exclude) {
  if (class_count < 1) throw Error(ErrorKind::InvalidArgument, "class_count must be positive");
  if (n % static_cast<std::size_t>(class_count) != 0) {
    throw Error(ErrorKind::Indivisible, std::to_string(n) + " not divisible by " + std::to_string(class_count) +
                                            " classes");
  }
  const std::size_t per_class = n / static_cast<std::size_t>(class_count);
  std::unordered_set<std::size_t> excluded(exclude.begin(), exclude.end());
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!excluded.contains(i)) by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);
  }
  std::vector<std::size_t> out;
  out.reserve(n);
  for (int c = 0; c < class_count; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < per_class) {
      throw Error(ErrorKind::InsufficientClass, "class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                                                    " examples, need " + std::to_string(per_class));
    }
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    // Partial Fisher-Yates: the first per_class slots are a uniform draw.
    for (std::size_t k = 0; k < per_class; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ImageDataset select(const ImageDataset& data, std::span<const std::size_t> indices) {
  ImageDataset out;
  out.dims = data.dims;
  out.channels = data.channels;
  out.class_count = data.class_count;
  out.provenance = data.provenance;
  out.pixels.reserve(indices.size() * data.image_size());
  for (auto i : indices) {
    if (i >= data.size()) throw Error(ErrorKind::InvalidArgument, "index out of range in select");
    auto img = data.image(i);
    out.pixels.insert(out.pixels.end(), img.begin(), img.end());
    out.labels.push_back(data.labels[i]);
    out.ids.push_back(data.ids.empty() ? static_cast<std::uint32_t>(i) : data.ids[i]);
  }
  return out;
}

ImageDataset subsample_balanced(const ImageDataset& data, std::size_t n, std::uint64_t seed) {
  const auto idx = balanced_indices(data.labels, data.class_count, n, seed);
  auto out = select(data, idx);
  out.append_provenance("subsample" + std::to_string(n) + "@" + std::to_string(seed));
  return out;
}

}  // namespace ckernel
