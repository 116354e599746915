/*
 * Copyright 2026 The rsdnet Authors
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

#include "rsdnet/data_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "rsdnet/rng.hpp"

namespace rsdnet {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxErrorKind::io_failure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const unsigned char> take(std::size_t count) {
    need(count);
    std::span<const unsigned char> out(bytes_.data() + pos_, count);
    pos_ += count;
    return out;
  }

  void expect_end() const {
    if (pos_ != bytes_.size())
      throw IdxError(IdxErrorKind::trailing_bytes,
                     path_.string() + ": " + std::to_string(bytes_.size() - pos_) + " trailing bytes");
  }

 private:
  void need(std::size_t count) const {
    if (bytes_.size() - pos_ < count) throw IdxError(IdxErrorKind::truncated, path_.string() + ": truncated");
  }

  const std::vector<unsigned char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                  static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes.data(), bytes.size());
}

std::ofstream open_for_writing(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

double parse_real(const std::string& s) {
  if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("malformed integer '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::idx_file: return "idx_file";
    case Provenance::synthetic: return "synthetic";
    case Provenance::corrupted: return "corrupted";
    case Provenance::attacked: return "attacked";
    case Provenance::csv_file: return "csv_file";
  }
  return "unknown";
}

std::string to_string(IdxErrorKind kind) {
  switch (kind) {
    case IdxErrorKind::io_failure: return "io_failure";
    case IdxErrorKind::bad_magic: return "bad_magic";
    case IdxErrorKind::truncated: return "truncated";
    case IdxErrorKind::trailing_bytes: return "trailing_bytes";
    case IdxErrorKind::count_mismatch: return "count_mismatch";
    case IdxErrorKind::bad_label: return "bad_label";
  }
  return "unknown";
}

void Dataset::validate() const {
  if (features.size() != labels.size() * dim) throw std::invalid_argument("dataset: feature/label row counts differ");
  if (classes < 2) throw std::invalid_argument("dataset: need at least two classes");
  for (auto y : labels)
    if (y >= classes) throw std::invalid_argument("dataset: label out of range");
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.dim = data.dim;
  out.classes = data.classes;
  out.provenance = data.provenance;
  out.features.reserve(indices.size() * data.dim);
  out.labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= data.size()) throw std::out_of_range("subset: index out of range");
    const auto r = data.row(idx);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[idx]);
  }
  return out;
}

Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t classes) {
  const auto image_bytes = slurp(images);
  const auto label_bytes = slurp(labels);

  ByteReader img(image_bytes, images);
  if (img.u32() != kIdxImagesMagic) throw IdxError(IdxErrorKind::bad_magic, images.string() + ": bad magic");
  const std::size_t n = img.u32();
  const std::size_t rows = img.u32();
  const std::size_t cols = img.u32();
  const auto pixels = img.take(n * rows * cols);
  img.expect_end();

  ByteReader lab(label_bytes, labels);
  if (lab.u32() != kIdxLabelsMagic) throw IdxError(IdxErrorKind::bad_magic, labels.string() + ": bad magic");
  const std::size_t n_labels = lab.u32();
  if (n_labels != n)
    throw IdxError(IdxErrorKind::count_mismatch,
                   std::to_string(n) + " images but " + std::to_string(n_labels) + " labels");
  const auto raw_labels = lab.take(n);
  lab.expect_end();

  Dataset data;
  data.dim = rows * cols;
  data.classes = classes;
  data.provenance = Provenance::idx_file;
  data.features.resize(pixels.size());
  std::transform(pixels.begin(), pixels.end(), data.features.begin(),
                 [](unsigned char b) { return static_cast<double>(b) / 255.0; });
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw_labels[i] >= classes)
      throw IdxError(IdxErrorKind::bad_label, labels.string() + ": label " + std::to_string(raw_labels[i]) +
                                                  " outside [0, " + std::to_string(classes) + ")");
    data.labels[i] = raw_labels[i];
  }
  return data;
}

void write_idx(const Dataset& data, std::size_t rows, std::size_t cols, const std::filesystem::path& images,
               const std::filesystem::path& labels) {
  if (rows * cols != data.dim) throw std::invalid_argument("write_idx: geometry does not match dimension");
  auto img = open_for_writing(images, true);
  put_u32(img, kIdxImagesMagic);
  put_u32(img, static_cast<std::uint32_t>(data.size()));
  put_u32(img, static_cast<std::uint32_t>(rows));
  put_u32(img, static_cast<std::uint32_t>(cols));
  for (double v : data.features) {
    const double scaled = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
    img.put(static_cast<char>(static_cast<unsigned char>(scaled)));
  }
  auto lab = open_for_writing(labels, true);
  put_u32(lab, kIdxLabelsMagic);
  put_u32(lab, static_cast<std::uint32_t>(data.size()));
  for (auto y : data.labels) {
    if (y > 255) throw std::invalid_argument("write_idx: label does not fit in a byte");
    lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  }
  if (!img || !lab) throw std::runtime_error("write_idx: write failed");
}

double example1_posterior(double x) {
  const double kappa = std::sin(x) + std::exp(x) + std::pow(std::cbrt(x), 5.0);
  return 1.0 / (1.0 + std::exp(-kappa));
}

Dataset synthetic_example1(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synthetic_example1: n must be >= 1");
  Rng rng(seed);
  Dataset data;
  data.dim = 1;
  data.classes = 2;
  data.provenance = Provenance::synthetic;
  data.features.resize(n);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal();
    data.features[i] = x;
    data.labels[i] = rng.uniform() < example1_posterior(x) ? 0 : 1;
  }
  return data;
}

Dataset synthetic_blobs(const BlobConfig& cfg, std::uint64_t seed) {
  if (cfg.n < 1 || cfg.classes < 2 || cfg.dim < 1) throw std::invalid_argument("synthetic_blobs: bad configuration");
  Rng rng(seed);
  std::vector<double> centres(cfg.classes * cfg.dim);
  if (cfg.classes == 2 && cfg.dim == 2) {
    centres = {0.25, 0.25, 0.75, 0.75};
  } else {
    for (double& c : centres) c = rng.uniform(0.2, 0.8);
  }
  Dataset data;
  data.dim = cfg.dim;
  data.classes = cfg.classes;
  data.provenance = Provenance::synthetic;
  data.features.resize(cfg.n * cfg.dim);
  data.labels.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t y = i % cfg.classes;
    data.labels[i] = y;
    for (std::size_t d = 0; d < cfg.dim; ++d)
      data.features[i * cfg.dim + d] = std::clamp(centres[y * cfg.dim + d] + cfg.spread * rng.normal(), 0.0, 1.0);
  }
  return data;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > n) throw std::invalid_argument("make_folds: need 1 <= k <= n");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  FoldPlan plan{k, seed, {}};
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = n / k + (f < n % k ? 1 : 0);
    std::vector<std::size_t> fold(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(start + len));
    std::sort(fold.begin(), fold.end());
    plan.folds.push_back(std::move(fold));
    start += len;
  }
  return plan;
}

FoldSplit split_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold) {
  if (fold >= plan.folds.size()) throw std::out_of_range("split_fold: no such fold");
  std::vector<char> in_test(data.size(), 0);
  for (auto idx : plan.folds[fold]) in_test.at(idx) = 1;
  std::vector<std::size_t> train_idx;
  train_idx.reserve(data.size() - plan.folds[fold].size());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!in_test[i]) train_idx.push_back(i);
  return {subset(data, train_idx), subset(data, plan.folds[fold])};
}

std::string format_real(double value) {
  if (std::isnan(value)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void write_results(const std::vector<ResultRecord>& records, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.dataset) << ',' << csv_field(r.loss) << ',' << format_real(r.beta) << ','
        << format_real(r.lambda) << ',' << csv_field(r.contamination) << ',' << csv_field(r.fold) << ','
        << format_real(r.clean_accuracy) << ',' << format_real(r.adv_accuracy) << ',' << r.epochs << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ResultRecord> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw std::runtime_error(path.string() + ": unexpected results header");
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::runtime_error(path.string() + ": expected 9 fields");
    records.push_back({f[0], f[1], parse_real(f[2]), parse_real(f[3]), f[4], f[5], parse_real(f[6]),
                       parse_real(f[7]), parse_count(f[8])});
  }
  return records;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& features,
                       const std::filesystem::path& labels, std::span<const std::uint8_t> flip_mask) {
  if (!flip_mask.empty() && flip_mask.size() != data.size())
    throw std::invalid_argument("write_dataset_csv: flip mask length differs from dataset size");
  auto feat = open_for_writing(features);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = data.row(i);
    for (std::size_t d = 0; d < r.size(); ++d) feat << (d ? "," : "") << format_full(r[d]);
    feat << '\n';
  }
  auto lab = open_for_writing(labels);
  lab << (flip_mask.empty() ? "label\n" : "label,flipped\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    lab << data.labels[i];
    if (!flip_mask.empty()) lab << ',' << static_cast<int>(flip_mask[i]);
    lab << '\n';
  }
  if (!feat || !lab) throw std::runtime_error("write_dataset_csv: write failed");
}

Dataset read_dataset_csv(const std::filesystem::path& features, const std::filesystem::path& labels,
                         std::size_t classes) {
  std::ifstream feat(features), lab(labels);
  if (!feat) throw std::runtime_error("cannot open " + features.string());
  if (!lab) throw std::runtime_error("cannot open " + labels.string());
  Dataset data;
  data.provenance = Provenance::csv_file;
  std::string line;
  while (std::getline(feat, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (data.dim == 0) data.dim = fields.size();
    if (fields.size() != data.dim) throw std::runtime_error(features.string() + ": ragged feature rows");
    for (const auto& f : fields) data.features.push_back(parse_real(f));
  }
  if (!std::getline(lab, line) || (line != "label" && line != "label,flipped"))
    throw std::runtime_error(labels.string() + ": unexpected labels header");
  std::size_t max_label = 0;
  while (std::getline(lab, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    data.labels.push_back(parse_count(fields.at(0)));
    max_label = std::max(max_label, data.labels.back());
  }
  data.classes = classes ? classes : std::max<std::size_t>(2, max_label + 1);
  data.validate();
  return data;
}

}  // namespace rsdnet
