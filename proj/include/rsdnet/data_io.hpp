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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsdnet {

enum class Provenance { idx_file, synthetic, corrupted, attacked, csv_file };

std::string to_string(Provenance p);

/// n x p feature matrix stored row-major, one row per example, with labels
/// in [0, classes).
struct Dataset {
  std::vector<double> features;
  std::vector<std::size_t> labels;
  std::size_t dim = 0;
  std::size_t classes = 0;
  Provenance provenance = Provenance::synthetic;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {features.data() + i * dim, dim}; }

  /// Throws std::invalid_argument on inconsistent sizes or labels out of range.
  void validate() const;
};

/// Rows of `data` at `indices`, in that order.
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

enum class IdxErrorKind { io_failure, bad_magic, truncated, trailing_bytes, count_mismatch, bad_label };

class IdxError : public std::runtime_error {
 public:
  IdxError(IdxErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  IdxErrorKind kind() const noexcept { return kind_; }

 private:
  IdxErrorKind kind_;
};

std::string to_string(IdxErrorKind kind);

/// Reads an IDX image file (magic 0x00000803) and label file (magic
/// 0x00000801). Pixel byte b becomes b / 255; images are flattened row-major.
/// Parsing is strict: trailing bytes are an error.
Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t classes = 10);

/// Writes a dataset whose features are multiples of 1/255 back to IDX files
/// with the given image geometry (rows * cols must equal dim).
void write_idx(const Dataset& data, std::size_t rows, std::size_t cols, const std::filesystem::path& images,
               const std::filesystem::path& labels);

/// True class-1 posterior of the scalar benchmark problem:
/// logistic(sin x + e^x + x^{5/3}), with x^{5/3} = sign(x) |x|^{5/3}.
double example1_posterior(double x);

/// n draws x ~ N(0,1) with label 0 ("class 1") drawn with probability
/// example1_posterior(x). Features are not rescaled.
Dataset synthetic_example1(std::size_t n, std::uint64_t seed);

struct BlobConfig {
  std::size_t n = 200;
  std::size_t classes = 2;
  std::size_t dim = 2;
  /// Per-coordinate standard deviation around each class centre.
  double spread = 0.07;
};

/// Gaussian class blobs in [0,1]^dim. Class centres are drawn from
/// U(0.2, 0.8)^dim except for the two-class two-dimensional case, which uses
/// the fixed centres (0.25, 0.25) and (0.75, 0.75). Features are clamped to
/// [0, 1]; labels cycle through the classes so class sizes differ by at most one.
Dataset synthetic_blobs(const BlobConfig& cfg, std::uint64_t seed);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  /// Each fold's indices in ascending order.
  std::vector<std::vector<std::size_t>> folds;
};

/// Uniform random partition of [0, n) into k folds whose sizes differ by at
/// most one. Throws std::invalid_argument unless 1 <= k <= n.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct FoldSplit {
  Dataset train;
  Dataset test;
};

/// Fold `fold` as validation, all remaining folds (in index order) as training.
FoldSplit split_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold);

/// One row of the results table.
struct ResultRecord {
  std::string dataset;
  std::string loss;
  double beta = 0.0;
  double lambda = 0.0;
  std::string contamination;
  std::string fold;
  double clean_accuracy = 0.0;
  double adv_accuracy = 0.0;  // NaN when no attack applies
  std::size_t epochs = 0;

  bool operator==(const ResultRecord&) const = default;
};

inline constexpr const char* kResultsHeader =
    "dataset,loss,beta,lambda,contamination,fold,clean_accuracy,adv_accuracy,epochs";

/// Reals use 6 significant digits; NaN is written as NA.
void write_results(const std::vector<ResultRecord>& records, const std::filesystem::path& path);
std::vector<ResultRecord> read_results(const std::filesystem::path& path);

/// Formats a real with 6 significant digits ("NA" for NaN).
std::string format_real(double value);

/// Dataset dump: a features CSV (one row per example, full precision) and a
/// labels CSV with header "label" or "label,flipped" when a mask is supplied.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& features,
                       const std::filesystem::path& labels, std::span<const std::uint8_t> flip_mask = {});
Dataset read_dataset_csv(const std::filesystem::path& features, const std::filesystem::path& labels,
                         std::size_t classes = 0);

}  // namespace rsdnet
