/* Copyright 2026 The augnas Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "augnas/rng.hpp"
#include "augnas/tensor.hpp"

namespace augnas {

// 8-bit images N x C x H x W with one class label each.
struct Dataset {
  std::int64_t channels = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  int n_classes = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t image_bytes() const { return static_cast<std::size_t>(channels * height * width); }
  // Throws ValueError on inconsistent buffers or labels >= n_classes.
  void validate() const;
  // FNV-1a 64 over header, pixels and labels, as 16 hex digits.
  std::string digest() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class DatasetFormat { kRawBinary, kPngDirectory, kSynthetic };

// Raw binary layout: "DSET1", little-endian uint32 N, C, H, W, n_classes,
// N*C*H*W pixel bytes, N label bytes.
Dataset load_raw_binary(const std::filesystem::path& path);
void write_raw_binary(const std::filesystem::path& path, const Dataset& data);

// <root>/<class_index>/<name>.png, files read in name order. All images must
// share size and channel count (gray or RGB; alpha is dropped).
Dataset load_png_directory(const std::filesystem::path& root);
void write_png(const std::filesystem::path& path, std::int64_t channels, std::int64_t height,
               std::int64_t width, std::span<const std::uint8_t> pixels);

// Two-class RGB set on a noisy gray background: class 0 shows a reddish
// horizontal bar, class 1 a bluish vertical bar. Labels alternate.
Dataset make_color_vs_shape(std::uint64_t seed, std::size_t n, std::int64_t size = 16);

// `source` is a path for the file formats and a generator name
// ("color-vs-shape") for kSynthetic.
Dataset load_dataset(const std::string& source, DatasetFormat format, std::uint64_t seed = 0,
                     std::size_t synthetic_n = 512, std::int64_t synthetic_size = 16);
DatasetFormat dataset_format_from_name(const std::string& name);

enum class SplitId { kTrain, kVal, kTest };

struct DatasetSplit {
  Dataset data;
  std::vector<std::size_t> indices;  // positions in the source dataset
  SplitId id = SplitId::kTrain;
  std::string source_digest;
  std::uint64_t seed = 0;
};

struct Splits {
  DatasetSplit train;
  DatasetSplit val;
  DatasetSplit test;
};

// Label-stratified deterministic partition. Per class floor(n_c * f) images
// go to train and val; the rest form the test split. Throws ValueError when
// a fraction is negative or they sum above 1.
Splits split(const Dataset& data, double train_fraction, double val_fraction,
             std::uint64_t seed);
DatasetSplit merge(const DatasetSplit& a, const DatasetSplit& b);

// Images `rows` of `data` as an 8-bit batch.
struct ByteBatch {
  std::int64_t n = 0, channels = 0, height = 0, width = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;
};
ByteBatch gather(const Dataset& data, std::span<const std::size_t> rows);

struct PreprocessConfig {
  int pad = 4;
  int crop = 0;  // square crop side, 0 = image side
  float hflip_prob = 0.5f;
  std::vector<float> mean = {0.5f, 0.5f, 0.5f};
  std::vector<float> std = {0.5f, 0.5f, 0.5f};
  int cutout_size = 16;

  void validate(std::int64_t channels, std::int64_t height, std::int64_t width) const;
};

// Training: zero pad, random crop, random horizontal flip, scale to [0, 1].
// Evaluation: scale only. Normalization is a separate step so learned
// augmentations act on natural pixel ranges.
Tensor baseline_preprocess(const ByteBatch& batch, const PreprocessConfig& config, Rng& rng,
                           bool training);
Tensor normalize(const Tensor& x, std::span<const float> mean, std::span<const float> std);
// Zeroes one size x size square per image, center uniform over the image,
// clipped at the borders.
Tensor cutout(const Tensor& x, int size, Rng& rng);

}  // namespace augnas
