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

#include "augnas/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include <png.h>

#include "augnas/error.hpp"

namespace augnas {

namespace {

constexpr char kMagic[5] = {'D', 'S', 'E', 'T', '1'};
constexpr std::size_t kHeaderBytes = 5 + 5 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

struct PngFile {
  explicit PngFile(const std::filesystem::path& path, const char* mode)
      : f(std::fopen(path.string().c_str(), mode)) {
    if (f == nullptr) throw ValueError("cannot open " + path.string());
  }
  ~PngFile() { std::fclose(f); }
  PngFile(const PngFile&) = delete;
  PngFile& operator=(const PngFile&) = delete;
  std::FILE* f;
};

struct PngImage {
  std::int64_t channels, height, width;
  std::vector<std::uint8_t> chw;
};

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw ParseError(msg); }

PngImage read_png(const std::filesystem::path& path) {
  PngFile file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.f) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  PngImage img{};
  try {
    png_init_io(png, file.f);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    img.channels = png_get_channels(png, info);
    if (img.channels != 1 && img.channels != 3) {
      throw ParseError("unsupported channel count " + std::to_string(img.channels));
    }
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> hwc(row_bytes * static_cast<std::size_t>(img.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = hwc.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    img.chw.resize(hwc.size());
    const std::int64_t plane = img.height * img.width;
    for (std::int64_t i = 0; i < plane; ++i) {
      for (std::int64_t c = 0; c < img.channels; ++c) {
        img.chw[static_cast<std::size_t>(c * plane + i)] =
            hwc[static_cast<std::size_t>(i * img.channels + c)];
      }
    }
  } catch (const ParseError& e) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": " + e.what());
  }
  return img;
}

}  // namespace

void Dataset::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw ValueError("dataset has empty image extent " + std::to_string(channels) + "x" +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (n_classes < 2) throw ValueError("dataset needs >= 2 classes");
  if (pixels.size() != labels.size() * image_bytes()) {
    throw ValueError("dataset pixel buffer holds " + std::to_string(pixels.size()) +
                     " bytes, expected " + std::to_string(labels.size() * image_bytes()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw ValueError("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                       " is out of range for " + std::to_string(n_classes) + " classes");
    }
  }
}

std::string Dataset::digest() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  std::vector<std::uint8_t> header;
  for (auto v : {channels, height, width, static_cast<std::int64_t>(n_classes)}) {
    put_u32(header, static_cast<std::uint32_t>(v));
  }
  for (auto b : header) mix(b);
  for (auto b : pixels) mix(b);
  for (int l : labels) mix(static_cast<std::uint8_t>(l));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset load_raw_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot open dataset " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw ParseError(path.string() + ": bad magic, expected DSET1");
  }
  if (bytes.size() < kHeaderBytes) {
    throw ParseError(path.string() + ": truncated header, expected " +
                     std::to_string(kHeaderBytes) + " bytes, got " +
                     std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data() + 5;
  Dataset d;
  const std::uint64_t n = get_u32(p);
  d.channels = get_u32(p + 4);
  d.height = get_u32(p + 8);
  d.width = get_u32(p + 12);
  d.n_classes = static_cast<int>(get_u32(p + 16));
  const std::uint64_t expected = kHeaderBytes + n * d.image_bytes() + n;
  if (bytes.size() != expected) {
    throw ParseError(path.string() + ": truncated or oversized file, expected " +
                     std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  const auto pix_begin = bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes);
  const auto pix_end = pix_begin + static_cast<std::ptrdiff_t>(n * d.image_bytes());
  d.pixels.assign(pix_begin, pix_end);
  for (auto it = pix_end; it != bytes.end(); ++it) {
    if (*it >= d.n_classes) {
      throw ParseError(path.string() + ": label " + std::to_string(*it) + " at index " +
                       std::to_string(it - pix_end) + " >= n_classes " +
                       std::to_string(d.n_classes));
    }
    d.labels.push_back(*it);
  }
  d.validate();
  return d;
}

void write_raw_binary(const std::filesystem::path& path, const Dataset& data) {
  data.validate();
  if (data.n_classes > 256) throw ValueError("raw binary format stores labels as bytes");
  std::vector<std::uint8_t> out(kMagic, kMagic + 5);
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  put_u32(out, static_cast<std::uint32_t>(data.channels));
  put_u32(out, static_cast<std::uint32_t>(data.height));
  put_u32(out, static_cast<std::uint32_t>(data.width));
  put_u32(out, static_cast<std::uint32_t>(data.n_classes));
  out.insert(out.end(), data.pixels.begin(), data.pixels.end());
  for (int l : data.labels) out.push_back(static_cast<std::uint8_t>(l));
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw ValueError("cannot write " + path.string());
}

Dataset load_png_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ValueError("not a directory: " + root.string());
  std::map<int, std::vector<fs::path>> by_class;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.empty() || !std::all_of(name.begin(), name.end(), ::isdigit)) {
      throw ValueError("class directory '" + name + "' is not a class index");
    }
    auto& files = by_class[std::stoi(name)];
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (f.is_regular_file() && f.path().extension() == ".png") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (by_class.empty()) throw ValueError("no class directories under " + root.string());
  Dataset d;
  d.n_classes = by_class.rbegin()->first + 1;
  for (const auto& [label, files] : by_class) {
    for (const auto& f : files) {
      PngImage img = read_png(f);
      if (d.labels.empty()) {
        d.channels = img.channels;
        d.height = img.height;
        d.width = img.width;
      } else if (img.channels != d.channels || img.height != d.height || img.width != d.width) {
        throw ValueError(f.string() + ": image is " + std::to_string(img.channels) + "x" +
                         std::to_string(img.height) + "x" + std::to_string(img.width) +
                         ", dataset is " + std::to_string(d.channels) + "x" +
                         std::to_string(d.height) + "x" + std::to_string(d.width));
      }
      d.pixels.insert(d.pixels.end(), img.chw.begin(), img.chw.end());
      d.labels.push_back(label);
    }
  }
  d.validate();
  return d;
}

void write_png(const std::filesystem::path& path, std::int64_t channels, std::int64_t height,
               std::int64_t width, std::span<const std::uint8_t> pixels) {
  if (channels != 1 && channels != 3) throw ValueError("write_png: 1 or 3 channels");
  if (pixels.size() != static_cast<std::size_t>(channels * height * width)) {
    throw ShapeError("write_png: pixel count does not match extent");
  }
  PngFile file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  const std::int64_t plane = height * width;
  std::vector<std::uint8_t> hwc(pixels.size());
  for (std::int64_t i = 0; i < plane; ++i) {
    for (std::int64_t c = 0; c < channels; ++c) {
      hwc[static_cast<std::size_t>(i * channels + c)] =
          pixels[static_cast<std::size_t>(c * plane + i)];
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    rows[y] = hwc.data() + y * static_cast<std::size_t>(width * channels);
  }
  try {
    png_init_io(png, file.f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

Dataset make_color_vs_shape(std::uint64_t seed, std::size_t n, std::int64_t size) {
  if (size < 8) throw ValueError("color-vs-shape needs images of at least 8x8");
  Rng rng(seed);
  Dataset d;
  d.channels = 3;
  d.height = size;
  d.width = size;
  d.n_classes = 2;
  d.pixels.resize(n * d.image_bytes());
  const std::int64_t plane = size * size;
  auto jitter = [&](double base, double spread) {
    return std::clamp(base + spread * (2.0 * rng.uniform() - 1.0), 0.0, 255.0);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::uint8_t* img = d.pixels.data() + i * d.image_bytes();
    for (std::int64_t p = 0; p < plane; ++p) {
      const double gray = jitter(128.0, 40.0);
      for (int c = 0; c < 3; ++c) {
        img[c * plane + p] = static_cast<std::uint8_t>(std::lround(jitter(gray, 12.0)));
      }
    }
    const std::array<double, 3> color =
        label == 0 ? std::array<double, 3>{jitter(210, 35), jitter(60, 35), jitter(60, 35)}
                   : std::array<double, 3>{jitter(60, 35), jitter(60, 35), jitter(210, 35)};
    const std::int64_t length = size / 2 + static_cast<std::int64_t>(rng.uniform_int(
                                                static_cast<std::uint64_t>(size / 4 + 1)));
    const std::int64_t thick = 2 + static_cast<std::int64_t>(rng.uniform_int(2));
    const std::int64_t along = static_cast<std::int64_t>(
        rng.uniform_int(static_cast<std::uint64_t>(size - length + 1)));
    const std::int64_t across = static_cast<std::int64_t>(
        rng.uniform_int(static_cast<std::uint64_t>(size - thick + 1)));
    for (std::int64_t a = 0; a < length; ++a) {
      for (std::int64_t t = 0; t < thick; ++t) {
        const std::int64_t y = label == 0 ? across + t : along + a;
        const std::int64_t x = label == 0 ? along + a : across + t;
        for (int c = 0; c < 3; ++c) {
          img[c * plane + y * size + x] = static_cast<std::uint8_t>(std::lround(color[c]));
        }
      }
    }
    d.labels.push_back(label);
  }
  return d;
}

DatasetFormat dataset_format_from_name(const std::string& name) {
  if (name == "raw-binary") return DatasetFormat::kRawBinary;
  if (name == "png-directory") return DatasetFormat::kPngDirectory;
  if (name == "builtin-synthetic") return DatasetFormat::kSynthetic;
  throw ValueError("unknown dataset format '" + name +
                   "' (raw-binary, png-directory, builtin-synthetic)");
}

Dataset load_dataset(const std::string& source, DatasetFormat format, std::uint64_t seed,
                     std::size_t synthetic_n, std::int64_t synthetic_size) {
  switch (format) {
    case DatasetFormat::kRawBinary:
      return load_raw_binary(source);
    case DatasetFormat::kPngDirectory:
      return load_png_directory(source);
    case DatasetFormat::kSynthetic:
      if (source != "color-vs-shape") {
        throw ValueError("unknown synthetic dataset '" + source + "'");
      }
      return make_color_vs_shape(seed, synthetic_n, synthetic_size);
  }
  throw ValueError("unknown dataset format");
}

namespace {

DatasetSplit subset(const Dataset& data, std::vector<std::size_t> rows, SplitId id,
                    const std::string& digest, std::uint64_t seed) {
  DatasetSplit s;
  s.id = id;
  s.source_digest = digest;
  s.seed = seed;
  s.data.channels = data.channels;
  s.data.height = data.height;
  s.data.width = data.width;
  s.data.n_classes = data.n_classes;
  const std::size_t bytes = data.image_bytes();
  for (std::size_t r : rows) {
    const auto begin = data.pixels.begin() + static_cast<std::ptrdiff_t>(r * bytes);
    s.data.pixels.insert(s.data.pixels.end(), begin, begin + static_cast<std::ptrdiff_t>(bytes));
    s.data.labels.push_back(data.labels[r]);
  }
  s.indices = std::move(rows);
  return s;
}

}  // namespace

Splits split(const Dataset& data, double train_fraction, double val_fraction,
             std::uint64_t seed) {
  if (train_fraction < 0 || val_fraction < 0) throw ValueError("split fractions must be >= 0");
  if (train_fraction + val_fraction > 1.0 + 1e-12) {
    throw ValueError("split fractions sum to " + std::to_string(train_fraction + val_fraction) +
                     " > 1");
  }
  data.validate();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.n_classes));
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> train, val, test;
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    const auto n = static_cast<double>(rows.size());
    const auto n_train = static_cast<std::size_t>(std::floor(n * train_fraction + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(n * val_fraction + 1e-9));
    train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    val.insert(val.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train),
               rows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                rows.end());
  }
  for (auto* v : {&train, &val, &test}) std::sort(v->begin(), v->end());
  const std::string digest = data.digest();
  return {subset(data, std::move(train), SplitId::kTrain, digest, seed),
          subset(data, std::move(val), SplitId::kVal, digest, seed),
          subset(data, std::move(test), SplitId::kTest, digest, seed)};
}

DatasetSplit merge(const DatasetSplit& a, const DatasetSplit& b) {
  if (a.data.image_bytes() != b.data.image_bytes() || a.data.n_classes != b.data.n_classes) {
    throw ValueError("merge: splits have different image layouts");
  }
  DatasetSplit out = a;
  out.data.pixels.insert(out.data.pixels.end(), b.data.pixels.begin(), b.data.pixels.end());
  out.data.labels.insert(out.data.labels.end(), b.data.labels.begin(), b.data.labels.end());
  out.indices.insert(out.indices.end(), b.indices.begin(), b.indices.end());
  return out;
}

ByteBatch gather(const Dataset& data, std::span<const std::size_t> rows) {
  ByteBatch b;
  b.n = static_cast<std::int64_t>(rows.size());
  b.channels = data.channels;
  b.height = data.height;
  b.width = data.width;
  const std::size_t bytes = data.image_bytes();
  b.pixels.reserve(rows.size() * bytes);
  for (std::size_t r : rows) {
    if (r >= data.size()) throw ValueError("gather: row " + std::to_string(r) + " out of range");
    const auto begin = data.pixels.begin() + static_cast<std::ptrdiff_t>(r * bytes);
    b.pixels.insert(b.pixels.end(), begin, begin + static_cast<std::ptrdiff_t>(bytes));
    b.labels.push_back(data.labels[r]);
  }
  return b;
}

void PreprocessConfig::validate(std::int64_t channels, std::int64_t height,
                                std::int64_t width) const {
  if (pad < 0) throw ValueError("pad must be >= 0");
  if (hflip_prob < 0.0f || hflip_prob > 1.0f) throw ValueError("hflip_prob must be in [0, 1]");
  const std::int64_t side = crop == 0 ? height : crop;
  if (crop < 0 || side > height + 2 * pad || side > width + 2 * pad) {
    throw ValueError("crop " + std::to_string(side) + " larger than padded image " +
                     std::to_string(height + 2 * pad) + "x" + std::to_string(width + 2 * pad));
  }
  if (mean.size() != static_cast<std::size_t>(channels) ||
      std.size() != static_cast<std::size_t>(channels)) {
    throw ValueError("normalization needs " + std::to_string(channels) + " mean/std values");
  }
  for (float s : std) {
    if (!(s > 0.0f)) throw ValueError("normalization std must be > 0");
  }
  if (cutout_size < 0) throw ValueError("cutout_size must be >= 0");
}

Tensor baseline_preprocess(const ByteBatch& batch, const PreprocessConfig& config, Rng& rng,
                           bool training) {
  config.validate(batch.channels, batch.height, batch.width);
  const std::int64_t H = batch.height, W = batch.width, C = batch.channels;
  const std::int64_t side_h = config.crop == 0 ? H : config.crop;
  const std::int64_t side_w = config.crop == 0 ? W : config.crop;
  Tensor out(Shape{batch.n, C, side_h, side_w});
  for (std::int64_t b = 0; b < batch.n; ++b) {
    // Offsets in padded coordinates.
    std::int64_t oy, ox;
    bool flip = false;
    if (training) {
      const std::int64_t pad = config.pad;
      oy = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(H + 2 * pad - side_h + 1)));
      ox = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(W + 2 * pad - side_w + 1)));
      oy -= pad;
      ox -= pad;
      flip = rng.bernoulli(config.hflip_prob);
    } else {
      oy = (H - side_h) / 2;
      ox = (W - side_w) / 2;
    }
    for (std::int64_t c = 0; c < C; ++c) {
      const std::uint8_t* src = batch.pixels.data() + ((b * C + c) * H) * W;
      float* dst = out.data() + ((b * C + c) * side_h) * side_w;
      for (std::int64_t y = 0; y < side_h; ++y) {
        for (std::int64_t x = 0; x < side_w; ++x) {
          const std::int64_t sy = y + oy;
          const std::int64_t sx = (flip ? side_w - 1 - x : x) + ox;
          const bool inside = sy >= 0 && sy < H && sx >= 0 && sx < W;
          dst[y * side_w + x] = inside ? static_cast<float>(src[sy * W + sx]) / 255.0f : 0.0f;
        }
      }
    }
  }
  return out;
}

Tensor normalize(const Tensor& x, std::span<const float> mean, std::span<const float> std) {
  if (x.rank() != 4 || static_cast<std::size_t>(x.dim(1)) != mean.size() ||
      mean.size() != std.size()) {
    throw ShapeError("normalize: input " + shape_to_string(x.shape()) + " with " +
                     std::to_string(mean.size()) + " channel statistics");
  }
  Tensor out = x;
  const std::int64_t C = x.dim(1), plane = x.dim(2) * x.dim(3);
  for (std::int64_t b = 0; b < x.dim(0); ++b) {
    for (std::int64_t c = 0; c < C; ++c) {
      float* p = out.data() + (b * C + c) * plane;
      for (std::int64_t i = 0; i < plane; ++i) p[i] = (p[i] - mean[c]) / std[c];
    }
  }
  return out;
}

Tensor cutout(const Tensor& x, int size, Rng& rng) {
  if (x.rank() != 4) throw ShapeError("cutout: input " + shape_to_string(x.shape()));
  const std::int64_t H = x.dim(2), W = x.dim(3);
  if (size < 0 || size > std::min(H, W)) {
    throw ValueError("cutout size " + std::to_string(size) + " outside [0, " +
                     std::to_string(std::min(H, W)) + "]");
  }
  if (size == 0) return x;
  Tensor out = x;
  const std::int64_t C = x.dim(1);
  for (std::int64_t b = 0; b < x.dim(0); ++b) {
    const auto cy = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(H)));
    const auto cx = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(W)));
    const std::int64_t y0 = std::max<std::int64_t>(0, cy - size / 2);
    const std::int64_t y1 = std::min<std::int64_t>(H, cy - size / 2 + size);
    const std::int64_t x0 = std::max<std::int64_t>(0, cx - size / 2);
    const std::int64_t x1 = std::min<std::int64_t>(W, cx - size / 2 + size);
    for (std::int64_t c = 0; c < C; ++c) {
      float* p = out.data() + ((b * C + c) * H) * W;
      for (std::int64_t y = y0; y < y1; ++y) {
        for (std::int64_t xx = x0; xx < x1; ++xx) p[y * W + xx] = 0.0f;
      }
    }
  }
  return out;
}

}  // namespace augnas
