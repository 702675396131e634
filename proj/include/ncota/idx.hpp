#pragma once

// IDX (MNIST / Fashion-MNIST) ingestion and the 7x7 + bias featurization.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ncota/objective.hpp"
#include "ncota/rng.hpp"

namespace ncota {

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace detail {

inline std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed, const std::string& what) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw IdxError(what + ": cannot initialise zlib");
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IdxError(what + ": corrupt gzip stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw IdxError(what + ": truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace detail

/// File contents, transparently inflated when the file starts with the gzip magic 1F 8B.
inline std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B) return detail::gunzip(bytes, path.string());
  return bytes;
}

struct IdxImages {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major

  std::size_t count() const { return rows * cols == 0 ? 0 : pixels.size() / (rows * cols); }
  std::span<const std::uint8_t> image(std::size_t k) const {
    return std::span<const std::uint8_t>(pixels).subspan(k * rows * cols, rows * cols);
  }
};

inline IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes, const std::string& what = "images") {
  if (bytes.size() < 16) throw IdxError(what + ": truncated header");
  if (detail::read_be32(bytes, 0) != kIdxImagesMagic) throw IdxError(what + ": bad magic number");
  const std::size_t count = detail::read_be32(bytes, 4);
  IdxImages out{detail::read_be32(bytes, 8), detail::read_be32(bytes, 12), {}};
  const std::size_t need = count * out.rows * out.cols;
  if (bytes.size() - 16 < need) throw IdxError(what + ": truncated pixel data");
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return out;
}

inline std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes,
                                                  const std::string& what = "labels") {
  if (bytes.size() < 8) throw IdxError(what + ": truncated header");
  if (detail::read_be32(bytes, 0) != kIdxLabelsMagic) throw IdxError(what + ": bad magic number");
  const std::size_t count = detail::read_be32(bytes, 4);
  if (bytes.size() - 8 < count) throw IdxError(what + ": truncated label data");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

/// 28x28 bytes -> 4x4 mean-pooled 7x7 in [0, 1], bias 1 appended, unit norm.
inline Vector featurize(std::span<const std::uint8_t> image, std::size_t rows, std::size_t cols) {
  constexpr std::size_t kPool = 4;
  if (rows % kPool != 0 || cols % kPool != 0) throw IdxError("image size is not a multiple of the pooling block");
  const std::size_t out_rows = rows / kPool;
  const std::size_t out_cols = cols / kPool;
  Vector f(out_rows * out_cols + 1, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      f[(r / kPool) * out_cols + c / kPool] += image[r * cols + c] / 255.0;
    }
  }
  for (std::size_t k = 0; k + 1 < f.size(); ++k) f[k] /= static_cast<double>(kPool * kPool);
  f.back() = 1.0;
  normalize_in_place(f);
  return f;
}

inline std::vector<Feature> ingest_fashion_mnist(const std::filesystem::path& images_path,
                                                 const std::filesystem::path& labels_path) {
  const IdxImages images = parse_idx_images(read_maybe_gzip(images_path), images_path.string());
  const std::vector<std::uint8_t> labels = parse_idx_labels(read_maybe_gzip(labels_path), labels_path.string());
  if (images.count() != labels.size()) {
    throw IdxError("image/label count mismatch: " + std::to_string(images.count()) + " images, " +
                   std::to_string(labels.size()) + " labels");
  }
  std::vector<Feature> out;
  out.reserve(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    out.push_back({featurize(images.image(k), images.rows, images.cols), labels[k]});
  }
  return out;
}

/// Seeded per-class shuffle, then `take` items per class (in shuffled order).
inline std::vector<std::vector<std::size_t>> shuffled_class_indices(std::span<const Feature> features,
                                                                    std::size_t classes, Stream& stream) {
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].label >= classes) throw IdxError("label out of range");
    by_class[features[k].label].push_back(k);
  }
  for (auto& idx : by_class) {
    for (std::size_t k = idx.size(); k > 1; --k) std::swap(idx[k - 1], idx[stream.below(k)]);
  }
  return by_class;
}

/// Node i receives `per_node` distinct samples of class i mod C.
inline std::vector<LocalDataset> assign_by_class(std::span<const Feature> features, std::size_t classes,
                                                 std::size_t nodes, std::size_t per_node, Stream& stream) {
  if (nodes % classes != 0) throw std::invalid_argument("node count must be a multiple of the class count");
  const auto by_class = shuffled_class_indices(features, classes, stream);
  std::vector<LocalDataset> out(nodes);
  std::vector<std::size_t> cursor(classes, 0);
  for (std::size_t i = 0; i < nodes; ++i) {
    const std::size_t label = i % classes;
    out[i].owner_label = label;
    for (std::size_t s = 0; s < per_node; ++s) {
      if (cursor[label] >= by_class[label].size()) {
        throw IdxError("not enough samples of class " + std::to_string(label));
      }
      out[i].samples.push_back(features[by_class[label][cursor[label]++]]);
    }
  }
  return out;
}

/// Balanced held-out set: `per_class` samples of each class in shuffled order.
inline std::vector<Feature> balanced_subset(std::span<const Feature> features, std::size_t classes,
                                            std::size_t per_class, Stream& stream) {
  const auto by_class = shuffled_class_indices(features, classes, stream);
  std::vector<Feature> out;
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].size() < per_class) throw IdxError("not enough test samples of class " + std::to_string(c));
    for (std::size_t s = 0; s < per_class; ++s) out.push_back(features[by_class[c][s]]);
  }
  return out;
}

}  // namespace ncota
