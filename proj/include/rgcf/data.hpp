/*
 * Copyright 2026 The RGCF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef RGCF_DATA_HPP
#define RGCF_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include "rgcf/core_types.hpp"
#include "rgcf/models.hpp"

namespace rgcf {

/// N x in_dim row-major inputs with labels in [0, classes).
struct Dataset {
  std::size_t in_dim = 0;
  std::size_t classes = 0;
  std::vector<double> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  const double* row(std::size_t i) const noexcept { return inputs.data() + i * in_dim; }

  void validate() const {
    if (size() == 0) throw Error(ErrorKind::EmptyInput, "dataset has no examples");
    if (inputs.size() != size() * in_dim) throw Error(ErrorKind::ShapeMismatch, "dataset input matrix has wrong size");
    for (std::size_t y : labels) {
      if (y >= classes) throw Error(ErrorKind::ShapeMismatch, "dataset label out of range");
    }
    assert_finite(inputs);
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{in_dim, classes, {}, {}};
    out.inputs.reserve(indices.size() * in_dim);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
      out.inputs.insert(out.inputs.end(), row(i), row(i) + in_dim);
      out.labels.push_back(labels[i]);
    }
    return out;
  }

  /// The whole dataset as one batch.
  LabeledBatch as_batch() const { return {in_dim, inputs, labels}; }
};

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                               const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw Error(ErrorKind::TruncatedFile, path.string() + ": header cut short");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                         static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image/label pair (big-endian, unsigned bytes). Pixels are
/// scaled to [0, 1]; classes is one more than the largest label.
inline Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto images = detail::read_file(images_path);
  const auto labels = detail::read_file(labels_path);

  if (detail::read_be32(images, 0, images_path) != kIdxImageMagic) {
    throw Error(ErrorKind::BadMagic, images_path.string() + " is not an IDX image file");
  }
  if (detail::read_be32(labels, 0, labels_path) != kIdxLabelMagic) {
    throw Error(ErrorKind::BadMagic, labels_path.string() + " is not an IDX label file");
  }
  const std::size_t count = detail::read_be32(images, 4, images_path);
  const std::size_t rows = detail::read_be32(images, 8, images_path);
  const std::size_t cols = detail::read_be32(images, 12, images_path);
  const std::size_t label_count = detail::read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw Error(ErrorKind::CountMismatch,
                std::to_string(count) + " images vs " + std::to_string(label_count) + " labels");
  }
  const std::size_t in_dim = rows * cols;
  if (images.size() < 16 + count * in_dim) throw Error(ErrorKind::TruncatedFile, images_path.string());
  if (labels.size() < 8 + count) throw Error(ErrorKind::TruncatedFile, labels_path.string());
  if (count == 0 || in_dim == 0) throw Error(ErrorKind::EmptyInput, "IDX files contain no examples");

  Dataset data;
  data.in_dim = in_dim;
  data.inputs.resize(count * in_dim);
  for (std::size_t k = 0; k < count * in_dim; ++k) data.inputs[k] = images[16 + k] / 255.0;
  data.labels.resize(count);
  std::size_t top = 0;
  for (std::size_t k = 0; k < count; ++k) {
    data.labels[k] = labels[8 + k];
    top = std::max(top, data.labels[k]);
  }
  data.classes = std::max<std::size_t>(top + 1, 2);
  return data;
}

/// Inverse of load_idx for datasets whose inputs are multiples of 1/255.
/// Images are written as rows x cols with rows = 1 unless in_dim is square.
inline void write_idx(const Dataset& data, const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path) {
  std::size_t rows = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(data.in_dim))));
  if (rows * rows != data.in_dim) rows = 1;
  const std::size_t cols = data.in_dim / rows;

  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorKind::Io, "cannot create IDX output files");
  detail::write_be32(img, kIdxImageMagic);
  detail::write_be32(img, static_cast<std::uint32_t>(data.size()));
  detail::write_be32(img, static_cast<std::uint32_t>(rows));
  detail::write_be32(img, static_cast<std::uint32_t>(cols));
  for (double x : data.inputs) {
    img.put(static_cast<char>(std::clamp<long>(std::lround(x * 255.0), 0, 255)));
  }
  detail::write_be32(lab, kIdxLabelMagic);
  detail::write_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (std::size_t y : data.labels) lab.put(static_cast<char>(y));
}

/// Class c is N(separation * e_c, I) in in_dim dimensions; requires
/// in_dim >= classes. Examples are interleaved by class.
inline Dataset synth_gaussian_blobs(std::size_t classes, std::size_t per_class, std::size_t in_dim,
                                    double separation, RngStream& rng) {
  if (classes < 2 || per_class == 0 || in_dim < classes) {
    throw Error(ErrorKind::InvalidArgument, "blobs need classes >= 2, per_class >= 1 and in_dim >= classes");
  }
  if (!std::isfinite(separation) || separation < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "blob separation must be finite and non-negative");
  }
  Dataset data;
  data.in_dim = in_dim;
  data.classes = classes;
  data.inputs.reserve(classes * per_class * in_dim);
  data.labels.reserve(classes * per_class);
  for (std::size_t k = 0; k < per_class; ++k) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j < in_dim; ++j) data.inputs.push_back(rng.normal() + (j == c ? separation : 0.0));
      data.labels.push_back(c);
    }
  }
  return data;
}

/// Disjoint random partition of [0, total) into n index lists; sizes
/// differ by at most one with the larger shards first.
inline std::vector<std::vector<std::size_t>> shard_indices(std::size_t total, std::size_t n, RngStream& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "need at least one shard");
  if (n > total) {
    throw Error(ErrorKind::TooManyShards,
                std::to_string(n) + " shards requested for " + std::to_string(total) + " examples");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);

  std::vector<std::vector<std::size_t>> shards(n);
  const std::size_t base = total / n;
  const std::size_t extra = total % n;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    shards[s].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return shards;
}

inline std::vector<Dataset> shard(const Dataset& data, std::size_t n, RngStream& rng) {
  std::vector<Dataset> out;
  for (const auto& indices : shard_indices(data.size(), n, rng)) out.push_back(data.subset(indices));
  return out;
}

/// `size` examples drawn uniformly with replacement.
inline LabeledBatch sample_minibatch(const Dataset& shard, std::size_t size, RngStream& rng) {
  if (shard.size() == 0) throw Error(ErrorKind::EmptyShard, "cannot sample from an empty shard");
  if (size == 0) throw Error(ErrorKind::InvalidArgument, "mini-batch size must be >= 1");
  LabeledBatch batch{shard.in_dim, {}, {}};
  batch.inputs.reserve(size * shard.in_dim);
  batch.labels.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t i = rng.uniform_index(shard.size());
    batch.inputs.insert(batch.inputs.end(), shard.row(i), shard.row(i) + shard.in_dim);
    batch.labels.push_back(shard.labels[i]);
  }
  return batch;
}

}  // namespace rgcf

#endif  // RGCF_DATA_HPP
