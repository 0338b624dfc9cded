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
#ifndef RGCF_FILTER_IO_HPP
#define RGCF_FILTER_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rgcf/filter.hpp"

// Filter file layout, all integers and floats little-endian:
//
//   "RGCF"            4 bytes magic
//   version           u32 (currently 1)
//   d                 u64 gradient length
//   layer_count       u32 (4)
//   layer sizes       u64 x layer_count: d + 1, 64, 32, 1
//   threshold         f64
//   flags             u32, bit 0 = unit-norm gradient input
//   param_count       u64
//   params            f64 x param_count, canonical flattening order
//
// Optimizer state is not stored.
namespace rgcf {

inline constexpr char kFilterMagic[4] = {'R', 'G', 'C', 'F'};
inline constexpr std::uint32_t kFilterFormatVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <class U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::TruncatedFile, "filter file ends early");
  }
  template <class U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(U{bytes_[pos_ + i]} << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  bool raw_equals(const char* expected, std::size_t n) {
    need(n);
    const bool same = std::memcmp(bytes_.data() + pos_, expected, n) == 0;
    pos_ += n;
    return same;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> serialize_filter(const FilterNet& filter) {
  detail::ByteWriter w;
  w.raw(kFilterMagic, 4);
  w.le<std::uint32_t>(kFilterFormatVersion);
  w.le<std::uint64_t>(filter.d);
  const auto sizes = filter.layer_sizes();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(sizes.size()));
  for (std::size_t s : sizes) w.le<std::uint64_t>(s);
  w.f64(filter.threshold);
  w.le<std::uint32_t>(filter.unit_norm_input ? 1u : 0u);
  w.le<std::uint64_t>(filter.params.size());
  for (double x : filter.params) w.f64(x);
  return w.take();
}

inline FilterNet deserialize_filter(const std::vector<unsigned char>& bytes) {
  detail::ByteReader r(bytes);
  if (!r.raw_equals(kFilterMagic, 4)) throw Error(ErrorKind::BadMagic, "not an RGCF filter file");
  const auto version = r.le<std::uint32_t>();
  if (version != kFilterFormatVersion) {
    throw Error(ErrorKind::InvalidArgument, "unsupported filter format version " + std::to_string(version));
  }
  const auto d = r.le<std::uint64_t>();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "filter file declares d = 0");
  FilterNet filter = FilterNet::zeros(d);
  const auto layer_count = r.le<std::uint32_t>();
  const auto expected = filter.layer_sizes();
  if (layer_count != expected.size()) throw Error(ErrorKind::ShapeMismatch, "unexpected filter layer count");
  for (std::size_t s : expected) {
    if (r.le<std::uint64_t>() != s) throw Error(ErrorKind::ShapeMismatch, "unexpected filter layer size");
  }
  filter.threshold = r.f64();
  filter.unit_norm_input = (r.le<std::uint32_t>() & 1u) != 0;
  const auto count = r.le<std::uint64_t>();
  if (count != filter.params.size()) throw Error(ErrorKind::ShapeMismatch, "filter parameter count mismatch");
  std::vector<double> params(count);
  for (double& x : params) x = r.f64();
  if (!r.at_end()) throw Error(ErrorKind::InvalidArgument, "trailing bytes after filter parameters");
  filter.params = ParamVector(std::move(params));
  return filter;
}

inline void save_filter(const FilterNet& filter, const std::filesystem::path& path) {
  const auto bytes = serialize_filter(filter);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

inline FilterNet load_filter(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_filter(bytes);
}

}  // namespace rgcf

#endif  // RGCF_FILTER_IO_HPP
