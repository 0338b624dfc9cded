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
#ifndef RGCF_CORE_TYPES_HPP
#define RGCF_CORE_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rgcf {

enum class ErrorKind {
  NonFiniteValue,
  LengthMismatch,
  ShapeMismatch,
  EmptyInput,
  TooFewWorkers,
  DimensionMismatch,
  BadMagic,
  TruncatedFile,
  CountMismatch,
  TooManyShards,
  EmptyShard,
  InvalidArgument,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewWorkers: return "TooFewWorkers";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::TooManyShards: return "TooManyShards";
    case ErrorKind::EmptyShard: return "EmptyShard";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `index()` is set for
/// NonFiniteValue and names the first offending coordinate.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

inline void assert_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::NonFiniteValue,
                  "entry " + std::to_string(i) + " is not finite", i);
    }
  }
}

/// Flat parameter or gradient vector. Finite and non-empty on
/// construction; the length never changes afterwards.
class ParamVector {
 public:
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(ErrorKind::InvalidArgument, "parameter vector must have length >= 1");
    }
    assert_finite(values_);
  }

  static ParamVector zeros(std::size_t d) { return ParamVector(std::vector<double>(d, 0.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const double* data() const noexcept { return values_.data(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  /// Copy of the underlying storage for callers building a new vector.
  std::vector<double> to_vector() const { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

inline void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

namespace detail {

// Four independent accumulators; the summation order is fixed so results
// are reproducible for a given build.
inline double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double di = a[i] - b[i];
    s0 += di * di;
  }
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

inline double l2_distance(const ParamVector& a, const ParamVector& b) {
  check_same_length(a.size(), b.size(), "l2_distance");
  return std::sqrt(detail::squared_distance(a.data(), b.data(), a.size()));
}

inline double l2_norm(std::span<const double> v) { return std::sqrt(detail::dot(v.data(), v.data(), v.size())); }

enum class AttackKind { RandomGaussian, InverseScaled, AllOnes, GradientShift };

/// Ground truth about who produced a gradient. Never visible to the filter.
struct Provenance {
  std::optional<AttackKind> attack;

  static Provenance honest() { return {}; }
  static Provenance byzantine(AttackKind kind) { return {kind}; }
  bool is_byzantine() const noexcept { return attack.has_value(); }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct GradientReport {
  ParamVector gradient;
  double loss;
  Provenance provenance;

  GradientReport(ParamVector g, double l, Provenance p = Provenance::honest())
      : gradient(std::move(g)), loss(l), provenance(p) {
    if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteValue, "report loss is not finite");
    if (loss < 0.0) throw Error(ErrorKind::InvalidArgument, "report loss must be non-negative");
  }

  friend bool operator==(const GradientReport&, const GradientReport&) = default;
};

/// Counter-based generator. Output i of stream (seed, stream_id) is a pure
/// function of those three integers, so streams never interfere and
/// adding a worker leaves every other stream untouched.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), key_(mix64(seed)), stream_key_(mix64(stream_id + kStreamSalt)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t x = key_ + counter_++ * kGolden;
    return mix64(mix64(x) ^ stream_key_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (rejection on the low range).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "uniform_index over an empty range");
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; consumes exactly two outputs.
  double normal() noexcept {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Child stream with an id derived from this stream's id and `child`.
  RngStream split(std::uint64_t child) const { return RngStream(seed_, mix64(stream_id_ ^ mix64(child + kGolden))); }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t stream_key_;
  std::uint64_t counter_ = 0;
};

/// Stream ids carved out of one experiment seed.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kValidation = 2;
inline constexpr std::uint64_t kLocalData = 3;
inline constexpr std::uint64_t kShard = 4;
inline constexpr std::uint64_t kServerInit = 5;
inline constexpr std::uint64_t kWorkerSelect = 6;
inline constexpr std::uint64_t kByzantineSet = 7;
inline constexpr std::uint64_t kFilterInit = 8;
inline constexpr std::uint64_t kFilterTrainer = 9;
inline constexpr std::uint64_t kBench = 10;
inline constexpr std::uint64_t kWorkerBatchBase = 1'000'000;
inline constexpr std::uint64_t kWorkerAttackBase = 2'000'000;
}  // namespace streams

}  // namespace rgcf

#endif  // RGCF_CORE_TYPES_HPP
