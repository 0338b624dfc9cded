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
#ifndef RGCF_AGGREGATORS_HPP
#define RGCF_AGGREGATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgcf/core_types.hpp"

namespace rgcf {

enum class AggregatorKind { Mean, Krum, CoordMedian, TrimmedMean, Bulyan };

inline const char* to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::Mean: return "mean";
    case AggregatorKind::Krum: return "krum";
    case AggregatorKind::CoordMedian: return "median";
    case AggregatorKind::TrimmedMean: return "trimmed_mean";
    case AggregatorKind::Bulyan: return "bulyan";
  }
  return "unknown";
}

inline std::optional<AggregatorKind> parse_aggregator_kind(std::string_view name) {
  for (AggregatorKind kind : {AggregatorKind::Mean, AggregatorKind::Krum, AggregatorKind::CoordMedian,
                              AggregatorKind::TrimmedMean, AggregatorKind::Bulyan}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

/// Krum scores sum squared distances by default; Plain sums the norms
/// themselves.
enum class KrumDistance { Squared, Plain };

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::Mean;
  std::size_t f_count = 0;
  KrumDistance distance = KrumDistance::Squared;

  friend bool operator==(const AggregatorSpec&, const AggregatorSpec&) = default;
};

/// Largest f_count the rule accepts with n inputs, or nullopt if none does.
inline std::optional<std::size_t> max_f_count(AggregatorKind kind, std::size_t n) {
  switch (kind) {
    case AggregatorKind::Mean:
    case AggregatorKind::CoordMedian:
      return n == 0 ? std::nullopt : std::optional<std::size_t>(n);
    case AggregatorKind::Krum:
      return n < 3 ? std::nullopt : std::optional<std::size_t>(n - 3);
    case AggregatorKind::TrimmedMean:
      return n == 0 ? std::nullopt : std::optional<std::size_t>((n - 1) / 2);
    case AggregatorKind::Bulyan:
      return n < 3 ? std::nullopt : std::optional<std::size_t>((n - 3) / 4);
  }
  return std::nullopt;
}

inline void check_preconditions(const AggregatorSpec& spec, std::size_t n) {
  const auto limit = max_f_count(spec.kind, n);
  if (!limit || spec.f_count > *limit) {
    std::string need;
    switch (spec.kind) {
      case AggregatorKind::Krum: need = "n >= f + 3"; break;
      case AggregatorKind::TrimmedMean: need = "n - 2f >= 1"; break;
      case AggregatorKind::Bulyan: need = "n >= 4f + 3"; break;
      default: need = "n >= 1"; break;
    }
    throw Error(ErrorKind::TooFewWorkers, std::string(to_string(spec.kind)) + " requires " + need + " (n=" +
                                              std::to_string(n) + ", f=" + std::to_string(spec.f_count) + ")");
  }
}

namespace detail {

inline std::size_t check_inputs(std::span<const ParamVector> grads) {
  if (grads.empty()) throw Error(ErrorKind::EmptyInput, "no gradients to aggregate");
  const std::size_t d = grads.front().size();
  for (const auto& g : grads) check_same_length(g.size(), d, "aggregation input");
  return d;
}

// Score of every vector in `pool`: sum over its `neighbors` nearest others.
inline std::vector<double> krum_scores(std::span<const ParamVector* const> pool, std::size_t neighbors,
                                       KrumDistance distance) {
  const std::size_t n = pool.size();
  const std::size_t d = pool.front()->size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = squared_distance(pool[i]->data(), pool[j]->data(), d);
      if (distance == KrumDistance::Plain) sq = std::sqrt(sq);
      dist[i * n + j] = sq;
      dist[j * n + i] = sq;
    }
  }
  std::vector<double> scores(n);
  std::vector<double> others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i * n + j]);
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(neighbors), others.end());
    double s = 0.0;
    for (std::size_t k = 0; k < neighbors; ++k) s += others[k];
    scores[i] = s;
  }
  return scores;
}

inline std::size_t argmin_lowest(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

}  // namespace detail

inline ParamVector agg_mean(std::span<const ParamVector> grads) {
  const std::size_t d = detail::check_inputs(grads);
  std::vector<double> out(d, 0.0);
  for (const auto& g : grads) {
    for (std::size_t j = 0; j < d; ++j) out[j] += g[j];
  }
  const double n = static_cast<double>(grads.size());
  for (double& x : out) x /= n;
  return ParamVector(std::move(out));
}

struct KrumResult {
  std::size_t index;
  ParamVector vector;
};

/// Input with the smallest sum of distances to its n - f - 2 nearest
/// other inputs; ties go to the lowest index.
inline KrumResult agg_krum(std::span<const ParamVector> grads, std::size_t f_count,
                           KrumDistance distance = KrumDistance::Squared) {
  detail::check_inputs(grads);
  check_preconditions({AggregatorKind::Krum, f_count, distance}, grads.size());
  std::vector<const ParamVector*> pool;
  for (const auto& g : grads) pool.push_back(&g);
  const auto scores = detail::krum_scores(pool, grads.size() - f_count - 2, distance);
  const std::size_t best = detail::argmin_lowest(scores);
  return {best, grads[best]};
}

/// Per-coordinate median; even counts average the two middle values.
inline ParamVector agg_coord_median(std::span<const ParamVector> grads) {
  const std::size_t d = detail::check_inputs(grads);
  const std::size_t n = grads.size();
  std::vector<double> out(d);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = grads[i][j];
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(column.begin(), mid, column.end());
    if (n % 2 == 1) {
      out[j] = *mid;
    } else {
      const double upper = *mid;
      const double lower = *std::max_element(column.begin(), mid);
      out[j] = 0.5 * (lower + upper);
    }
  }
  return ParamVector(std::move(out));
}

/// Per-coordinate mean after dropping the f largest and f smallest values.
inline ParamVector agg_trimmed_mean(std::span<const ParamVector> grads, std::size_t f_count) {
  const std::size_t d = detail::check_inputs(grads);
  check_preconditions({AggregatorKind::TrimmedMean, f_count}, grads.size());
  if (f_count == 0) return agg_mean(grads);
  const std::size_t n = grads.size();
  const std::size_t kept = n - 2 * f_count;
  std::vector<double> out(d);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = grads[i][j];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (std::size_t k = f_count; k < f_count + kept; ++k) s += column[k];
    out[j] = s / static_cast<double>(kept);
  }
  return ParamVector(std::move(out));
}

/// Two stages. Selection: repeatedly take the Krum winner out of the
/// remaining pool until theta = n - 2f vectors are chosen; inside the pool
/// the neighbour count is clamped to [1, pool - 1] once pool - f - 2 drops
/// below one. Coordinate stage: the mean of the beta = theta - 2f selected
/// values closest to the coordinate median (ties: smaller value first).
inline ParamVector agg_bulyan(std::span<const ParamVector> grads, std::size_t f_count,
                              KrumDistance distance = KrumDistance::Squared) {
  const std::size_t d = detail::check_inputs(grads);
  check_preconditions({AggregatorKind::Bulyan, f_count, distance}, grads.size());
  const std::size_t n = grads.size();
  const std::size_t theta = n - 2 * f_count;
  const std::size_t beta = theta - 2 * f_count;

  std::vector<const ParamVector*> pool;
  for (const auto& g : grads) pool.push_back(&g);
  std::vector<const ParamVector*> selected;
  while (selected.size() < theta) {
    std::size_t pick = 0;
    if (pool.size() > 1) {
      const std::size_t m = pool.size();
      const std::size_t neighbors = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(m) -
                                                                   static_cast<std::ptrdiff_t>(f_count) - 2,
                                                               1, static_cast<std::ptrdiff_t>(m) - 1);
      pick = detail::argmin_lowest(detail::krum_scores(pool, neighbors, distance));
    }
    selected.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::vector<double> out(d);
  std::vector<double> column(theta);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < theta; ++i) column[i] = (*selected[i])[j];
    std::sort(column.begin(), column.end());
    const double median = theta % 2 == 1 ? column[theta / 2] : 0.5 * (column[theta / 2 - 1] + column[theta / 2]);
    // The beta closest values form a contiguous window of the sorted column.
    std::size_t lo = 0;
    double best = 0.0;
    for (std::size_t start = 0; start + beta <= theta; ++start) {
      const double spread = std::max(median - column[start], column[start + beta - 1] - median);
      if (start == 0 || spread < best) {
        best = spread;
        lo = start;
      }
    }
    double s = 0.0;
    for (std::size_t k = lo; k < lo + beta; ++k) s += column[k];
    out[j] = s / static_cast<double>(beta);
  }
  return ParamVector(std::move(out));
}

struct AggregateResult {
  ParamVector vector;
  std::optional<std::size_t> selected;  // Krum only
};

inline AggregateResult aggregate(const AggregatorSpec& spec, std::span<const ParamVector> grads) {
  switch (spec.kind) {
    case AggregatorKind::Mean: return {agg_mean(grads), std::nullopt};
    case AggregatorKind::Krum: {
      auto r = agg_krum(grads, spec.f_count, spec.distance);
      return {std::move(r.vector), r.index};
    }
    case AggregatorKind::CoordMedian: return {agg_coord_median(grads), std::nullopt};
    case AggregatorKind::TrimmedMean: return {agg_trimmed_mean(grads, spec.f_count), std::nullopt};
    case AggregatorKind::Bulyan: return {agg_bulyan(grads, spec.f_count, spec.distance), std::nullopt};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown aggregator");
}

}  // namespace rgcf

#endif  // RGCF_AGGREGATORS_HPP
