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
#ifndef RGCF_TESTS_ORACLES_HPP
#define RGCF_TESTS_ORACLES_HPP

// Straightforward reference implementations, written without reusing any
// library helper, for checking the optimised code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "rgcf/rgcf.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline double sqdist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

inline double krum_score(const std::vector<Vec>& pool, std::size_t i, std::size_t neighbors, bool squared) {
  std::vector<double> d;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (j != i) d.push_back(squared ? sqdist(pool[i], pool[j]) : std::sqrt(sqdist(pool[i], pool[j])));
  }
  std::sort(d.begin(), d.end());
  double s = 0.0;
  for (std::size_t k = 0; k < neighbors; ++k) s += d[k];
  return s;
}

inline std::size_t krum_index(const std::vector<Vec>& pool, std::size_t neighbors, bool squared = true) {
  std::size_t best = 0;
  double best_score = krum_score(pool, 0, neighbors, squared);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double s = krum_score(pool, i, neighbors, squared);
    if (s < best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

inline Vec column(const std::vector<Vec>& xs, std::size_t j) {
  Vec c;
  for (const auto& x : xs) c.push_back(x[j]);
  return c;
}

inline double median(Vec c) {
  std::sort(c.begin(), c.end());
  const std::size_t n = c.size();
  return n % 2 ? c[n / 2] : 0.5 * (c[n / 2 - 1] + c[n / 2]);
}

inline Vec mean(const std::vector<Vec>& xs) {
  Vec out(xs[0].size(), 0.0);
  for (const auto& x : xs)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[j];
  for (double& v : out) v /= static_cast<double>(xs.size());
  return out;
}

inline Vec coord_median(const std::vector<Vec>& xs) {
  Vec out;
  for (std::size_t j = 0; j < xs[0].size(); ++j) out.push_back(median(column(xs, j)));
  return out;
}

inline Vec trimmed_mean(const std::vector<Vec>& xs, std::size_t f) {
  Vec out;
  for (std::size_t j = 0; j < xs[0].size(); ++j) {
    Vec c = column(xs, j);
    std::sort(c.begin(), c.end());
    double s = 0.0;
    for (std::size_t k = f; k + f < c.size(); ++k) s += c[k];
    out.push_back(s / static_cast<double>(c.size() - 2 * f));
  }
  return out;
}

/// Bulyan: repeated Krum selection of n - 2f inputs (neighbour count
/// clamped to [1, pool - 1]), then per coordinate the mean of the
/// n - 4f selected values nearest the median, smaller value first on ties.
inline Vec bulyan(std::vector<Vec> pool, std::size_t f) {
  const std::size_t n = pool.size();
  const std::size_t theta = n - 2 * f;
  const std::size_t beta = theta - 2 * f;
  std::vector<Vec> selected;
  while (selected.size() < theta) {
    std::size_t pick = 0;
    if (pool.size() > 1) {
      const long m = static_cast<long>(pool.size());
      const long nb = std::clamp(m - static_cast<long>(f) - 2, 1L, m - 1);
      pick = krum_index(pool, static_cast<std::size_t>(nb));
    }
    selected.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<long>(pick));
  }
  Vec out;
  for (std::size_t j = 0; j < selected[0].size(); ++j) {
    const Vec c = column(selected, j);
    const double med = median(c);
    std::vector<std::pair<double, double>> keyed;
    for (double v : c) keyed.push_back({std::abs(v - med), v});
    std::sort(keyed.begin(), keyed.end());
    double s = 0.0;
    for (std::size_t k = 0; k < beta; ++k) s += keyed[k].second;
    out.push_back(s / static_cast<double>(beta));
  }
  return out;
}

inline std::vector<Vec> to_vecs(const std::vector<rgcf::ParamVector>& xs) {
  std::vector<Vec> out;
  for (const auto& x : xs) out.push_back(x.to_vector());
  return out;
}

/// max_j |a_j - b_j| / max(max_j |a_j|, max_j |b_j|).
inline double max_relative_error(const Vec& a, const Vec& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    diff = std::max(diff, std::abs(a[j] - b[j]));
    scale = std::max({scale, std::abs(a[j]), std::abs(b[j])});
  }
  return scale == 0.0 ? diff : diff / scale;
}

/// Random labelled batch for an architecture.
inline rgcf::LabeledBatch random_batch(const rgcf::Architecture& arch, std::size_t size, rgcf::RngStream& rng) {
  rgcf::LabeledBatch b{arch.in_dim, {}, {}};
  for (std::size_t i = 0; i < size * arch.in_dim; ++i) b.inputs.push_back(rng.normal());
  for (std::size_t i = 0; i < size; ++i) b.labels.push_back(static_cast<std::size_t>(rng.uniform_index(arch.classes)));
  return b;
}

inline std::vector<rgcf::ParamVector> random_grads(std::size_t n, std::size_t d, rgcf::RngStream& rng) {
  std::vector<rgcf::ParamVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec v(d);
    for (double& x : v) x = rng.normal();
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace oracle

#endif  // RGCF_TESTS_ORACLES_HPP
