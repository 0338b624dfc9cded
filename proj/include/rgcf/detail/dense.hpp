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
#ifndef RGCF_DETAIL_DENSE_HPP
#define RGCF_DETAIL_DENSE_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rgcf/core_types.hpp"

// Fully-connected ReLU stack over a flat parameter vector, shared by the
// server model and the filter. Canonical layout, layer by layer: the
// weight matrix (out x in, row-major) followed by the bias (out).
namespace rgcf::detail {

inline std::size_t dense_param_count(std::span<const std::size_t> sizes) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return count;
}

struct DenseActivations {
  std::size_t batch = 0;
  // layers[0] is the input, layers.back() the linear output (logits);
  // the ones in between are post-ReLU.
  std::vector<std::vector<double>> layers;
};

inline DenseActivations dense_forward(std::span<const std::size_t> sizes, std::span<const double> params,
                                      std::span<const double> inputs, std::size_t batch) {
  DenseActivations acts;
  acts.batch = batch;
  acts.layers.reserve(sizes.size());
  acts.layers.emplace_back(inputs.begin(), inputs.end());

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double* weights = params.data() + offset;
    const double* bias = weights + out * in;
    offset += out * in + out;

    const std::vector<double>& prev = acts.layers.back();
    std::vector<double> next(batch * out);
    const bool hidden = l + 2 < sizes.size();
    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = prev.data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double z = bias[o] + dot(weights + o * in, x, in);
        next[b * out + o] = hidden ? std::max(z, 0.0) : z;
      }
    }
    acts.layers.push_back(std::move(next));
  }
  return acts;
}

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logits).
inline void dense_backward(std::span<const std::size_t> sizes, std::span<const double> params,
                           const DenseActivations& acts, std::vector<double> delta, std::span<double> grad) {
  const std::size_t batch = acts.batch;
  std::size_t offset = dense_param_count(sizes);
  for (std::size_t l = sizes.size() - 1; l-- > 0;) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    offset -= out * in + out;
    const double* weights = params.data() + offset;
    double* gw = grad.data() + offset;
    double* gb = gw + out * in;
    const std::vector<double>& prev = acts.layers[l];

    for (std::size_t b = 0; b < batch; ++b) {
      const double* x = prev.data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = delta[b * out + o];
        if (g == 0.0) continue;
        gb[o] += g;
        double* row = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += g * x[i];
      }
    }
    if (l == 0) break;

    std::vector<double> below(batch * in, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      double* dst = below.data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = delta[b * out + o];
        if (g == 0.0) continue;
        const double* row = weights + o * in;
        for (std::size_t i = 0; i < in; ++i) dst[i] += g * row[i];
      }
      const double* a = prev.data() + b * in;
      for (std::size_t i = 0; i < in; ++i) {
        if (a[i] <= 0.0) dst[i] = 0.0;
      }
    }
    delta = std::move(below);
  }
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
inline std::vector<double> dense_fan_in_init(std::span<const std::size_t> sizes, RngStream& rng) {
  std::vector<double> params;
  params.reserve(dense_param_count(sizes));
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    const std::size_t count = sizes[l + 1] * sizes[l] + sizes[l + 1];
    for (std::size_t k = 0; k < count; ++k) params.push_back((2.0 * rng.uniform() - 1.0) * bound);
  }
  return params;
}

}  // namespace rgcf::detail

#endif  // RGCF_DETAIL_DENSE_HPP
