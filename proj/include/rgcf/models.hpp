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
#ifndef RGCF_MODELS_HPP
#define RGCF_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rgcf/core_types.hpp"
#include "rgcf/detail/dense.hpp"

namespace rgcf {

/// Server model shape. No hidden layers is multinomial logistic
/// regression; otherwise an MLP with ReLU hidden layers. The output is
/// always softmax cross-entropy over `classes`.
struct Architecture {
  std::size_t in_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 0;

  static Architecture logistic(std::size_t in_dim, std::size_t classes) { return {in_dim, {}, classes}; }
  static Architecture mlp(std::size_t in_dim, std::vector<std::size_t> hidden, std::size_t classes) {
    return {in_dim, std::move(hidden), classes};
  }

  bool is_logistic() const noexcept { return hidden.empty(); }

  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> sizes{in_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(classes);
    return sizes;
  }

  std::size_t param_count() const { return detail::dense_param_count(layer_sizes()); }

  void validate() const {
    if (in_dim == 0 || classes < 2) {
      throw Error(ErrorKind::InvalidArgument, "architecture needs in_dim >= 1 and classes >= 2");
    }
    for (std::size_t h : hidden) {
      if (h == 0) throw Error(ErrorKind::InvalidArgument, "hidden layer width must be >= 1");
    }
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Row-major batch_size x in_dim inputs with one class label per row.
struct LabeledBatch {
  std::size_t in_dim = 0;
  std::vector<double> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

class ServerModel {
 public:
  ServerModel(Architecture arch, ParamVector params) : arch_(std::move(arch)), params_(std::move(params)) {
    arch_.validate();
    if (params_.size() != arch_.param_count()) {
      throw Error(ErrorKind::ShapeMismatch, "parameter count " + std::to_string(params_.size()) +
                                                " does not match architecture (" +
                                                std::to_string(arch_.param_count()) + ")");
    }
  }

  static ServerModel zeros(const Architecture& arch) { return {arch, ParamVector::zeros(arch.param_count())}; }

  static ServerModel random_init(const Architecture& arch, RngStream& rng) {
    return {arch, ParamVector(detail::dense_fan_in_init(arch.layer_sizes(), rng))};
  }

  const Architecture& architecture() const noexcept { return arch_; }
  const ParamVector& params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }

  ServerModel with_params(ParamVector params) const { return {arch_, std::move(params)}; }

 private:
  Architecture arch_;
  ParamVector params_;
};

namespace detail {

inline void check_batch(const ServerModel& model, const LabeledBatch& batch) {
  const Architecture& arch = model.architecture();
  if (batch.size() == 0) throw Error(ErrorKind::ShapeMismatch, "empty batch");
  if (batch.in_dim != arch.in_dim || batch.inputs.size() != batch.size() * arch.in_dim) {
    throw Error(ErrorKind::ShapeMismatch, "batch input dimension " + std::to_string(batch.in_dim) +
                                              " does not match model input " + std::to_string(arch.in_dim));
  }
  for (std::size_t label : batch.labels) {
    if (label >= arch.classes) throw Error(ErrorKind::ShapeMismatch, "label out of range");
  }
}

// Per-example log-softmax at the true label, computed stably.
inline double log_prob_of(const double* logits, std::size_t classes, std::size_t label) {
  const double top = *std::max_element(logits, logits + classes);
  double sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) sum += std::exp(logits[c] - top);
  return logits[label] - top - std::log(sum);
}

}  // namespace detail

/// Raw logits, batch_size x classes.
inline std::vector<double> forward_logits(const ServerModel& model, const LabeledBatch& batch) {
  detail::check_batch(model, batch);
  auto acts = detail::dense_forward(model.architecture().layer_sizes(), model.params().values(), batch.inputs,
                                    batch.size());
  return std::move(acts.layers.back());
}

/// Mean softmax cross-entropy over the batch.
inline double forward_loss(const ServerModel& model, const LabeledBatch& batch) {
  const std::vector<double> logits = forward_logits(model, batch);
  const std::size_t classes = model.architecture().classes;
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    total -= detail::log_prob_of(logits.data() + b * classes, classes, batch.labels[b]);
  }
  return std::max(total / static_cast<double>(batch.size()), 0.0);
}

/// Gradient of the mean batch loss plus the loss itself, as an honest report.
inline GradientReport backward(const ServerModel& model, const LabeledBatch& batch) {
  detail::check_batch(model, batch);
  const Architecture& arch = model.architecture();
  const auto sizes = arch.layer_sizes();
  const auto acts = detail::dense_forward(sizes, model.params().values(), batch.inputs, batch.size());
  const std::vector<double>& logits = acts.layers.back();

  const std::size_t classes = arch.classes;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  std::vector<double> delta(logits.size());
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double* z = logits.data() + b * classes;
    const double top = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - top);
    const double log_sum = std::log(sum);
    total -= z[batch.labels[b]] - top - log_sum;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(z[c] - top - log_sum);
      delta[b * classes + c] = (p - (c == batch.labels[b] ? 1.0 : 0.0)) * inv_batch;
    }
  }

  std::vector<double> grad(model.param_count(), 0.0);
  detail::dense_backward(sizes, model.params().values(), acts, std::move(delta), grad);
  return GradientReport(ParamVector(std::move(grad)), std::max(total * inv_batch, 0.0), Provenance::honest());
}

/// Central differences of an arbitrary scalar function of the parameters.
template <class LossFn>
ParamVector finite_diff_gradient(LossFn&& loss, const ParamVector& at, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  std::vector<double> point = at.to_vector();
  std::vector<double> grad(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) {
    const double saved = point[j];
    point[j] = saved + h;
    const double up = loss(std::as_const(point));
    point[j] = saved - h;
    const double down = loss(std::as_const(point));
    point[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return ParamVector(std::move(grad));
}

inline ParamVector finite_diff_gradient(const ServerModel& model, const LabeledBatch& batch, double h) {
  detail::check_batch(model, batch);
  return finite_diff_gradient(
      [&](const std::vector<double>& p) { return forward_loss(model.with_params(ParamVector(p)), batch); },
      model.params(), h);
}

/// Masked step: unchanged when `rejected`, otherwise params - alpha * grad.
inline ParamVector apply_update(const ParamVector& params, const ParamVector& grad, double alpha, bool rejected) {
  check_same_length(params.size(), grad.size(), "apply_update");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be positive");
  if (rejected) return params;
  std::vector<double> next = params.to_vector();
  for (std::size_t j = 0; j < next.size(); ++j) next[j] -= alpha * grad[j];
  return ParamVector(std::move(next));
}

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(std::size_t d, double lr = 1e-3) {
    AdamState s;
    s.m.assign(d, 0.0);
    s.v.assign(d, 0.0);
    s.lr = lr;
    return s;
  }
};

/// One bias-corrected Adam step.
inline std::pair<AdamState, ParamVector> adam_step(AdamState state, const ParamVector& params,
                                                   const ParamVector& grad) {
  check_same_length(params.size(), grad.size(), "adam_step");
  check_same_length(state.m.size(), params.size(), "adam_step state");
  check_same_length(state.v.size(), params.size(), "adam_step state");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  std::vector<double> next = params.to_vector();
  for (std::size_t j = 0; j < next.size(); ++j) {
    const double g = grad[j];
    state.m[j] = state.beta1 * state.m[j] + (1.0 - state.beta1) * g;
    state.v[j] = state.beta2 * state.v[j] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[j] / c1;
    const double v_hat = state.v[j] / c2;
    next[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  return {std::move(state), ParamVector(std::move(next))};
}

}  // namespace rgcf

#endif  // RGCF_MODELS_HPP
