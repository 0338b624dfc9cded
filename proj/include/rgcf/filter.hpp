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
#ifndef RGCF_FILTER_HPP
#define RGCF_FILTER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgcf/attacks.hpp"
#include "rgcf/core_types.hpp"
#include "rgcf/data.hpp"
#include "rgcf/detail/dense.hpp"
#include "rgcf/models.hpp"
#include "rgcf/worker.hpp"

namespace rgcf {

inline constexpr std::size_t kFilterHidden1 = 64;
inline constexpr std::size_t kFilterHidden2 = 32;
inline constexpr double kFilterClamp = 1e-7;

/// Gradient classifier: (d + 1) -> 64 -> 32 -> 1, ReLU hidden layers and
/// a sigmoid output read as the probability that the gradient is
/// Byzantine. The extra input is the worker's reported loss.
struct FilterNet {
  std::size_t d = 0;
  ParamVector params = ParamVector::zeros(1);
  AdamState adam;
  double threshold = 0.5;
  bool unit_norm_input = false;

  std::array<std::size_t, 4> layer_sizes() const { return {d + 1, kFilterHidden1, kFilterHidden2, 1}; }

  static std::size_t param_count_for(std::size_t d) {
    const std::array<std::size_t, 4> sizes{d + 1, kFilterHidden1, kFilterHidden2, 1};
    return detail::dense_param_count(sizes);
  }

  static FilterNet zeros(std::size_t d, double lr = 3e-3) {
    if (d == 0) throw Error(ErrorKind::InvalidArgument, "filter needs d >= 1");
    const std::size_t count = param_count_for(d);
    return {d, ParamVector::zeros(count), AdamState::zeros(count, lr)};
  }

  static FilterNet random_init(std::size_t d, RngStream& rng, double lr = 3e-3) {
    FilterNet net = zeros(d, lr);
    net.params = ParamVector(detail::dense_fan_in_init(net.layer_sizes(), rng));
    return net;
  }
};

namespace detail {

inline std::vector<double> filter_input(const FilterNet& filter, const ParamVector& grad, double loss) {
  if (grad.size() != filter.d) {
    throw Error(ErrorKind::ShapeMismatch, "filter expects d=" + std::to_string(filter.d) + ", got " +
                                              std::to_string(grad.size()));
  }
  if (!std::isfinite(loss)) throw Error(ErrorKind::InvalidArgument, "filter loss input must be finite");
  std::vector<double> x(grad.begin(), grad.end());
  if (filter.unit_norm_input) {
    const double norm = l2_norm(x);
    if (norm > 0.0) {
      for (double& v : x) v /= norm;
    }
  }
  x.push_back(loss);
  return x;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Probability in (0, 1) that (grad, loss) came from a Byzantine worker.
inline double filter_forward(const FilterNet& filter, const ParamVector& grad, double loss) {
  const auto x = detail::filter_input(filter, grad, loss);
  const auto sizes = filter.layer_sizes();
  const auto acts = detail::dense_forward(sizes, filter.params.values(), x, 1);
  return detail::sigmoid(acts.layers.back()[0]);
}

/// 1 (reject) when the forward output reaches the threshold.
inline bool classify(const FilterNet& filter, const ParamVector& grad, double loss) {
  return filter_forward(filter, grad, loss) >= filter.threshold;
}

/// Weighted binary cross-entropy as a negative log-likelihood; the
/// Byzantine class carries weight p.
inline double filter_loss(double pred, bool label, double p) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "positive weight must be > 0");
  const double q = std::clamp(pred, kFilterClamp, 1.0 - kFilterClamp);
  return label ? -p * std::log(q) : -std::log(1.0 - q);
}

/// d filter_loss / d params for one example.
inline ParamVector filter_gradient(const FilterNet& filter, const ParamVector& grad, double loss, bool label,
                                   double p) {
  const auto x = detail::filter_input(filter, grad, loss);
  const auto sizes = filter.layer_sizes();
  const auto acts = detail::dense_forward(sizes, filter.params.values(), x, 1);
  const double pred = detail::sigmoid(acts.layers.back()[0]);
  double dz = 0.0;
  if (pred > kFilterClamp && pred < 1.0 - kFilterClamp) dz = label ? -p * (1.0 - pred) : pred;
  std::vector<double> out(filter.params.size(), 0.0);
  detail::dense_backward(sizes, filter.params.values(), acts, {dz}, out);
  return ParamVector(std::move(out));
}

struct FilterTrainConfig {
  std::size_t episodes = 1;
  std::size_t steps_per_episode = 500;
  double positive_weight = 10.0;
  double filter_lr = 3e-3;
  double server_lr = 0.01;
  std::size_t batch_size = 128;
  // nullopt makes both simulated workers honest.
  std::optional<AttackSpec> training_attack = AttackSpec{AttackKind::RandomGaussian, 1.0};
  double threshold = 0.5;
  bool unit_norm_input = false;

  void validate() const {
    if (episodes == 0) throw Error(ErrorKind::InvalidArgument, "episodes must be >= 1");
    if (!(positive_weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "positive_weight must be > 0");
    if (!(filter_lr >= 0.0) || !std::isfinite(filter_lr)) {
      throw Error(ErrorKind::InvalidArgument, "filter_lr must be finite and >= 0");
    }
    if (!(server_lr > 0.0)) throw Error(ErrorKind::InvalidArgument, "server_lr must be > 0");
    if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be in (0,1)");
    if (training_attack) training_attack->validate();
  }
};

/// One Adam step on the single-example weighted loss.
inline FilterNet filter_train_step(FilterNet filter, const GradientReport& report, bool label,
                                   const FilterTrainConfig& cfg) {
  const ParamVector g = filter_gradient(filter, report.gradient, report.loss, label, cfg.positive_weight);
  filter.adam.lr = cfg.filter_lr;
  auto [state, params] = adam_step(std::move(filter.adam), filter.params, g);
  filter.adam = std::move(state);
  filter.params = std::move(params);
  return filter;
}

struct FilterTrainRecord {
  std::size_t episode;
  std::size_t step;  // 1-based across all episodes
  bool label;
  double predicted;  // forward output before this step's update
  double loss;       // weighted loss at that prediction
  double running_accuracy;
};

struct FilterTrainResult {
  FilterNet filter;
  std::vector<FilterTrainRecord> log;
  std::vector<ParamVector> final_server_params;  // one per episode

  /// Classification accuracy over the last `window` logged steps.
  double tail_accuracy(std::size_t window) const {
    if (log.empty()) return 0.0;
    const std::size_t start = log.size() > window ? log.size() - window : 0;
    std::size_t correct = 0;
    for (std::size_t i = start; i < log.size(); ++i) {
      correct += ((log[i].predicted >= filter.threshold) == log[i].label) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(log.size() - start);
  }
};

namespace detail {

// Sub-streams of the trainer's stream.
inline constexpr std::uint64_t kTrainerFilterInit = 1;
inline constexpr std::uint64_t kTrainerHonest = 2;
inline constexpr std::uint64_t kTrainerByzantine = 3;
inline constexpr std::uint64_t kTrainerSelect = 4;
inline constexpr std::uint64_t kTrainerServerInit = 100;

// One simulated honest worker and one Byzantine worker sharing the local
// data. The server only ever applies honest gradients.
class LabelingSimulation {
 public:
  LabelingSimulation(const Dataset& local, const Architecture& arch, const std::optional<AttackSpec>& attack,
                     std::size_t batch_size, double server_lr, RngStream& rng, std::uint64_t episode)
      : arch_(arch),
        server_lr_(server_lr),
        select_(rng.split(kTrainerSelect).split(episode)),
        params_(ParamVector::zeros(1)) {
    auto shared = std::make_shared<const Dataset>(local);
    workers_.push_back(Worker{WorkerSpec{0, std::nullopt, shared, batch_size}, rng.split(kTrainerHonest).split(episode)});
    workers_.push_back(Worker{WorkerSpec{1, attack, shared, batch_size}, rng.split(kTrainerByzantine).split(episode)});
    workers_[0].spec.validate();
    workers_[1].spec.validate();
    RngStream init = rng.split(kTrainerServerInit + episode);
    params_ = ServerModel::random_init(arch_, init).params();
  }

  /// Draws the next labelled report, then advances the server with the
  /// ground-truth mask.
  std::pair<GradientReport, bool> next() {
    const std::size_t i = static_cast<std::size_t>(select_.uniform_index(2));
    GradientReport report = workers_[i].step(params_, arch_);
    const bool byzantine = report.provenance.is_byzantine();
    params_ = apply_update(params_, report.gradient, server_lr_, byzantine);
    return {std::move(report), byzantine};
  }

  const ParamVector& params() const noexcept { return params_; }

 private:
  Architecture arch_;
  double server_lr_;
  RngStream select_;
  std::vector<Worker> workers_;
  ParamVector params_;
};

}  // namespace detail

/// Episodic simulation training. Every episode restarts the server from a
/// fresh random init; each step picks one of the two workers uniformly,
/// updates the server with the true label, scores the report with the
/// filter and takes one online step on the weighted loss.
inline FilterTrainResult train_filter(const FilterTrainConfig& cfg, const Dataset& local_data,
                                      const Architecture& server_arch, RngStream rng) {
  cfg.validate();
  local_data.validate();
  server_arch.validate();
  if (local_data.in_dim != server_arch.in_dim) {
    throw Error(ErrorKind::ShapeMismatch, "local data does not match the server architecture");
  }

  RngStream init = rng.split(detail::kTrainerFilterInit);
  FilterTrainResult result{FilterNet::random_init(server_arch.param_count(), init, cfg.filter_lr), {}, {}};
  result.filter.threshold = cfg.threshold;
  result.filter.unit_norm_input = cfg.unit_norm_input;

  std::size_t step = 0;
  std::size_t correct = 0;
  for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
    detail::LabelingSimulation sim(local_data, server_arch, cfg.training_attack, cfg.batch_size, cfg.server_lr, rng,
                                   episode);
    for (std::size_t t = 0; t < cfg.steps_per_episode; ++t) {
      auto [report, label] = sim.next();
      const double pred = filter_forward(result.filter, report.gradient, report.loss);
      ++step;
      correct += ((pred >= result.filter.threshold) == label) ? 1 : 0;
      result.log.push_back({episode, step, label, pred, filter_loss(pred, label, cfg.positive_weight),
                            static_cast<double>(correct) / static_cast<double>(step)});
      result.filter = filter_train_step(std::move(result.filter), report, label, cfg);
    }
    result.final_server_params.push_back(sim.params());
  }
  return result;
}

struct FilterEvaluation {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t true_positive = 0;
  std::size_t true_negative = 0;
  std::size_t positives = 0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Accuracy of a frozen filter on `count` fresh reports from the same
/// two-worker simulation, with `attack` on the Byzantine side.
inline FilterEvaluation evaluate_filter(const FilterNet& filter, const Dataset& local_data,
                                        const Architecture& server_arch, const AttackSpec& attack, std::size_t count,
                                        double server_lr, std::size_t batch_size, RngStream rng) {
  detail::LabelingSimulation sim(local_data, server_arch, attack, batch_size, server_lr, rng, 0);
  FilterEvaluation ev;
  for (std::size_t k = 0; k < count; ++k) {
    auto [report, label] = sim.next();
    const bool predicted = classify(filter, report.gradient, report.loss);
    ++ev.total;
    ev.positives += label ? 1 : 0;
    if (predicted == label) {
      ++ev.correct;
      (label ? ev.true_positive : ev.true_negative) += 1;
    }
  }
  return ev;
}

}  // namespace rgcf

#endif  // RGCF_FILTER_HPP
