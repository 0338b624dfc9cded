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
#ifndef RGCF_SIMULATION_HPP
#define RGCF_SIMULATION_HPP

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgcf/aggregators.hpp"
#include "rgcf/attacks.hpp"
#include "rgcf/core_types.hpp"
#include "rgcf/csv.hpp"
#include "rgcf/data.hpp"
#include "rgcf/filter.hpp"
#include "rgcf/models.hpp"
#include "rgcf/worker.hpp"

namespace rgcf {

enum class RunMode { Rgcf, Aggregator };

struct RunConfig {
  RunMode mode = RunMode::Rgcf;
  AggregatorSpec aggregator;
  std::size_t n_workers = 10;
  double byzantine_fraction = 0.0;
  AttackSpec attack = AttackSpec::with_default_scale(AttackKind::InverseScaled);
  std::size_t steps = 1000;
  double server_lr = 0.01;
  std::size_t batch_size = 128;
  std::size_t eval_every = 25;
  std::uint64_t seed = 0;
  Architecture arch;

  /// round(n_workers * byzantine_fraction), half away from zero.
  std::size_t byzantine_count() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_workers) * byzantine_fraction));
  }

  void validate() const {
    arch.validate();
    if (n_workers == 0) throw Error(ErrorKind::InvalidArgument, "n_workers must be >= 1");
    if (!(byzantine_fraction >= 0.0 && byzantine_fraction <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "byzantine_fraction must be in [0, 1]");
    }
    if (steps == 0) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
    if (!(server_lr > 0.0) || !std::isfinite(server_lr)) {
      throw Error(ErrorKind::InvalidArgument, "server_lr must be positive");
    }
    if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
    if (eval_every == 0) throw Error(ErrorKind::InvalidArgument, "eval_every must be >= 1");
    attack.validate();
    if (mode == RunMode::Aggregator) check_preconditions(aggregator, n_workers);
  }
};

struct StepRecord {
  std::size_t step;
  double train_loss;
  // RGCF: 0/1 provenance of the queried worker. Aggregation: number of
  // Byzantine inputs.
  std::size_t ground_truth;
  // RGCF: filter output probability. Aggregation: Krum's selected index
  // or -1.
  double predicted;
  // RGCF: the mask B. Aggregation: L2 norm of the aggregate.
  double decision;
};

struct EvalRecord {
  std::size_t step;
  double val_accuracy;
  double val_loss;
};

struct RunSummary {
  std::size_t steps_completed = 0;
  std::size_t accepted_honest = 0;
  std::size_t rejected_honest = 0;
  std::size_t accepted_byz = 0;
  std::size_t rejected_byz = 0;
  std::size_t gradients_transferred = 0;
  bool diverged = false;
  double final_val_accuracy = 0.0;
  double final_val_loss = 0.0;

  std::size_t accepted_updates() const { return accepted_honest + accepted_byz; }
};

struct RunMetrics {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  RunSummary summary;
  double wall_time_seconds = 0.0;
  ParamVector initial_params = ParamVector::zeros(1);
  ParamVector final_params = ParamVector::zeros(1);
};

/// Exact accuracy (argmax, lowest index on ties) and mean cross-entropy
/// over the whole dataset.
inline std::pair<double, double> evaluate(const ServerModel& model, const Dataset& data) {
  data.validate();
  constexpr std::size_t kChunk = 1024;
  const std::size_t classes = model.architecture().classes;
  std::size_t correct = 0;
  double total_loss = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, data.size() - start);
    LabeledBatch batch{data.in_dim,
                       {data.row(start), data.row(start) + len * data.in_dim},
                       {data.labels.begin() + static_cast<std::ptrdiff_t>(start),
                        data.labels.begin() + static_cast<std::ptrdiff_t>(start + len)}};
    const auto logits = forward_logits(model, batch);
    for (std::size_t b = 0; b < len; ++b) {
      const double* z = logits.data() + b * classes;
      const auto best = static_cast<std::size_t>(std::max_element(z, z + classes) - z);
      correct += best == batch.labels[b] ? 1 : 0;
      total_loss -= detail::log_prob_of(z, classes, batch.labels[b]);
    }
  }
  const double n = static_cast<double>(data.size());
  return {static_cast<double>(correct) / n, total_loss / n};
}

struct FilterDecision {
  double probability;
  bool reject;
};

namespace detail {

struct Cluster {
  std::vector<Worker> workers;
  ParamVector initial_params;
  std::size_t byzantine = 0;
};

// Shards, the fixed Byzantine subset and the initial model, all derived
// from the run seed alone.
inline Cluster make_cluster(const RunConfig& cfg, const Dataset& train) {
  train.validate();
  if (train.in_dim != cfg.arch.in_dim) throw Error(ErrorKind::ShapeMismatch, "training data does not match model");

  RngStream shard_rng(cfg.seed, streams::kShard);
  auto shards = shard(train, cfg.n_workers, shard_rng);

  const std::size_t k = cfg.byzantine_count();
  std::vector<std::size_t> order(cfg.n_workers);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream pick(cfg.seed, streams::kByzantineSet);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + pick.uniform_index(cfg.n_workers - i)]);
  }
  std::vector<bool> byzantine(cfg.n_workers, false);
  for (std::size_t i = 0; i < k; ++i) byzantine[order[i]] = true;

  RngStream init(cfg.seed, streams::kServerInit);
  Cluster cluster{{}, ServerModel::random_init(cfg.arch, init).params(), k};
  for (std::size_t i = 0; i < cfg.n_workers; ++i) {
    WorkerSpec spec{i, byzantine[i] ? std::optional<AttackSpec>(cfg.attack) : std::nullopt,
                    std::make_shared<const Dataset>(std::move(shards[i])), cfg.batch_size};
    spec.validate();
    cluster.workers.push_back(Worker{std::move(spec), RngStream(cfg.seed, streams::kWorkerBatchBase + i)});
  }
  return cluster;
}

inline bool should_eval(std::size_t step, const RunConfig& cfg) {
  return step % cfg.eval_every == 0 || step == cfg.steps;
}

inline void record_eval(RunMetrics& m, const RunConfig& cfg, const ParamVector& params, const Dataset& val,
                        std::size_t step) {
  const auto [acc, loss] = evaluate(ServerModel(cfg.arch, params), val);
  m.evals.push_back({step, acc, loss});
}

inline void finish(RunMetrics& m, const ParamVector& params, std::chrono::steady_clock::time_point start) {
  m.final_params = params;
  if (m.summary.diverged) {
    m.summary.final_val_accuracy = std::numeric_limits<double>::quiet_NaN();
    m.summary.final_val_loss = std::numeric_limits<double>::quiet_NaN();
    m.evals.push_back({m.summary.steps_completed, m.summary.final_val_accuracy, m.summary.final_val_loss});
  } else if (!m.evals.empty()) {
    m.summary.final_val_accuracy = m.evals.back().val_accuracy;
    m.summary.final_val_loss = m.evals.back().val_loss;
  }
  m.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// The filtered server loop: each step queries one uniformly chosen
/// worker, asks `classifier` whether to reject, and applies the masked
/// update. `classifier` maps a GradientReport to a FilterDecision.
template <class Classifier>
  requires std::invocable<Classifier&, const GradientReport&>
RunMetrics run_rgcf(const RunConfig& cfg, const Dataset& train, const Dataset& val, Classifier&& classifier) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  detail::Cluster cluster = detail::make_cluster(cfg, train);
  RngStream select(cfg.seed, streams::kWorkerSelect);

  RunMetrics m;
  m.initial_params = cluster.initial_params;
  ParamVector params = cluster.initial_params;
  detail::record_eval(m, cfg, params, val, 0);

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const std::size_t i = static_cast<std::size_t>(select.uniform_index(cfg.n_workers));
    try {
      GradientReport report = cluster.workers[i].step(params, cfg.arch);
      m.summary.gradients_transferred += 1;
      const FilterDecision decision = classifier(std::as_const(report));
      const bool byz = report.provenance.is_byzantine();
      params = apply_update(params, report.gradient, cfg.server_lr, decision.reject);
      if (byz) {
        (decision.reject ? m.summary.rejected_byz : m.summary.accepted_byz) += 1;
      } else {
        (decision.reject ? m.summary.rejected_honest : m.summary.accepted_honest) += 1;
      }
      m.steps.push_back({step, report.loss, byz ? 1u : 0u, decision.probability, decision.reject ? 1.0 : 0.0});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteValue) throw;
      m.summary.diverged = true;
      break;
    }
    m.summary.steps_completed = step;
    if (detail::should_eval(step, cfg)) detail::record_eval(m, cfg, params, val, step);
  }
  detail::finish(m, params, start);
  return m;
}

inline RunMetrics run_rgcf(const RunConfig& cfg, const Dataset& train, const Dataset& val, const FilterNet& filter) {
  if (filter.d != cfg.arch.param_count()) {
    throw Error(ErrorKind::DimensionMismatch, "filter was trained for d=" + std::to_string(filter.d) +
                                                  " but the model has d=" + std::to_string(cfg.arch.param_count()));
  }
  return run_rgcf(cfg, train, val, [&filter](const GradientReport& r) {
    const double p = filter_forward(filter, r.gradient, r.loss);
    return FilterDecision{p, p >= filter.threshold};
  });
}

/// The baseline server loop: every step queries all n workers and applies
/// the aggregate.
inline RunMetrics run_aggregated(const RunConfig& cfg, const Dataset& train, const Dataset& val) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  detail::Cluster cluster = detail::make_cluster(cfg, train);

  RunMetrics m;
  m.initial_params = cluster.initial_params;
  ParamVector params = cluster.initial_params;
  detail::record_eval(m, cfg, params, val, 0);

  std::vector<ParamVector> grads;
  grads.reserve(cfg.n_workers);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    try {
      grads.clear();
      double loss_sum = 0.0;
      for (auto& worker : cluster.workers) {
        GradientReport report = worker.step(params, cfg.arch);
        loss_sum += report.loss;
        grads.push_back(std::move(report.gradient));
      }
      m.summary.gradients_transferred += cfg.n_workers;
      const AggregateResult agg = aggregate(cfg.aggregator, grads);
      params = apply_update(params, agg.vector, cfg.server_lr, false);
      m.steps.push_back({step, loss_sum / static_cast<double>(cfg.n_workers), cluster.byzantine,
                         agg.selected ? static_cast<double>(*agg.selected) : -1.0, l2_norm(agg.vector.values())});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteValue) throw;
      m.summary.diverged = true;
      break;
    }
    m.summary.steps_completed = step;
    if (detail::should_eval(step, cfg)) detail::record_eval(m, cfg, params, val, step);
  }
  detail::finish(m, params, start);
  return m;
}

/// steps.csv, eval.csv and summary.csv. Wall time is left out so the
/// files depend only on the configuration.
inline void write_run_csv(const RunMetrics& m, const std::filesystem::path& dir) {
  {
    CsvWriter w(dir / "steps.csv", {"step", "train_loss", "ground_truth", "predicted", "decision"});
    for (const auto& s : m.steps) {
      w.cell(s.step).cell(s.train_loss).cell(s.ground_truth).cell(s.predicted).cell(s.decision);
      w.end_row();
    }
    w.flush();
  }
  {
    CsvWriter w(dir / "eval.csv", {"step", "val_accuracy", "val_loss"});
    for (const auto& e : m.evals) {
      w.cell(e.step).cell(e.val_accuracy).cell(e.val_loss);
      w.end_row();
    }
    w.flush();
  }
  {
    const RunSummary& s = m.summary;
    CsvWriter w(dir / "summary.csv",
                {"steps_completed", "accepted_honest", "rejected_honest", "accepted_byz", "rejected_byz",
                 "gradients_transferred", "diverged", "final_val_accuracy", "final_val_loss"});
    w.cell(s.steps_completed).cell(s.accepted_honest).cell(s.rejected_honest).cell(s.accepted_byz);
    w.cell(s.rejected_byz).cell(s.gradients_transferred).cell(std::size_t{s.diverged ? 1u : 0u});
    w.cell(s.final_val_accuracy).cell(s.final_val_loss);
    w.end_row();
    w.flush();
  }
}

}  // namespace rgcf

#endif  // RGCF_SIMULATION_HPP
