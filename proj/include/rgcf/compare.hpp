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
#ifndef RGCF_COMPARE_HPP
#define RGCF_COMPARE_HPP

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgcf/aggregators.hpp"
#include "rgcf/attacks.hpp"
#include "rgcf/bench.hpp"
#include "rgcf/filter.hpp"
#include "rgcf/simulation.hpp"

namespace rgcf {

enum class Verdict { Converged, Failed, Inconclusive, NotApplicable };

/// Table symbol for a verdict.
inline const char* verdict_symbol(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "✓";
    case Verdict::Failed: return "✗";
    case Verdict::Inconclusive: return "~";
    case Verdict::NotApplicable: return "–";
  }
  return "?";
}

inline constexpr double kConvergedMargin = 0.03;
inline constexpr double kFailedMargin = 0.20;

/// Converged: within 3 points of the clean baseline. Failed: 20 or more
/// points below it, or a non-finite result. Anything between is
/// inconclusive.
inline Verdict judge_convergence(double accuracy, double baseline, bool diverged) {
  if (diverged || !std::isfinite(accuracy)) return Verdict::Failed;
  if (accuracy >= baseline - kConvergedMargin) return Verdict::Converged;
  if (accuracy <= baseline - kFailedMargin) return Verdict::Failed;
  return Verdict::Inconclusive;
}

/// f handed to a rule when `byzantine` workers are present. Krum and the
/// trimmed mean are capped at their largest admissible value; Bulyan is
/// not capped and returns nullopt when it cannot run.
inline std::optional<std::size_t> compare_f_count(AggregatorKind kind, std::size_t n, std::size_t byzantine) {
  const auto limit = max_f_count(kind, n);
  if (!limit) return std::nullopt;
  switch (kind) {
    case AggregatorKind::Mean:
    case AggregatorKind::CoordMedian: return 0;
    case AggregatorKind::Krum:
    case AggregatorKind::TrimmedMean: return std::min(byzantine, *limit);
    case AggregatorKind::Bulyan:
      if (byzantine > *limit) return std::nullopt;
      return byzantine;
  }
  return std::nullopt;
}

struct CompareCell {
  std::string method;
  AttackKind attack;
  double fraction;
  std::size_t byzantine = 0;
  std::optional<std::size_t> f_count;
  Verdict verdict = Verdict::NotApplicable;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double baseline = std::numeric_limits<double>::quiet_NaN();
  std::size_t accepted_updates = 0;
  bool diverged = false;
};

struct CompareSetup {
  RunConfig base;  // n_workers, steps, lr, batch, seed, arch; mode/attack/fraction are overwritten
  std::vector<BenchMethod> methods;
  std::vector<AttackSpec> attacks;
  std::vector<double> fractions;
};

/// Runs the method x attack x fraction grid. `on_cell` sees each cell as
/// soon as it is finished.
inline std::vector<CompareCell> run_compare(const CompareSetup& setup, const Dataset& train, const Dataset& val,
                                            const FilterNet* filter,
                                            const std::function<void(const CompareCell&)>& on_cell = {}) {
  const std::size_t n = setup.base.n_workers;

  // Clean references: distributed SGD with the plain mean for the
  // aggregation rules, and single-worker SGD over the same number of
  // accepted updates for RGCF.
  std::optional<double> aggregate_baseline;
  std::map<std::size_t, double> sgd_baseline;
  auto aggregation_reference = [&]() {
    if (!aggregate_baseline) {
      RunConfig cfg = setup.base;
      cfg.mode = RunMode::Aggregator;
      cfg.aggregator = {AggregatorKind::Mean, 0};
      cfg.byzantine_fraction = 0.0;
      aggregate_baseline = run_aggregated(cfg, train, val).summary.final_val_accuracy;
    }
    return *aggregate_baseline;
  };
  auto sgd_reference = [&](std::size_t accepted) {
    auto it = sgd_baseline.find(accepted);
    if (it != sgd_baseline.end()) return it->second;
    RunConfig cfg = setup.base;
    cfg.mode = RunMode::Rgcf;
    cfg.byzantine_fraction = 0.0;
    double acc;
    if (accepted == 0) {
      RngStream init(cfg.seed, streams::kServerInit);
      acc = evaluate(ServerModel::random_init(cfg.arch, init), val).first;
    } else {
      cfg.steps = accepted;
      acc = run_rgcf(cfg, train, val, [](const GradientReport&) { return FilterDecision{0.0, false}; })
                .summary.final_val_accuracy;
    }
    sgd_baseline.emplace(accepted, acc);
    return acc;
  };

  std::vector<CompareCell> cells;
  for (const auto& method : setup.methods) {
    for (const auto& attack : setup.attacks) {
      for (double fraction : setup.fractions) {
        RunConfig cfg = setup.base;
        cfg.attack = attack;
        cfg.byzantine_fraction = fraction;
        CompareCell cell{method.name(), attack.kind, fraction, cfg.byzantine_count()};
        if (!method.aggregator) {
          if (!filter) throw Error(ErrorKind::InvalidArgument, "RGCF cells need a trained filter");
          cfg.mode = RunMode::Rgcf;
          const RunMetrics m = run_rgcf(cfg, train, val, *filter);
          cell.accuracy = m.summary.final_val_accuracy;
          cell.diverged = m.summary.diverged;
          cell.accepted_updates = m.summary.accepted_updates();
          cell.baseline = sgd_reference(cell.accepted_updates);
          cell.verdict = judge_convergence(cell.accuracy, cell.baseline, cell.diverged);
        } else {
          cell.f_count = compare_f_count(*method.aggregator, n, cell.byzantine);
          if (cell.f_count) {
            cfg.mode = RunMode::Aggregator;
            cfg.aggregator = {*method.aggregator, *cell.f_count};
            const RunMetrics m = run_aggregated(cfg, train, val);
            cell.accuracy = m.summary.final_val_accuracy;
            cell.diverged = m.summary.diverged;
            cell.accepted_updates = m.summary.steps_completed;
            cell.baseline = aggregation_reference();
            cell.verdict = judge_convergence(cell.accuracy, cell.baseline, cell.diverged);
          }
        }
        if (on_cell) on_cell(cell);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

}  // namespace rgcf

#endif  // RGCF_COMPARE_HPP
