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
#ifndef RGCF_BENCH_HPP
#define RGCF_BENCH_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rgcf/aggregators.hpp"
#include "rgcf/core_types.hpp"
#include "rgcf/filter.hpp"

namespace rgcf {

/// Either the RGCF filter or one of the aggregation rules.
struct BenchMethod {
  std::optional<AggregatorKind> aggregator;  // nullopt = RGCF

  static BenchMethod rgcf() { return {}; }
  static BenchMethod of(AggregatorKind kind) { return {kind}; }

  std::string name() const { return aggregator ? to_string(*aggregator) : "rgcf"; }

  static std::optional<BenchMethod> parse(std::string_view s) {
    if (s == "rgcf") return rgcf();
    if (auto k = parse_aggregator_kind(s)) return of(*k);
    return std::nullopt;
  }
};

struct BenchResult {
  std::string method;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t reps = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
};

/// f used for the rules that take one when none is given: the largest
/// value Bulyan accepts, so every rule runs with the same assumption.
inline std::size_t default_bench_f(std::size_t n) { return n >= 3 ? (n - 3) / 4 : 0; }

/// Wall time of one filtering or aggregation decision over synthetic
/// N(0,1) gradients; gradient generation is excluded. With
/// `simulate_transfer`, each decision also copies every gradient it
/// consumes (one for RGCF, n for aggregation) into a receive buffer.
inline BenchResult bench_filtering(const BenchMethod& method, std::size_t n, std::size_t d, std::size_t reps,
                                   std::uint64_t seed, bool simulate_transfer = false,
                                   std::optional<std::size_t> f_count = std::nullopt) {
  if (reps < 10) throw Error(ErrorKind::InvalidArgument, "bench needs reps >= 10");
  if (n == 0 || d == 0) throw Error(ErrorKind::InvalidArgument, "bench needs n >= 1 and d >= 1");

  RngStream rng(seed, streams::kBench);
  std::vector<ParamVector> grads;
  grads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> g(d);
    for (double& x : g) x = rng.normal();
    grads.push_back(ParamVector(std::move(g)));
  }
  RngStream filter_rng(seed, streams::kFilterInit);
  const FilterNet filter = method.aggregator ? FilterNet::zeros(1) : FilterNet::random_init(d, filter_rng);
  const AggregatorSpec spec{method.aggregator.value_or(AggregatorKind::Mean), f_count.value_or(default_bench_f(n))};
  if (method.aggregator) check_preconditions(spec, n);

  std::vector<double> buffer;
  double sink = 0.0;
  auto once = [&](std::size_t rep) {
    if (!method.aggregator) {
      const ParamVector& g = grads[rep % n];
      if (simulate_transfer) buffer.assign(g.begin(), g.end());
      sink += filter_forward(filter, g, 1.0);
    } else {
      if (simulate_transfer) {
        for (const auto& g : grads) buffer.assign(g.begin(), g.end());
      }
      sink += aggregate(spec, grads).vector[0];
    }
  };

  once(0);  // warm-up
  std::vector<double> times;
  times.reserve(reps);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    once(rep);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  if (!std::isfinite(sink)) throw Error(ErrorKind::NonFiniteValue, "benchmark produced a non-finite result");

  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= static_cast<double>(reps - 1);
  return {method.name(), n, d, reps, mean, std::sqrt(var)};
}

}  // namespace rgcf

#endif  // RGCF_BENCH_HPP
