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
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"

using namespace rgcf;

TEST(Bench, ProducesFiniteTimings) {
  for (const char* name : {"rgcf", "mean", "krum", "median", "trimmed_mean", "bulyan"}) {
    const auto method = BenchMethod::parse(name);
    ASSERT_TRUE(method.has_value()) << name;
    EXPECT_EQ(method->name(), name);
    const BenchResult r = bench_filtering(*method, 11, 200, 10, 1);
    EXPECT_EQ(r.reps, 10u);
    EXPECT_TRUE(std::isfinite(r.mean_seconds));
    EXPECT_GE(r.mean_seconds, 0.0);
    EXPECT_GE(r.std_seconds, 0.0);
  }
  EXPECT_FALSE(BenchMethod::parse("zeno").has_value());
}

TEST(Bench, RejectsBadArguments) {
  EXPECT_THROW(bench_filtering(BenchMethod::rgcf(), 10, 100, 9, 1), Error);
  EXPECT_THROW(bench_filtering(BenchMethod::of(AggregatorKind::Bulyan), 10, 100, 10, 1, false, 3), Error);
  EXPECT_EQ(default_bench_f(10), 1u);
  EXPECT_EQ(default_bench_f(100), 24u);
}

TEST(Compare, Verdicts) {
  EXPECT_EQ(judge_convergence(0.96, 0.98, false), Verdict::Converged);
  EXPECT_EQ(judge_convergence(0.95, 0.98, false), Verdict::Converged);
  EXPECT_EQ(judge_convergence(0.90, 0.98, false), Verdict::Inconclusive);
  EXPECT_EQ(judge_convergence(0.78, 0.98, false), Verdict::Failed);
  EXPECT_EQ(judge_convergence(0.98, 0.98, true), Verdict::Failed);
  EXPECT_EQ(judge_convergence(std::nan(""), 0.98, false), Verdict::Failed);
  EXPECT_STREQ(verdict_symbol(Verdict::NotApplicable), "–");
}

TEST(Compare, FCountPerRule) {
  EXPECT_EQ(*compare_f_count(AggregatorKind::Krum, 10, 9), 7u);
  EXPECT_EQ(*compare_f_count(AggregatorKind::TrimmedMean, 10, 5), 4u);
  EXPECT_EQ(*compare_f_count(AggregatorKind::CoordMedian, 10, 5), 0u);
  EXPECT_EQ(*compare_f_count(AggregatorKind::Bulyan, 11, 2), 2u);
  EXPECT_FALSE(compare_f_count(AggregatorKind::Bulyan, 10, 2).has_value());
}

TEST(Compare, SmallGrid) {
  RngStream tr(2, streams::kData), vr(2, streams::kValidation);
  const Dataset train = synth_gaussian_blobs(3, 40, 3, 4.0, tr);
  const Dataset val = synth_gaussian_blobs(3, 20, 3, 4.0, vr);
  CompareSetup s;
  s.base.arch = Architecture::logistic(3, 3);
  s.base.n_workers = 5;
  s.base.steps = 20;
  s.base.batch_size = 8;
  s.base.seed = 2;
  s.methods = {BenchMethod::rgcf(), BenchMethod::of(AggregatorKind::Krum), BenchMethod::of(AggregatorKind::Bulyan)};
  s.attacks = {AttackSpec::with_default_scale(AttackKind::AllOnes)};
  s.fractions = {0.2, 0.6};
  EXPECT_THROW(run_compare(s, train, val, nullptr), Error);
  const FilterNet filter = FilterNet::zeros(s.base.arch.param_count());  // rejects everything
  std::size_t seen = 0;
  const auto cells = run_compare(s, train, val, &filter, [&](const CompareCell&) { ++seen; });
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(seen, 6u);
  // A filter that rejects every report leaves the initial model, which is
  // exactly the zero-update reference.
  EXPECT_EQ(cells[0].accepted_updates, 0u);
  EXPECT_EQ(cells[0].verdict, Verdict::Converged);
  EXPECT_EQ(cells[4].verdict, Verdict::NotApplicable);
  EXPECT_EQ(cells[5].verdict, Verdict::NotApplicable);
}
