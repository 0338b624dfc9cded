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

// Seven honest gradients near (1, 1) and two outliers, through each rule.

#include <cstdio>
#include <vector>

#include "rgcf/rgcf.hpp"

int main() {
  using namespace rgcf;
  std::vector<ParamVector> grads;
  RngStream rng(1, 0);
  for (int i = 0; i < 7; ++i) grads.emplace_back(std::vector<double>{1.0 + 0.1 * rng.normal(), 1.0 + 0.1 * rng.normal()});
  grads.emplace_back(std::vector<double>{-50.0, 40.0});
  grads.emplace_back(std::vector<double>{30.0, -60.0});

  const AggregatorSpec specs[] = {
      {AggregatorKind::Mean, 0}, {AggregatorKind::Krum, 2},   {AggregatorKind::CoordMedian, 0},
      {AggregatorKind::TrimmedMean, 2}, {AggregatorKind::Bulyan, 1},
  };
  for (const auto& spec : specs) {
    const AggregateResult r = aggregate(spec, grads);
    std::printf("%-13s (% .4f, % .4f)", to_string(spec.kind), r.vector[0], r.vector[1]);
    if (r.selected) std::printf("  selected worker %zu", *r.selected);
    std::printf("\n");
  }
}
