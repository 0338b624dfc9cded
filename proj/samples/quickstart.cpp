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

// Trains a gradient filter on a blobs task, then trains a logistic model
// with half of the workers sending reversed gradients.

#include <cstdio>

#include "rgcf/rgcf.hpp"

int main() {
  using namespace rgcf;
  const std::uint64_t seed = 7;
  RngStream local_rng(seed, streams::kLocalData), train_rng(seed, streams::kData), val_rng(seed, streams::kValidation);
  const Dataset local = synth_gaussian_blobs(10, 1000, 10, 4.0, local_rng);
  const Dataset train = synth_gaussian_blobs(10, 1000, 10, 4.0, train_rng);
  const Dataset val = synth_gaussian_blobs(10, 200, 10, 4.0, val_rng);
  const Architecture arch = Architecture::logistic(10, 10);

  const FilterTrainResult trained = train_filter(FilterTrainConfig{}, local, arch, RngStream(seed, streams::kFilterTrainer));
  std::printf("filter: last-100 training accuracy %.3f\n", trained.tail_accuracy(100));

  RunConfig cfg;
  cfg.arch = arch;
  cfg.seed = seed;
  cfg.steps = 1000;
  cfg.byzantine_fraction = 0.5;
  cfg.attack = AttackSpec::with_default_scale(AttackKind::InverseScaled);

  const RunMetrics filtered = run_rgcf(cfg, train, val, trained.filter);
  const RunSummary& s = filtered.summary;
  std::printf("rgcf: accepted %zu honest, %zu byzantine; rejected %zu honest, %zu byzantine; val accuracy %.3f\n",
              s.accepted_honest, s.accepted_byz, s.rejected_honest, s.rejected_byz, s.final_val_accuracy);

  cfg.mode = RunMode::Aggregator;
  cfg.aggregator = {AggregatorKind::Mean, 0};
  const RunMetrics averaged = run_aggregated(cfg, train, val);
  std::printf("mean: val accuracy %.3f\n", averaged.summary.final_val_accuracy);
}
