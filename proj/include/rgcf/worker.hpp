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
#ifndef RGCF_WORKER_HPP
#define RGCF_WORKER_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>

#include "rgcf/attacks.hpp"
#include "rgcf/core_types.hpp"
#include "rgcf/data.hpp"
#include "rgcf/models.hpp"

namespace rgcf {

struct WorkerSpec {
  std::size_t id = 0;
  std::optional<AttackSpec> attack;  // set for Byzantine workers
  std::shared_ptr<const Dataset> shard;
  std::size_t batch_size = 128;

  bool is_byzantine() const noexcept { return attack.has_value(); }

  void validate() const {
    if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "worker batch size must be >= 1");
    if (!shard || shard->size() == 0) throw Error(ErrorKind::EmptyShard, "worker has no local data");
    if (attack) attack->validate();
  }
};

/// Samples a mini-batch, computes the honest gradient and loss, then
/// replaces the gradient if the worker is Byzantine. The loss field stays
/// honest either way.
inline GradientReport worker_step(const WorkerSpec& worker, const ParamVector& params, const Architecture& arch,
                                  RngStream& rng) {
  const LabeledBatch batch = sample_minibatch(*worker.shard, worker.batch_size, rng);
  GradientReport report = backward(ServerModel(arch, params), batch);
  if (worker.attack) {
    report.gradient = apply_attack(*worker.attack, report.gradient, rng);
    report.provenance = Provenance::byzantine(worker.attack->kind);
  }
  return report;
}

/// A worker together with the random stream it alone consumes.
struct Worker {
  WorkerSpec spec;
  RngStream rng;

  GradientReport step(const ParamVector& params, const Architecture& arch) {
    return worker_step(spec, params, arch, rng);
  }
};

}  // namespace rgcf

#endif  // RGCF_WORKER_HPP
