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
#ifndef RGCF_RGCF_HPP
#define RGCF_RGCF_HPP

#include "rgcf/aggregators.hpp"
#include "rgcf/attacks.hpp"
#include "rgcf/bench.hpp"
#include "rgcf/compare.hpp"
#include "rgcf/core_types.hpp"
#include "rgcf/csv.hpp"
#include "rgcf/data.hpp"
#include "rgcf/experiment.hpp"
#include "rgcf/filter.hpp"
#include "rgcf/filter_io.hpp"
#include "rgcf/models.hpp"
#include "rgcf/simulation.hpp"
#include "rgcf/worker.hpp"

#endif  // RGCF_RGCF_HPP
