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
#ifndef RGCF_ATTACKS_HPP
#define RGCF_ATTACKS_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rgcf/core_types.hpp"

namespace rgcf {

inline constexpr std::array<AttackKind, 4> kAllAttacks = {AttackKind::RandomGaussian, AttackKind::InverseScaled,
                                                          AttackKind::AllOnes, AttackKind::GradientShift};

inline const char* to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::RandomGaussian: return "random_gaussian";
    case AttackKind::InverseScaled: return "inverse";
    case AttackKind::AllOnes: return "all_ones";
    case AttackKind::GradientShift: return "gradient_shift";
  }
  return "unknown";
}

inline std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  for (AttackKind kind : kAllAttacks) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

/// Default scale per attack: 50 for the gradient shift, 1 otherwise.
inline double default_attack_scale(AttackKind kind) { return kind == AttackKind::GradientShift ? 50.0 : 1.0; }

struct AttackSpec {
  AttackKind kind = AttackKind::RandomGaussian;
  double scale = 1.0;

  static AttackSpec with_default_scale(AttackKind kind) { return {kind, default_attack_scale(kind)}; }

  void validate() const {
    if (!std::isfinite(scale)) throw Error(ErrorKind::InvalidArgument, "attack scale must be finite");
    if ((kind == AttackKind::InverseScaled || kind == AttackKind::GradientShift) && !(scale > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " needs a positive scale");
    }
  }

  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

/// The gradient a Byzantine worker sends in place of `true_grad`. Only
/// the random attacks draw from `rng` (one normal per coordinate).
inline ParamVector apply_attack(const AttackSpec& spec, const ParamVector& true_grad, RngStream& rng) {
  const std::size_t d = true_grad.size();
  std::vector<double> out(d);
  switch (spec.kind) {
    case AttackKind::RandomGaussian:
      for (std::size_t j = 0; j < d; ++j) out[j] = spec.scale * rng.normal();
      break;
    case AttackKind::InverseScaled:
      for (std::size_t j = 0; j < d; ++j) out[j] = -spec.scale * true_grad[j];
      break;
    case AttackKind::AllOnes:
      out.assign(d, 1.0);
      break;
    case AttackKind::GradientShift:
      for (std::size_t j = 0; j < d; ++j) out[j] = true_grad[j] + spec.scale * rng.normal();
      break;
  }
  return ParamVector(std::move(out));
}

}  // namespace rgcf

#endif  // RGCF_ATTACKS_HPP
