/*
 * Copyright 2026 The kgar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <string>

#include "kgar/autodiff.hpp"

namespace kgar {

/// Builds a scalar loss on a fresh tape. Must be deterministic.
using LossBuilder = std::function<Var(Tape&, ModelParams&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients with central differences
/// (f(w+eps) - f(w-eps)) / 2eps over every coordinate of every parameter.
/// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const LossBuilder& loss, ModelParams& params, double eps = 1e-5,
                           double floor = 1e-5);

}  // namespace kgar
