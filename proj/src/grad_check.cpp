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

#include "kgar/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace kgar {

namespace {

double evaluate(const LossBuilder& loss, ModelParams& params) {
  Tape tape;
  return loss(tape, params).scalar();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, ModelParams& params, double eps, double floor) {
  params.zero_grad();
  {
    Tape tape;
    auto l = loss(tape, params);
    tape.backward(l);
  }

  GradCheckResult result;
  for (auto& p : params) {
    for (Index i = 0; i < p.value.size(); ++i) {
      const double analytic = p.has_grad ? p.grad.data()[i] : 0.0;
      double& w = p.value.data()[i];
      const double saved = w;
      w = saved + eps;
      const double up = evaluate(loss, params);
      w = saved - eps;
      const double down = evaluate(loss, params);
      w = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++result.coordinates;
      if (err > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = std::max(err, result.max_rel_error);
        result.worst_param = p.name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace kgar
